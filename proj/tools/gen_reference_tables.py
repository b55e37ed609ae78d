"""Regenerates tests/data/*.csv with mpmath at 50 digits."""
import os

import mpmath as mp

mp.mp.dps = 50
here = os.path.join(os.path.dirname(__file__), "..", "tests", "data")


def fmt(x):
    return mp.nstr(x, 25, min_fixed=-1, max_fixed=-1)


def airy_table():
    xs = [mp.mpf(x) / 4 for x in range(-40, 41)] + [mp.mpf(x) for x in (12, 15, 20, 30)]
    with open(os.path.join(here, "airy.csv"), "w") as f:
        f.write("x,ai,aip,bi,bip\n")
        for x in xs:
            f.write(",".join(fmt(v) for v in (x, mp.airyai(x), mp.airyai(x, 1), mp.airybi(x), mp.airybi(x, 1))) + "\n")


def gamma_table():
    xs = [mp.mpf(k) / 8 for k in range(1, 81)] + [mp.mpf(-1) / 4, mp.mpf(-3) / 4, mp.mpf(-5) / 2]
    with open(os.path.join(here, "gamma.csv"), "w") as f:
        f.write("x,gamma\n")
        for x in xs:
            f.write(f"{fmt(x)},{fmt(mp.gamma(x))}\n")


if __name__ == "__main__":
    airy_table()
    gamma_table()
