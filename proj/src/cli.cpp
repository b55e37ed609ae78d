#include "phasequant/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "phasequant/error.hpp"
#include "phasequant/io.hpp"
#include "phasequant/oracle.hpp"
#include "phasequant/qlm.hpp"
#include "phasequant/semiclassical.hpp"
#include "phasequant/spectrum.hpp"

namespace phasequant::cli {

namespace {

using json = nlohmann::ordered_json;
using io::format_double;

struct Config {
  std::vector<std::string> potentials;
  double hbar = 1.0;
  double tol = 1e-12;
  int grid_points = 0;
  double xmax_factor = 2.5;
  std::string bc = "series";
  int bc_order = 10;
  std::string format = "json";
  std::string out;
  int jobs = 1;
  std::string method = "qlm";
  std::string levels = "0";
  int kmax = 3;
  std::string terminant = "stieltjes";
  double energy = std::numeric_limits<double>::quiet_NaN();
  double emin = 0.1;
  double emax = 10.0;
  int samples = 64;
  std::vector<double> lambdas;
  bool with_semiclassical = false;
  bool no_refine = false;
};

// Thrown for bad user input that only surfaces after parsing.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-');
    try {
      if (dash == std::string::npos) {
        out.push_back(std::stoi(item));
      } else {
        const int a = std::stoi(item.substr(0, dash));
        const int b = std::stoi(item.substr(dash + 1));
        if (b < a) throw ConfigError("level range `" + item + "` is decreasing");
        for (int n = a; n <= b; ++n) out.push_back(n);
      }
    } catch (const std::logic_error&) {
      throw ConfigError("cannot parse levels `" + text + "`");
    }
  }
  if (out.empty()) throw ConfigError("no levels given");
  for (const int n : out) {
    if (n < 0) throw ConfigError("levels must be >= 0");
  }
  return out;
}

spectrum::SweepOptions sweep_options(const Config& c) {
  spectrum::SweepOptions o;
  o.bc_method = semiclassical::bc_method_from_string(c.bc);
  o.k_cap = c.bc_order;
  o.grid.grid_points = c.grid_points;
  o.grid.xmax_factor = c.xmax_factor;
  o.solve.tol = c.tol;
  o.jobs = c.jobs;
  o.refine_eigenvalues = !c.no_refine;
  o.with_semiclassical = c.with_semiclassical;
  return o;
}

semiclassical::Terminant terminant_of(const std::string& s) {
  if (s == "none") return semiclassical::Terminant::none;
  if (s == "stieltjes" || s == "stieltjes_half") return semiclassical::Terminant::stieltjes_half;
  throw ConfigError("unknown terminant `" + s + "`");
}

json resolved_config(const Config& c, const std::string& command) {
  json j;
  j["command"] = command;
  j["potentials"] = c.potentials;
  j["hbar"] = c.hbar;
  j["tol"] = c.tol;
  j["grid_points"] = c.grid_points;
  j["xmax_factor"] = c.xmax_factor;
  j["bc"] = c.bc;
  j["bc_order"] = c.bc_order;
  j["format"] = c.format;
  j["jobs"] = c.jobs;
  if (command == "quantize" || command == "compare" || command == "oracle") {
    j["levels"] = c.levels;
  }
  if (command == "quantize") {
    j["method"] = c.method;
    j["kmax"] = c.kmax;
    j["terminant"] = c.terminant;
  }
  if (command == "compare") {
    j["kmax"] = c.kmax;
    j["terminant"] = c.terminant;
  }
  if (command == "phase") {
    j["energy"] = c.energy;
    j["with_semiclassical"] = c.with_semiclassical;
  }
  if (command == "sweep") {
    j["emin"] = c.emin;
    j["emax"] = c.emax;
    j["samples"] = c.samples;
    j["lambdas"] = c.lambdas;
    j["with_semiclassical"] = c.with_semiclassical;
    j["refine"] = !c.no_refine;
  }
  return j;
}

model::SymmetricPotential potential_of(const Config& c, std::size_t index = 0) {
  if (c.potentials.empty()) throw ConfigError("--potential is required");
  return model::SymmetricPotential::parse(c.potentials.at(index), c.hbar);
}

// Writes `text` to --out (or the given path) or to `out`.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ConfigError("cannot open output file `" + path + "`");
  file << text;
}

std::string suffixed_path(const std::string& path, std::size_t index) {
  const std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + "_" + std::to_string(index) + p.extension().string()))
      .string();
}

std::string render(const spectrum::SpectrumTable& table, const io::RunInfo& info,
                   const std::string& format) {
  std::ostringstream os;
  if (format == "csv") {
    io::write_csv(os, table, info);
  } else {
    os << io::to_json(table, info).dump(2) << '\n';
  }
  return os.str();
}

double quantize_one(const model::SymmetricPotential& v, int n, const std::string& method,
                    const Config& c) {
  if (method == "qlm") return spectrum::eigenvalue(v, n, c.tol, sweep_options(c));
  if (method == "wkb") return semiclassical::wkb_quantize(v, n);
  if (method == "airy") return semiclassical::airy_quantize(v, n);
  if (method == "dunham") return semiclassical::dunham_quantize(v, n, c.kmax, terminant_of(c.terminant));
  if (method == "oracle") return oracle::numerov_eigenvalue(v, n);
  throw ConfigError("unknown method `" + method + "`");
}

int cmd_quantize(const Config& c, const std::string& command, std::ostream& out) {
  const auto v = potential_of(c);
  const auto levels = parse_levels(c.levels);
  const std::string method = command == "oracle" ? "oracle" : c.method;
  terminant_of(c.terminant);
  spectrum::SpectrumTable table;
  table.potential = v.to_string();
  table.hbar = v.hbar();
  table.bc_method = semiclassical::bc_method_from_string(c.bc);
  table.source = method;
  for (const int n : levels) table.eigenvalues.push_back({n, quantize_one(v, n, method, c)});
  emit(c.out, render(table, {command, resolved_config(c, command)}, c.format), out);
  return kExitOk;
}

int cmd_compare(const Config& c, std::ostream& out) {
  const auto v = potential_of(c);
  const auto levels = parse_levels(c.levels);
  const std::vector<std::string> methods = {"qlm", "oracle", "wkb", "airy", "dunham"};
  io::RunInfo info{"compare", resolved_config(c, "compare")};
  json rows = json::array();
  std::vector<std::vector<double>> table;
  for (const int n : levels) {
    json row;
    row["n"] = n;
    std::vector<double> values;
    for (const auto& m : methods) {
      const double e = quantize_one(v, n, m, c);
      row[m] = e;
      values.push_back(e);
    }
    rows.push_back(row);
    table.push_back(values);
  }
  std::ostringstream os;
  if (c.format == "csv") {
    io::write_csv_metadata(os, info, {{"schema", io::kCompareSchema}, {"potential", v.to_string()}});
    os << "n";
    for (const auto& m : methods) os << ',' << m;
    os << '\n';
    for (std::size_t i = 0; i < levels.size(); ++i) {
      os << levels[i];
      for (const double e : table[i]) os << ',' << format_double(e);
      os << '\n';
    }
  } else {
    json doc;
    doc["schema"] = io::kCompareSchema;
    doc["version"] = io::kVersion;
    doc["command"] = "compare";
    doc["config"] = info.config;
    doc["potential"] = v.to_string();
    doc["hbar"] = v.hbar();
    doc["rows"] = rows;
    os << doc.dump(2) << '\n';
  }
  emit(c.out, os.str(), out);
  return kExitOk;
}

int cmd_phase(const Config& c, std::ostream& out) {
  const auto v = potential_of(c);
  if (!std::isfinite(c.energy)) throw ConfigError("phase needs --energy");
  const auto opts = sweep_options(c);
  const auto sol = spectrum::solve_at(v, c.energy, opts);
  const double residual = qlm::milne_residual(sol, v);
  io::RunInfo info{"phase", resolved_config(c, "phase")};

  // Semiclassical comparison columns on the same grid.
  std::vector<double> s_wkb;
  std::vector<double> ds_wkb;
  semiclassical::UniformPhase airy;
  if (c.with_semiclassical) {
    const double t2 = model::turning_point(v, c.energy).t2;
    const double hbar = v.hbar();
    const double s_t2 = model::classical_action(v, c.energy, t2);
    for (const double x : sol.grid) {
      const double s = x < t2 ? model::classical_action(v, c.energy, x) : s_t2;
      s_wkb.push_back(s / hbar + std::numbers::pi / 4.0);
      ds_wkb.push_back(x < t2 ? std::sqrt(model::momentum_sq(v, c.energy, x)) / hbar : 0.0);
    }
    airy = semiclassical::airy_uniform_phase(v, c.energy, sol.grid);
  }

  std::ostringstream os;
  if (c.format == "csv") {
    json extra;
    extra["schema"] = io::kPhaseSchema;
    extra["potential"] = v.to_string();
    extra["hbar"] = format_double(v.hbar());
    extra["energy"] = format_double(c.energy);
    extra["bc_method"] = std::string(semiclassical::to_string(sol.bc.method));
    extra["bc_value"] = format_double(sol.bc.value);
    extra["total_phase"] = format_double(sol.total);
    extra["ntilde"] = format_double(spectrum::ntilde_of(sol));
    extra["iterations"] = std::to_string(sol.iterations);
    extra["milne_residual"] = format_double(residual);
    io::write_csv_metadata(os, info, extra);
    os << "x,sigma,dsigma,alpha,re_M,im_M";
    if (c.with_semiclassical) os << ",s_wkb,dsigma_wkb,sigma_airy,dsigma_airy";
    os << '\n';
    for (std::size_t i = 0; i < sol.grid.size(); ++i) {
      os << format_double(sol.grid[i]) << ',' << format_double(sol.sigma[i]) << ','
         << format_double(sol.dsigma[i]) << ',' << format_double(sol.alpha[i]) << ','
         << format_double(sol.field.values[i].real()) << ','
         << format_double(sol.field.values[i].imag());
      if (c.with_semiclassical) {
        os << ',' << format_double(s_wkb[i]) << ',' << format_double(ds_wkb[i]) << ','
           << format_double(airy.sigma_sc[i]) << ',' << format_double(airy.dsigma_sc[i]);
      }
      os << '\n';
    }
  } else {
    json doc;
    doc["schema"] = io::kPhaseSchema;
    doc["version"] = io::kVersion;
    doc["command"] = "phase";
    doc["config"] = info.config;
    doc["potential"] = v.to_string();
    doc["hbar"] = v.hbar();
    doc["energy"] = c.energy;
    doc["bc"] = {{"method", std::string(semiclassical::to_string(sol.bc.method))},
                 {"value", sol.bc.value},
                 {"order_used", sol.bc.order_used}};
    doc["total_phase"] = sol.total;
    doc["ntilde"] = spectrum::ntilde_of(sol);
    doc["iterations"] = sol.iterations;
    doc["update_norms"] = sol.update_norms;
    doc["milne_residual"] = residual;
    json cols;
    cols["x"] = sol.grid;
    cols["sigma"] = sol.sigma;
    cols["dsigma"] = sol.dsigma;
    cols["alpha"] = sol.alpha;
    std::vector<double> re;
    std::vector<double> im;
    for (const auto& m : sol.field.values) {
      re.push_back(m.real());
      im.push_back(m.imag());
    }
    cols["re_M"] = re;
    cols["im_M"] = im;
    if (c.with_semiclassical) {
      cols["s_wkb"] = s_wkb;
      cols["dsigma_wkb"] = ds_wkb;
      cols["sigma_airy"] = airy.sigma_sc;
      cols["dsigma_airy"] = airy.dsigma_sc;
    }
    doc["columns"] = cols;
    os << doc.dump(2) << '\n';
  }
  emit(c.out, os.str(), out);
  return kExitOk;
}

int cmd_sweep(const Config& c, std::ostream& out) {
  if (c.potentials.empty() && c.lambdas.empty()) {
    throw ConfigError("sweep needs --potential or --lambda");
  }
  const auto opts = sweep_options(c);
  io::RunInfo info{"sweep", resolved_config(c, "sweep")};
  std::vector<spectrum::SpectrumTable> tables;
  if (!c.lambdas.empty()) {
    for (const double lambda : c.lambdas) {
      if (!(lambda > 0.0)) throw ConfigError("--lambda values must be positive");
      const auto v = model::SymmetricPotential({{2, 0.5}, {10, lambda / 2.0}}, c.hbar);
      auto t = spectrum::oscillation_number_sweep(v, c.emin, c.emax, c.samples, opts);
      t.lambda = lambda;
      tables.push_back(std::move(t));
    }
  } else {
    for (std::size_t i = 0; i < c.potentials.size(); ++i) {
      tables.push_back(
          spectrum::oscillation_number_sweep(potential_of(c, i), c.emin, c.emax, c.samples, opts));
    }
  }
  if (c.format == "json") {
    std::string text;
    if (tables.size() == 1) {
      text = io::to_json(tables.front(), info).dump(2) + "\n";
    } else {
      json all = json::array();
      for (const auto& t : tables) all.push_back(io::to_json(t, info));
      text = all.dump(2) + "\n";
    }
    emit(c.out, text, out);
  } else if (tables.size() == 1 || c.out.empty()) {
    std::string text;
    for (std::size_t i = 0; i < tables.size(); ++i) {
      if (i > 0) text += "\n";
      text += render(tables[i], info, "csv");
    }
    emit(c.out, text, out);
  } else {
    for (std::size_t i = 0; i < tables.size(); ++i) {
      emit(suffixed_path(c.out, i), render(tables[i], info, "csv"), out);
    }
  }
  return kExitOk;
}

// JSON documents: spectrum documents are decoded in full, the others are
// checked for their top-level keys.
void validate_json(const json& doc, const std::string& expected) {
  const auto check_one = [&](const json& d) {
    const std::string id = d.is_object() ? d.value("schema", "") : "";
    if (!expected.empty() && id != expected) {
      throw Error(ErrorKind::SchemaMismatch, "document declares `" + id + "`, expected `" + expected + "`");
    }
    std::vector<std::string> keys;
    if (id == io::kSpectrumSchema) {
      io::spectrum_from_json(d);
      return;
    } else if (id == io::kPhaseSchema) {
      keys = {"potential", "hbar", "energy", "bc", "total_phase", "ntilde", "columns"};
    } else if (id == io::kCompareSchema) {
      keys = {"potential", "hbar", "rows"};
    } else {
      throw Error(ErrorKind::SchemaMismatch, "unknown schema `" + id + "`");
    }
    std::string missing;
    for (const auto& k : keys) {
      if (!d.contains(k)) missing += (missing.empty() ? "" : ", ") + k;
    }
    if (!missing.empty()) throw Error(ErrorKind::SchemaMismatch, id + ": missing keys [" + missing + "]");
    if (id == io::kPhaseSchema) {
      const auto* schema = io::find_schema(id);
      for (const auto name : schema->required) {
        if (!d.at("columns").contains(std::string(name))) {
          throw Error(ErrorKind::SchemaMismatch, id + ": missing column `" + std::string(name) + "`");
        }
      }
    }
  };
  if (doc.is_array()) {
    for (const auto& d : doc) check_one(d);
  } else {
    check_one(doc);
  }
}

int cmd_validate(const std::vector<std::string>& files, const std::string& schema, std::ostream& out) {
  if (!schema.empty() && io::find_schema(schema) == nullptr) {
    throw ConfigError("unknown schema `" + schema + "`");
  }
  for (const auto& path : files) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw ConfigError("cannot open `" + path + "`");
    std::stringstream buffer;
    buffer << file.rdbuf();
    const std::string text = buffer.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    std::string id = schema;
    try {
      if (first != std::string::npos && (text[first] == '{' || text[first] == '[')) {
        const json doc = json::parse(text);
        validate_json(doc, schema);
        if (id.empty()) id = doc.is_array() ? doc.at(0).value("schema", "") : doc.value("schema", "");
      } else {
        std::istringstream is(text);
        const auto doc = io::read_csv(is);
        io::validate_csv(doc, schema);
        if (id.empty()) id = doc.meta("schema");
      }
    } catch (const json::exception& e) {
      throw Error(ErrorKind::SchemaMismatch, path + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorKind::SchemaMismatch, path + ": " + e.detail());
    }
    json record;
    record["file"] = path;
    record["schema"] = id;
    record["ok"] = true;
    out << record.dump() << '\n';
  }
  return kExitOk;
}

void add_common(CLI::App* sub, Config& c) {
  sub->add_option("--potential", c.potentials, "Even polynomial as power:coeff pairs, e.g. 2:0.5,4:1");
  sub->add_option("--hbar", c.hbar, "Planck constant")->check(CLI::PositiveNumber);
  sub->add_option("--tol", c.tol, "QLM update tolerance and eigenvalue tolerance")
      ->check(CLI::PositiveNumber);
  sub->add_option("--grid-points", c.grid_points, "Fixed number of grid nodes (0: automatic)")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--xmax-factor", c.xmax_factor, "x_max >= factor * t2")->check(CLI::PositiveNumber);
  sub->add_option("--bc", c.bc, "Boundary condition at x = 0")
      ->check(CLI::IsMember({"series", "wkb", "harmonic"}));
  sub->add_option("--bc-order", c.bc_order, "Cap on the boundary-condition series order")
      ->check(CLI::Range(0, 10));
  sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--out", c.out, "Output file (default: stdout)");
  sub->add_option("--jobs", c.jobs, "Worker threads (1: sequential warm-started sweep)")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Config c;
  CLI::App app{"Quantum phase and spectra of symmetric anharmonic oscillators", "phasequant"};
  app.set_version_flag("--version", io::kVersion);
  app.set_config("--config", "", "Key-value config file mirroring flag names; flags win");
  app.require_subcommand(1);

  auto* quantize = app.add_subcommand("quantize", "Eigenvalues by one method");
  add_common(quantize, c);
  quantize->add_option("--levels", c.levels, "Levels, e.g. 0-5 or 0,2,4");
  quantize->add_option("--method", c.method, "Quantization method")
      ->check(CLI::IsMember({"qlm", "wkb", "dunham", "airy", "oracle"}));
  quantize->add_option("--kmax", c.kmax, "Dunham terms retained")->check(CLI::Range(1, 10));
  quantize->add_option("--terminant", c.terminant, "Dunham truncation rule")
      ->check(CLI::IsMember({"none", "stieltjes"}));

  auto* phase = app.add_subcommand("phase", "Quantum phase at one energy");
  add_common(phase, c);
  phase->add_option("--energy", c.energy, "Energy")->required()->check(CLI::PositiveNumber);
  phase->add_flag("--with-semiclassical", c.with_semiclassical, "Add WKB and Airy columns");

  auto* sweep = app.add_subcommand("sweep", "Oscillation number over an energy grid");
  add_common(sweep, c);
  sweep->add_option("--emin", c.emin, "Lowest energy")->check(CLI::PositiveNumber);
  sweep->add_option("--emax", c.emax, "Highest energy")->check(CLI::PositiveNumber);
  sweep->add_option("--samples", c.samples, "Grid energies")->check(CLI::Range(4, 1000000));
  sweep->add_option("--lambda", c.lambdas, "Decadic couplings: V = x^2/2 + lambda x^10/2");
  sweep->add_flag("--with-semiclassical", c.with_semiclassical, "Add the N^sc column");
  sweep->add_flag("--no-refine", c.no_refine, "Skip eigenvalue refinement at integer crossings");

  auto* oracle_cmd = app.add_subcommand("oracle", "Numerov reference eigenvalues");
  add_common(oracle_cmd, c);
  oracle_cmd->add_option("--levels", c.levels, "Levels, e.g. 0-5 or 0,2,4");

  auto* compare = app.add_subcommand("compare", "Side-by-side eigenvalues of all methods");
  add_common(compare, c);
  compare->add_option("--levels", c.levels, "Levels, e.g. 0-5 or 0,2,4");
  compare->add_option("--kmax", c.kmax, "Dunham terms retained")->check(CLI::Range(1, 10));
  compare->add_option("--terminant", c.terminant, "Dunham truncation rule")
      ->check(CLI::IsMember({"none", "stieltjes"}));

  auto* validate = app.add_subcommand("validate", "Check CSV/JSON outputs against their schema");
  std::vector<std::string> validate_files;
  std::string validate_schema;
  validate->add_option("files", validate_files, "Files to check")->required();
  validate->add_option("--schema", validate_schema, "Expected schema id (default: the declared one)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const auto report = [&](std::string_view kind, const std::string& message) {
    json record;
    record["error"] = kind;
    record["message"] = message;
    err << record.dump() << '\n';
  };
  try {
    if (*quantize) return cmd_quantize(c, "quantize", out);
    if (*oracle_cmd) return cmd_quantize(c, "oracle", out);
    if (*compare) return cmd_compare(c, out);
    if (*phase) return cmd_phase(c, out);
    if (*sweep) return cmd_sweep(c, out);
    if (*validate) return cmd_validate(validate_files, validate_schema, out);
  } catch (const ConfigError& e) {
    report("ConfigError", e.what());
    return kExitConfig;
  } catch (const Error& e) {
    const bool config = e.kind() == ErrorKind::InvalidPotential || e.kind() == ErrorKind::InvalidArgument ||
                        e.kind() == ErrorKind::SchemaMismatch;
    report(to_string(e.kind()), e.detail());
    return config ? kExitConfig : kExitSolver;
  }
  return kExitConfig;
}

}  // namespace phasequant::cli
