#include "phasequant/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <limits>
#include <istream>
#include <ostream>
#include <sstream>

#include "phasequant/error.hpp"

namespace phasequant::io {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

nlohmann::ordered_json to_json(const spectrum::SpectrumTable& table, const RunInfo& info) {
  nlohmann::ordered_json doc;
  doc["schema"] = kSpectrumSchema;
  doc["version"] = kVersion;
  doc["command"] = info.command;
  doc["config"] = info.config;
  doc["source"] = table.source;
  doc["potential"] = table.potential;
  doc["hbar"] = table.hbar;
  doc["bc_method"] = std::string(semiclassical::to_string(table.bc_method));
  doc["lambda"] = table.lambda ? nlohmann::ordered_json(*table.lambda) : nlohmann::ordered_json(nullptr);
  doc["grid"] = table.energies;
  auto ntilde = nlohmann::ordered_json::array();
  for (const double v : table.ntilde) {
    ntilde.push_back(std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr));
  }
  doc["ntilde"] = ntilde;
  doc["failed"] = table.failed;
  if (!table.nsc.empty()) doc["nsc"] = table.nsc;
  auto levels = nlohmann::ordered_json::array();
  for (const auto& level : table.eigenvalues) {
    levels.push_back({{"n", level.n}, {"E", level.energy}});
  }
  doc["eigenvalues"] = levels;
  auto residuals = nlohmann::ordered_json::array();
  for (const double v : table.residuals) {
    residuals.push_back(std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr));
  }
  doc["diagnostics"] = {{"iterations", table.iterations}, {"residuals", residuals}};
  return doc;
}

namespace {

spectrum::SpectrumTable spectrum_fields(const nlohmann::ordered_json& doc) {
  spectrum::SpectrumTable t;
  t.source = doc.at("source").get<std::string>();
  t.potential = doc.at("potential").get<std::string>();
  t.hbar = doc.at("hbar").get<double>();
  t.bc_method = semiclassical::bc_method_from_string(doc.at("bc_method").get<std::string>());
  if (!doc.at("lambda").is_null()) t.lambda = doc.at("lambda").get<double>();
  t.energies = doc.at("grid").get<std::vector<double>>();
  for (const auto& v : doc.at("ntilde")) {
    t.ntilde.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
  }
  t.failed = doc.at("failed").get<std::vector<bool>>();
  if (doc.contains("nsc")) t.nsc = doc.at("nsc").get<std::vector<double>>();
  for (const auto& level : doc.at("eigenvalues")) {
    t.eigenvalues.push_back({level.at("n").get<int>(), level.at("E").get<double>()});
  }
  const auto& diag = doc.at("diagnostics");
  t.iterations = diag.at("iterations").get<std::vector<int>>();
  for (const auto& v : diag.at("residuals")) {
    t.residuals.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
  }
  const std::size_t n = t.energies.size();
  if (t.ntilde.size() != n || t.failed.size() != n || t.iterations.size() != n ||
      t.residuals.size() != n || (!t.nsc.empty() && t.nsc.size() != n)) {
    throw Error(ErrorKind::SchemaMismatch, "per-node arrays differ in length from grid");
  }
  return t;
}

}  // namespace

spectrum::SpectrumTable spectrum_from_json(const nlohmann::ordered_json& doc) {
  if (!doc.is_object() || doc.value("schema", "") != kSpectrumSchema) {
    throw Error(ErrorKind::SchemaMismatch, std::string("not a ") + kSpectrumSchema + " document");
  }
  try {
    return spectrum_fields(doc);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SchemaMismatch, e.what());
  }
}

void write_csv_metadata(std::ostream& os, const RunInfo& info, const nlohmann::ordered_json& extra) {
  os << "# version: " << kVersion << '\n';
  os << "# command: " << info.command << '\n';
  for (const auto& [key, value] : extra.items()) {
    os << "# " << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
  }
  os << "# config: " << info.config.dump() << '\n';
}

void write_csv(std::ostream& os, const spectrum::SpectrumTable& table, const RunInfo& info) {
  nlohmann::ordered_json extra;
  extra["schema"] = kSpectrumSchema;
  extra["source"] = table.source;
  extra["potential"] = table.potential;
  extra["hbar"] = format_double(table.hbar);
  extra["bc_method"] = std::string(semiclassical::to_string(table.bc_method));
  extra["lambda"] = table.lambda ? format_double(*table.lambda) : std::string("none");
  write_csv_metadata(os, info, extra);
  for (const auto& level : table.eigenvalues) {
    os << "# eigenvalue," << level.n << ',' << format_double(level.energy) << '\n';
  }
  const bool with_nsc = !table.nsc.empty();
  os << "energy,ntilde,failed,iterations,milne_residual" << (with_nsc ? ",nsc" : "") << '\n';
  for (std::size_t i = 0; i < table.energies.size(); ++i) {
    os << format_double(table.energies[i]) << ',' << format_double(table.ntilde[i]) << ','
       << (table.failed[i] ? 1 : 0) << ',' << table.iterations[i] << ','
       << format_double(table.residuals[i]);
    if (with_nsc) os << ',' << format_double(table.nsc[i]);
    os << '\n';
  }
}

const std::vector<CsvSchema>& csv_schemas() {
  static const std::vector<CsvSchema> schemas = {
      {kSpectrumSchema, {"energy", "ntilde", "failed", "iterations", "milne_residual"}, {"nsc"}},
      {kPhaseSchema,
       {"x", "sigma", "dsigma", "alpha", "re_M", "im_M"},
       {"s_wkb", "dsigma_wkb", "sigma_airy", "dsigma_airy"}},
      {kCompareSchema, {"n", "qlm", "oracle", "wkb", "airy", "dunham"}, {}},
  };
  return schemas;
}

const CsvSchema* find_schema(std::string_view id) {
  for (const auto& s : csv_schemas()) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

std::string CsvDocument::meta(std::string_view key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return v;
  }
  return {};
}

std::vector<double> CsvDocument::column(std::string_view name) const {
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] != name) continue;
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(row[j]);
    return out;
  }
  throw Error(ErrorKind::SchemaMismatch, "no column `" + std::string(name) + "`");
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& text, std::size_t line_no) {
  // strtod accepts the nan/inf spellings format_double emits
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (text.empty() || end != begin + text.size()) {
    throw Error(ErrorKind::InvalidArgument,
                "line " + std::to_string(line_no) + ": `" + text + "` is not a number");
  }
  return v;
}

}  // namespace

CsvDocument read_csv(std::istream& is) {
  CsvDocument doc;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = line.substr(line.find_first_not_of("# ") == std::string::npos
                                               ? line.size()
                                               : line.find_first_not_of("# "));
      if (body.rfind("eigenvalue,", 0) == 0) {
        const auto parts = split_commas(body);
        if (parts.size() != 3) {
          throw Error(ErrorKind::InvalidArgument, "line " + std::to_string(line_no) + ": bad eigenvalue line");
        }
        doc.eigenvalues.push_back({static_cast<int>(parse_number(parts[1], line_no)),
                                   parse_number(parts[2], line_no)});
        continue;
      }
      const auto colon = body.find(": ");
      if (colon != std::string::npos) doc.metadata.emplace_back(body.substr(0, colon), body.substr(colon + 2));
      continue;
    }
    if (doc.columns.empty()) {
      doc.columns = split_commas(line);
      continue;
    }
    const auto cells = split_commas(line);
    if (cells.size() != doc.columns.size()) {
      throw Error(ErrorKind::InvalidArgument, "line " + std::to_string(line_no) + ": expected " +
                                                  std::to_string(doc.columns.size()) + " fields, got " +
                                                  std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c, line_no));
    doc.rows.push_back(std::move(row));
  }
  if (doc.columns.empty()) throw Error(ErrorKind::InvalidArgument, "no header row");
  return doc;
}

void validate_csv(const CsvDocument& doc, std::string_view schema_id) {
  const std::string declared = doc.meta("schema");
  const std::string id = schema_id.empty() ? declared : std::string(schema_id);
  if (id.empty()) throw Error(ErrorKind::SchemaMismatch, "no `schema` metadata entry");
  const CsvSchema* schema = find_schema(id);
  if (schema == nullptr) throw Error(ErrorKind::SchemaMismatch, "unknown schema `" + id + "`");
  if (!declared.empty() && declared != id) {
    throw Error(ErrorKind::SchemaMismatch, "document declares `" + declared + "`, expected `" + id + "`");
  }

  const auto has = [&](std::string_view name) {
    return std::find(doc.columns.begin(), doc.columns.end(), name) != doc.columns.end();
  };
  const auto known = [&](const std::string& name) {
    return std::find(schema->required.begin(), schema->required.end(), name) != schema->required.end() ||
           std::find(schema->optional.begin(), schema->optional.end(), name) != schema->optional.end();
  };
  std::string missing;
  for (const auto name : schema->required) {
    if (!has(name)) missing += (missing.empty() ? "" : ", ") + std::string(name);
  }
  std::string unexpected;
  for (const auto& name : doc.columns) {
    if (!known(name)) unexpected += (unexpected.empty() ? "" : ", ") + name;
  }
  for (std::size_t j = 0; j < doc.columns.size(); ++j) {
    for (std::size_t k = j + 1; k < doc.columns.size(); ++k) {
      if (doc.columns[j] == doc.columns[k]) {
        throw Error(ErrorKind::SchemaMismatch, "duplicate column `" + doc.columns[j] + "`");
      }
    }
  }
  if (missing.empty() && unexpected.empty()) return;
  std::string message = id + ":";
  if (!missing.empty()) message += " missing columns [" + missing + "]";
  if (!unexpected.empty()) message += " unexpected columns [" + unexpected + "]";
  throw Error(ErrorKind::SchemaMismatch, message);
}

}  // namespace phasequant::io
