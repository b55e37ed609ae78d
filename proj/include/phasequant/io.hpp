#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "phasequant/spectrum.hpp"

namespace phasequant::io {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kSpectrumSchema = "phasequant.spectrum/1";
inline constexpr const char* kPhaseSchema = "phasequant.phase/1";
inline constexpr const char* kCompareSchema = "phasequant.compare/1";

/// Provenance stamped into every document.
struct RunInfo {
  std::string command;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
};

/// %.17g, with nan/inf spelled as in C.
std::string format_double(double value);

nlohmann::ordered_json to_json(const spectrum::SpectrumTable& table, const RunInfo& info);
spectrum::SpectrumTable spectrum_from_json(const nlohmann::ordered_json& doc);

/// `#`-prefixed metadata block, `# eigenvalue,n,E` lines, then
/// energy,ntilde,failed,iterations,milne_residual[,nsc] rows.
void write_csv(std::ostream& os, const spectrum::SpectrumTable& table, const RunInfo& info);

/// Writes `# key: value` lines for the run metadata.
void write_csv_metadata(std::ostream& os, const RunInfo& info, const nlohmann::ordered_json& extra);

/// Column contract of one CSV document kind.
struct CsvSchema {
  std::string_view id;
  std::vector<std::string_view> required;
  std::vector<std::string_view> optional;
};

/// nullptr for an unknown id.
const CsvSchema* find_schema(std::string_view id);
const std::vector<CsvSchema>& csv_schemas();

/// A CSV file as the tools write it: `# key: value` metadata, optional
/// `# eigenvalue,n,E` lines, one header row, numeric rows.
struct CsvDocument {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<spectrum::Level> eigenvalues;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  /// Empty string when the key is absent.
  std::string meta(std::string_view key) const;
  /// Values of one column; throws SchemaMismatch if it is absent.
  std::vector<double> column(std::string_view name) const;
};

/// Throws InvalidArgument on malformed text (ragged or non-numeric rows).
CsvDocument read_csv(std::istream& is);

/// Checks the header against the schema named in the `schema` metadata
/// entry (or `schema_id` when given). Throws SchemaMismatch listing missing
/// and unexpected columns.
void validate_csv(const CsvDocument& doc, std::string_view schema_id = {});

}  // namespace phasequant::io
