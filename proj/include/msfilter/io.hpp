#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "msfilter/campaign.hpp"
#include "msfilter/model.hpp"

namespace msfilter::io {

using json = nlohmann::json;

MSStateSpace model_from_json(const json& doc);
json model_to_json(const MSStateSpace& model);
MSStateSpace load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const MSStateSpace& model);

/// FNV-1a 64 of the compact dump of model_to_json, as 16 hex digits.
std::string model_hash(const MSStateSpace& model);

/// CSV with a header row (y1, ..., yp); lines starting with '#' are skipped and
/// an empty cell is a missing value.
ObservationSeries read_observations(const std::filesystem::path& path);

/// Shortest round-trip decimal; NaN prints as an empty cell.
std::string format_number(double value);

/// Comment line carried by every output file.
std::string provenance_line(const std::string& seed, const std::string& hash, const std::string& algo);

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);
  void comment(const std::string& text);
  void header(const std::vector<std::string>& names);
  void row(const std::vector<double>& values);
  /// First cell written verbatim (an integer index or a label).
  void row(const std::string& first, const std::vector<double>& values);

 private:
  std::ofstream out_;
};

CampaignConfig load_campaign(const std::filesystem::path& path);

json report_to_json(const MetricReport& report, const std::string& model_hash);
/// Long-format table: algo, estimate, metric, variable, value. No timings.
void write_report_tables(const std::filesystem::path& path, const MetricReport& report, const std::string& header);

void write_json(const std::filesystem::path& path, const json& doc);
json read_json(const std::filesystem::path& path);

}  // namespace msfilter::io
