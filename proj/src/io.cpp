#include "msfilter/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <sstream>

#include "msfilter/error.hpp"

namespace msfilter::io {

namespace {

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorCode::kParse, what); }

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) parse_fail(where + ": missing \"" + key + "\"");
  return obj.at(key);
}

int as_int(const json& v, const std::string& what) {
  if (!v.is_number_integer()) parse_fail(what + " must be an integer");
  return v.get<int>();
}

double as_double(const json& v, const std::string& what) {
  if (!v.is_number()) parse_fail(what + " must be a number");
  return v.get<double>();
}

Vector vector_from(const json& v, Eigen::Index len, const std::string& what) {
  if (!v.is_array()) parse_fail(what + " must be an array");
  if (static_cast<Eigen::Index>(v.size()) != len) {
    throw Error(ErrorCode::kDimensionMismatch,
                what + " has length " + std::to_string(v.size()) + ", expected " + std::to_string(len));
  }
  Vector out(len);
  for (Eigen::Index i = 0; i < len; ++i) out(i) = as_double(v[static_cast<std::size_t>(i)], what);
  return out;
}

Matrix matrix_from(const json& v, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  if (!v.is_array()) parse_fail(what + " must be an array of rows");
  if (rows * cols == 0 && v.empty()) return Matrix::Zero(rows, cols);
  if (static_cast<Eigen::Index>(v.size()) != rows) {
    throw Error(ErrorCode::kDimensionMismatch,
                what + " has " + std::to_string(v.size()) + " rows, expected " + std::to_string(rows));
  }
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error(ErrorCode::kDimensionMismatch,
                  what + " row " + std::to_string(i) + " must have " + std::to_string(cols) + " entries");
    }
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = as_double(row[static_cast<std::size_t>(j)], what);
  }
  return out;
}

json vector_to(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json matrix_to(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

json matrix_rows_to(const Matrix& m) { return m.size() == 0 ? json::array() : matrix_to(m); }

}  // namespace

MSStateSpace model_from_json(const json& doc) {
  if (!doc.is_object()) parse_fail("model must be a JSON object");
  const json& dims = field(doc, "dims", "model");
  MSStateSpace model;
  model.dims.p = as_int(field(dims, "p", "dims"), "dims.p");
  model.dims.m = as_int(field(dims, "m", "dims"), "dims.m");
  model.dims.p_e = as_int(field(dims, "p_e", "dims"), "dims.p_e");
  model.dims.q = as_int(field(dims, "q", "dims"), "dims.q");
  if (model.dims.p < 1 || model.dims.m < 1 || model.dims.p_e < 0 || model.dims.q < 0) {
    throw Error(ErrorCode::kDimensionMismatch, "dims must satisfy p >= 1, m >= 1, p_e >= 0, q >= 0");
  }

  const json& q = field(doc, "Q", "model");
  if (!q.is_array() || q.empty()) parse_fail("Q must be a non-empty array of rows");
  const auto h = static_cast<Eigen::Index>(q.size());
  model.chain.Q = matrix_from(q, h, h, "Q");
  if (doc.contains("h") && as_int(doc.at("h"), "h") != h) {
    throw Error(ErrorCode::kDimensionMismatch, "h = " + std::to_string(doc.at("h").get<int>()) +
                                                   " but Q is " + std::to_string(h) + "x" + std::to_string(h));
  }

  const json& regimes = field(doc, "regimes", "model");
  if (!regimes.is_array()) parse_fail("regimes must be an array");
  const Dims& d = model.dims;
  for (std::size_t s = 0; s < regimes.size(); ++s) {
    const json& r = regimes[s];
    const std::string at = "regime " + std::to_string(s);
    RegimeParams params;
    params.c_y = r.contains("c_y") ? vector_from(r.at("c_y"), d.p, at + ": c_y") : Vector::Zero(d.p);
    params.Z = matrix_from(field(r, "Z", at), d.p, d.m, at + ": Z");
    params.g = matrix_from(field(r, "g", at), d.p, d.p_e, at + ": g");
    params.c_alpha = r.contains("c_alpha") ? vector_from(r.at("c_alpha"), d.m, at + ": c_alpha") : Vector::Zero(d.m);
    params.T = matrix_from(field(r, "T", at), d.m, d.m, at + ": T");
    params.R = matrix_from(field(r, "R", at), d.m, d.q, at + ": R");
    model.regimes.push_back(std::move(params));
  }
  return validate_model(std::move(model));
}

json model_to_json(const MSStateSpace& model) {
  json doc;
  doc["h"] = model.h();
  doc["dims"] = {{"p", model.dims.p}, {"m", model.dims.m}, {"p_e", model.dims.p_e}, {"q", model.dims.q}};
  doc["Q"] = matrix_to(model.chain.Q);
  json regimes = json::array();
  for (const RegimeParams& r : model.regimes) {
    regimes.push_back({{"c_y", vector_to(r.c_y)},
                       {"Z", matrix_rows_to(r.Z)},
                       {"g", matrix_rows_to(r.g)},
                       {"c_alpha", vector_to(r.c_alpha)},
                       {"T", matrix_rows_to(r.T)},
                       {"R", matrix_rows_to(r.R)}});
  }
  doc["regimes"] = std::move(regimes);
  return doc;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    parse_fail(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

MSStateSpace load_model(const std::filesystem::path& path) { return model_from_json(read_json(path)); }

void save_model(const std::filesystem::path& path, const MSStateSpace& model) {
  write_json(path, model_to_json(model));
}

std::string model_hash(const MSStateSpace& model) {
  const std::string text = model_to_json(model).dump();
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

ObservationSeries read_observations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  std::size_t columns = 0;
  bool have_header = false;
  std::vector<std::vector<double>> rows;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (!have_header) {
      columns = cells.size();
      have_header = true;
      continue;
    }
    if (cells.size() != columns) {
      parse_fail(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                 " cells, got " + std::to_string(cells.size()));
    }
    std::vector<double> values(columns);
    for (std::size_t i = 0; i < columns; ++i) {
      std::string_view text = cells[i];
      while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
      while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
      if (text.empty() || text == "NaN" || text == "nan" || text == "NA") {
        values[i] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), values[i]);
      if (ec != std::errc() || end != text.data() + text.size()) {
        parse_fail(path.string() + ":" + std::to_string(line_no) + ": bad number '" + std::string(text) + "'");
      }
    }
    rows.push_back(std::move(values));
  }
  if (!have_header) parse_fail(path.string() + ": no header row");
  ObservationSeries out;
  out.y.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(columns));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::size_t i = 0; i < columns; ++i) {
      out.y(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) = rows[t][i];
    }
  }
  return out;
}

std::string format_number(double value) {
  if (std::isnan(value)) return {};
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

std::string provenance_line(const std::string& seed, const std::string& hash, const std::string& algo) {
  return "seed=" + seed + " model=" + hash + " algo=" + algo;
}

CsvWriter::CsvWriter(const std::filesystem::path& path) : out_(path) {
  if (!out_) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

void CsvWriter::comment(const std::string& text) { out_ << "# " << text << '\n'; }

void CsvWriter::header(const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < names.size(); ++i) out_ << (i ? "," : "") << names[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_number(values[i]);
  out_ << '\n';
}

void CsvWriter::row(const std::string& first, const std::vector<double>& values) {
  out_ << first;
  for (double v : values) out_ << ',' << format_number(v);
  out_ << '\n';
}

CampaignConfig load_campaign(const std::filesystem::path& path) {
  const json doc = read_json(path);
  if (!doc.is_object()) parse_fail("campaign must be a JSON object");
  CampaignConfig config;
  const json& model = doc.contains("model_path") ? doc.at("model_path") : field(doc, "model", "campaign");
  if (!model.is_string()) parse_fail("campaign model path must be a string");
  std::filesystem::path model_path = model.get<std::string>();
  if (model_path.is_relative()) model_path = path.parent_path() / model_path;
  config.model_path = model_path.string();
  config.n = as_int(field(doc, "n", "campaign"), "n");
  config.n_sims = as_int(field(doc, "n_sims", "campaign"), "n_sims");
  if (doc.contains("seed_base")) {
    const json& s = doc.at("seed_base");
    if (!s.is_number_unsigned() && !s.is_number_integer()) parse_fail("seed_base must be an integer");
    config.seed_base = s.get<std::uint64_t>();
  }
  const json& algos = field(doc, "algorithms", "campaign");
  if (!algos.is_array() || algos.empty()) parse_fail("algorithms must be a non-empty array");
  for (const json& a : algos) {
    if (a.is_string()) {
      config.algorithms.push_back(AlgoTag::parse(a.get<std::string>()));
      continue;
    }
    const json& family = field(a, "family", "algorithm");
    if (!family.is_string()) parse_fail("algorithm family must be a string");
    const int order = a.contains("order") ? as_int(a.at("order"), "order") : 1;
    config.algorithms.push_back(AlgoTag::parse(family.get<std::string>() + std::to_string(order)));
  }
  if (doc.contains("normalizer") && !doc.at("normalizer").is_null()) {
    const json& v = doc.at("normalizer");
    if (!v.is_array()) parse_fail("normalizer must be an array");
    config.normalizer = vector_from(v, static_cast<Eigen::Index>(v.size()), "normalizer");
  }
  if (doc.contains("warmup")) config.warmup = parse_warmup(doc.at("warmup").get<std::string>());
  if (doc.contains("smooth")) config.smooth = doc.at("smooth").get<bool>();
  if (doc.contains("threads")) config.threads = as_int(doc.at("threads"), "threads");
  return config;
}

json report_to_json(const MetricReport& report, const std::string& model_hash) {
  json doc;
  doc["model"] = model_hash;
  doc["n"] = report.n;
  doc["n_sims"] = report.n_sims;
  doc["seed_base"] = report.seed_base;
  doc["warmup"] = std::string(to_string(report.warmup));
  doc["failures"] = report.failed_seeds.size();
  doc["failed_seeds"] = report.failed_seeds;
  doc["failure_messages"] = report.failure_messages;
  json algos = json::array();
  for (const AlgoMetrics& a : report.algorithms) {
    json entry;
    entry["algo"] = a.tag.name();
    entry["updated"] = {{"state_rmse", vector_to(a.mean_state_updated)},
                        {"relative_state_rmse", vector_to(a.relative_state_updated)},
                        {"prob_rmse", vector_to(a.mean_prob_updated)},
                        {"per_sim_state_rmse", matrix_to(a.state_rmse_updated)},
                        {"per_sim_prob_rmse", matrix_to(a.prob_rmse_updated)}};
    if (report.smoothed) {
      entry["smoothed"] = {{"state_rmse", vector_to(a.mean_state_smoothed)},
                           {"relative_state_rmse", vector_to(a.relative_state_smoothed)},
                           {"prob_rmse", vector_to(a.mean_prob_smoothed)},
                           {"per_sim_state_rmse", matrix_to(a.state_rmse_smoothed)},
                           {"per_sim_prob_rmse", matrix_to(a.prob_rmse_smoothed)}};
      entry["improvement"] = {{"state", vector_to(a.improvement_state)}, {"prob", vector_to(a.improvement_prob)}};
    }
    entry["seconds"] = {{"updating", a.seconds_updating}, {"updating_smoothing", a.seconds_updating_smoothing}};
    algos.push_back(std::move(entry));
  }
  doc["algorithms"] = std::move(algos);
  return doc;
}

void write_report_tables(const std::filesystem::path& path, const MetricReport& report, const std::string& header) {
  CsvWriter csv(path);
  csv.comment(header);
  csv.header({"algo", "estimate", "metric", "variable", "value"});
  auto emit = [&](const std::string& algo, const char* estimate, const char* metric, const char* prefix,
                  const Vector& values) {
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      csv.row(algo + "," + estimate + "," + metric + "," + prefix + std::to_string(i + 1), {values(i)});
    }
  };
  for (const AlgoMetrics& a : report.algorithms) {
    const std::string name = a.tag.name();
    emit(name, "updated", "rmse", "alpha_", a.mean_state_updated);
    emit(name, "updated", "relative_rmse", "alpha_", a.relative_state_updated);
    emit(name, "updated", "prob_rmse", "mu_", a.mean_prob_updated);
    if (report.smoothed) {
      emit(name, "smoothed", "rmse", "alpha_", a.mean_state_smoothed);
      emit(name, "smoothed", "relative_rmse", "alpha_", a.relative_state_smoothed);
      emit(name, "smoothed", "prob_rmse", "mu_", a.mean_prob_smoothed);
      emit(name, "smoothed", "improvement", "alpha_", a.improvement_state);
      emit(name, "smoothed", "prob_improvement", "mu_", a.improvement_prob);
    }
  }
}

}  // namespace msfilter::io
