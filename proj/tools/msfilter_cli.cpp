// msfilter command-line tool: simulate, filter, smooth, compare, bench.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "msfilter/campaign.hpp"
#include "msfilter/error.hpp"
#include "msfilter/exact.hpp"
#include "msfilter/filter.hpp"
#include "msfilter/io.hpp"
#include "msfilter/simulate.hpp"
#include "msfilter/smoother.hpp"

namespace fs = std::filesystem;
using namespace msfilter;

namespace {

constexpr std::size_t kMaxHistories = std::size_t{1} << 16;

struct Options {
  int threads = 0;

  std::string model;
  std::string data;
  std::string out;

  int length = 100;
  std::uint64_t seed = 1;

  std::string algo;
  int order = 1;
  bool retain = false;
  std::string warmup = "paper";

  std::string from;

  bool oracle = false;
  std::vector<std::string> algos;
  int max_n = 12;

  std::string campaign;
};

std::vector<std::string> numbered(const std::string& prefix, int count) {
  std::vector<std::string> names;
  for (int i = 1; i <= count; ++i) names.push_back(prefix + std::to_string(i));
  return names;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

void append(std::vector<double>& row, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) row.push_back(v(i));
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
}

/// The "seed=..." token of a data file's comment lines, if any.
std::string seed_of(const fs::path& data) {
  std::ifstream in(data);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] != '#') break;
    std::istringstream tokens(line.substr(1));
    std::string token;
    while (tokens >> token) {
      if (token.rfind("seed=", 0) == 0) return token.substr(5);
    }
  }
  return "none";
}

void check_order(const MSStateSpace& model, int order) {
  if (order < 1) throw Error(ErrorCode::kInvalidArgument, "--order must be >= 1");
  history_count(model.h(), order, kMaxHistories);
}

int resolve_threads(int flag, int fallback) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("MSFILTER_THREADS")) {
    const int value = std::atoi(env);
    if (value > 0) return value;
  }
  return fallback;
}

void cmd_simulate(const Options& o) {
  const MSStateSpace model = io::load_model(o.model);
  const SimOutput sim = simulate(model, o.length, o.seed);
  const fs::path dir = o.out;
  ensure_dir(dir);
  const std::string prov = io::provenance_line(std::to_string(o.seed), io::model_hash(model), "simulate");

  io::CsvWriter truth(dir / "truth.csv");
  truth.comment(prov);
  truth.header(concat({"t", "regime"}, numbered("alpha_", model.dims.m)));
  for (int t = 0; t < sim.periods(); ++t) {
    std::vector<double> row{static_cast<double>(sim.regimes[static_cast<std::size_t>(t)] + 1)};
    append(row, sim.states.row(t).transpose());
    truth.row(std::to_string(t + 1), row);
  }

  io::CsvWriter obs(dir / "obs.csv");
  obs.comment(prov);
  obs.header(numbered("y", model.dims.p));
  for (int t = 0; t < sim.periods(); ++t) {
    std::vector<double> row;
    append(row, sim.observations.row(t).transpose());
    obs.row(row);
  }
}

FilterRun timed_filter(const MSStateSpace& model, const ObservationSeries& data, const AlgoTag& tag,
                       const FilterOptions& options, double& seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  FilterRun run = run_filter(model, data, tag, options);
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

void cmd_filter(const Options& o) {
  const AlgoTag tag = AlgoTag::parse(o.algo + std::to_string(o.order));
  const MSStateSpace model = io::load_model(o.model);
  check_order(model, o.order);
  const ObservationSeries data = io::read_observations(o.data);
  validate_observations(data, model);

  FilterOptions options;
  options.warmup = parse_warmup(o.warmup);
  options.retain_for_smoothing = o.retain;
  double seconds = 0.0;
  const FilterRun run = timed_filter(model, data, tag, options, seconds);

  const fs::path dir = o.out;
  ensure_dir(dir);
  const std::string hash = io::model_hash(model);
  const std::string seed = seed_of(o.data);

  io::CsvWriter csv(dir / "filtered.csv");
  csv.comment(io::provenance_line(seed, hash, tag.name()) + " warmup=" + o.warmup);
  csv.header(concat(concat({"t"}, numbered("alpha_", model.dims.m)), concat(numbered("mu_", model.h()), {"loglik_inc"})));
  for (int t = 0; t < run.periods(); ++t) {
    const auto& step = run.steps[static_cast<std::size_t>(t)];
    std::vector<double> row;
    append(row, step.fused_mean);
    append(row, step.regime_marginals);
    row.push_back(step.loglik_increment);
    csv.row(std::to_string(t + 1), row);
  }

  // the smooth command replays the filter from these copies
  io::save_model(dir / "model.json", model);
  if (fs::weakly_canonical(o.data) != fs::weakly_canonical(dir / "data.csv")) {
    fs::copy_file(o.data, dir / "data.csv", fs::copy_options::overwrite_existing);
  }

  io::json summary;
  summary["algo"] = tag.name();
  summary["family"] = tag.family == Family::kGpb ? "gpb" : "imm";
  summary["order"] = tag.order;
  summary["warmup"] = o.warmup;
  summary["periods"] = run.periods();
  summary["total_loglik"] = run.total_loglik;
  summary["seconds"] = seconds;
  summary["retained"] = o.retain;
  summary["seed"] = seed;
  summary["model_hash"] = hash;
  summary["model"] = "model.json";
  summary["data"] = "data.csv";
  std::size_t flagged = 0;
  for (const auto& step : run.steps) flagged += step.flagged_targets;
  summary["flagged_targets"] = flagged;
  io::write_json(dir / "summary.json", summary);
}

void cmd_smooth(const Options& o) {
  const fs::path dir = o.from;
  const io::json summary = io::read_json(dir / "summary.json");
  if (!summary.value("retained", false)) {
    throw Error(ErrorCode::kMissingRetention, dir.string() + " was filtered without --retain-for-smoothing");
  }
  const MSStateSpace model = io::load_model(dir / summary.at("model").get<std::string>());
  const ObservationSeries data = io::read_observations(dir / summary.at("data").get<std::string>());
  const AlgoTag tag = AlgoTag::parse(summary.at("algo").get<std::string>());
  FilterOptions options;
  options.warmup = parse_warmup(summary.at("warmup").get<std::string>());
  options.retain_for_smoothing = true;
  const FilterRun run = run_filter(model, data, tag, options);
  const SmootherRun smoothed = smooth_run(run, model);

  io::CsvWriter csv(dir / "smoothed.csv");
  csv.comment(io::provenance_line(summary.value("seed", "none"), io::model_hash(model), tag.name()) +
              " warmup=" + summary.at("warmup").get<std::string>());
  csv.header(concat(concat({"t"}, numbered("alpha_", model.dims.m)), numbered("mu_", model.h())));
  for (int t = 0; t < smoothed.periods(); ++t) {
    std::vector<double> row;
    append(row, smoothed.means[static_cast<std::size_t>(t)]);
    append(row, smoothed.regime_probs[static_cast<std::size_t>(t)]);
    csv.row(std::to_string(t + 1), row);
  }
}

void cmd_compare(const Options& o) {
  if (!o.oracle) throw Error(ErrorCode::kInvalidArgument, "compare currently requires --oracle");
  if (o.max_n < 1) throw Error(ErrorCode::kInvalidArgument, "--max-n must be >= 1");
  const MSStateSpace model = io::load_model(o.model);
  ObservationSeries data = io::read_observations(o.data);
  validate_observations(data, model);
  if (data.periods() > o.max_n) data.y = data.y.topRows(o.max_n).eval();

  std::vector<AlgoTag> tags;
  for (const std::string& name : o.algos) {
    const bool has_order = std::any_of(name.begin(), name.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
    tags.push_back(AlgoTag::parse(has_order ? name : name + std::to_string(o.order)));
    check_order(model, tags.back().order);
  }
  if (tags.empty()) throw Error(ErrorCode::kInvalidArgument, "--algos lists no filters");

  const ExactRun exact = exact_run(model, data);
  FilterOptions options;
  options.warmup = parse_warmup(o.warmup);

  const fs::path dir = o.out;
  ensure_dir(dir);
  const std::string hash = io::model_hash(model);
  std::string names;
  for (const AlgoTag& tag : tags) names += (names.empty() ? "" : "+") + tag.name();

  io::CsvWriter csv(dir / "compare.csv");
  csv.comment(io::provenance_line(seed_of(o.data), hash, names) + " warmup=" + o.warmup + " oracle=exact");
  csv.header(concat(concat({"t", "algo"}, numbered("abs_err_alpha_", model.dims.m)),
                    concat(numbered("abs_err_mu_", model.h()), {"abs_err_loglik_inc"})));

  io::json summary;
  summary["periods"] = data.periods();
  summary["exact_total_loglik"] = exact.total_loglik;
  summary["warmup"] = o.warmup;
  io::json per_algo = io::json::array();
  for (const AlgoTag& tag : tags) {
    const FilterRun run = run_filter(model, data, tag, options);
    double max_mu = 0.0;
    double max_alpha = 0.0;
    for (int t = 0; t < run.periods(); ++t) {
      const auto& a = run.steps[static_cast<std::size_t>(t)];
      const auto& e = exact.steps[static_cast<std::size_t>(t)];
      const Vector da = (a.fused_mean - e.fused_mean).cwiseAbs();
      const Vector dm = (a.regime_marginals - e.regime_marginals).cwiseAbs();
      max_alpha = std::max(max_alpha, da.maxCoeff());
      max_mu = std::max(max_mu, dm.maxCoeff());
      std::vector<double> row;
      append(row, da);
      append(row, dm);
      row.push_back(std::abs(a.loglik_increment - e.loglik_increment));
      csv.row(std::to_string(t + 1) + "," + tag.name(), row);
    }
    per_algo.push_back({{"algo", tag.name()},
                        {"max_abs_marginal_error", max_mu},
                        {"max_abs_state_error", max_alpha},
                        {"abs_total_loglik_error", std::abs(run.total_loglik - exact.total_loglik)}});
    std::cout << tag.name() << " max_abs_marginal_error=" << io::format_number(max_mu)
              << " abs_total_loglik_error=" << io::format_number(std::abs(run.total_loglik - exact.total_loglik))
              << '\n';
  }
  summary["algorithms"] = std::move(per_algo);
  io::write_json(dir / "compare.json", summary);
}

void cmd_bench(const Options& o) {
  CampaignConfig config = io::load_campaign(o.campaign);
  config.threads = resolve_threads(o.threads, config.threads);
  const MSStateSpace model = io::load_model(config.model_path);
  for (const AlgoTag& tag : config.algorithms) check_order(model, tag.order);
  const MetricReport report = monte_carlo(model, config);

  const fs::path dir = o.out;
  ensure_dir(dir);
  const std::string hash = io::model_hash(model);
  std::string names;
  for (const AlgoTag& tag : config.algorithms) names += (names.empty() ? "" : "+") + tag.name();
  io::write_json(dir / "report.json", io::report_to_json(report, hash));
  io::write_report_tables(dir / "tables.csv", report,
                          io::provenance_line(std::to_string(config.seed_base), hash, names) +
                              " n=" + std::to_string(config.n) + " n_sims=" + std::to_string(config.n_sims));
  if (!report.failed_seeds.empty()) {
    std::cerr << "warning: " << report.failed_seeds.size() << " of " << report.n_sims
              << " simulations failed and were excluded\n";
  }
}

std::string quoted(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c == '\n' ? ' ' : c);
  }
  return out;
}

int fail(std::string_view code, const std::string& message) {
  std::cerr << "error code=" << code << " message=\"" << quoted(message) << "\"\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-regime state-space filtering and smoothing"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--threads", o.threads, "Worker threads for Monte-Carlo seeds (env MSFILTER_THREADS)");

  auto* sim = app.add_subcommand("simulate", "Simulate regimes, states and observations");
  sim->add_option("--model", o.model)->required();
  sim->add_option("--length", o.length)->required();
  sim->add_option("--seed", o.seed)->required();
  sim->add_option("--out", o.out)->required();

  auto* filt = app.add_subcommand("filter", "Run GPB(N) or IMM(N)");
  filt->add_option("--algo", o.algo)->required()->check(CLI::IsMember({"gpb", "imm"}));
  filt->add_option("--order", o.order)->required();
  filt->add_option("--model", o.model)->required();
  filt->add_option("--data", o.data)->required();
  filt->add_option("--out", o.out)->required();
  filt->add_flag("--retain-for-smoothing", o.retain);
  filt->add_option("--warmup", o.warmup)->check(CLI::IsMember({"paper", "growing"}));

  auto* smo = app.add_subcommand("smooth", "Smooth a retained filter run");
  smo->add_option("--from", o.from)->required();

  auto* cmp = app.add_subcommand("compare", "Per-period errors against the exact filter");
  cmp->add_flag("--oracle", o.oracle);
  cmp->add_option("--model", o.model)->required();
  cmp->add_option("--data", o.data)->required();
  cmp->add_option("--algos", o.algos)->delimiter(',')->required();
  cmp->add_option("--order", o.order);
  cmp->add_option("--max-n", o.max_n);
  cmp->add_option("--warmup", o.warmup)->check(CLI::IsMember({"paper", "growing"}));
  cmp->add_option("--out", o.out)->required();

  auto* bench = app.add_subcommand("bench", "Monte-Carlo RMSE and timing campaign");
  bench->add_option("--campaign", o.campaign)->required();
  bench->add_option("--out", o.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("INVALID_ARGUMENT", e.what());
  }

  try {
    if (sim->parsed()) cmd_simulate(o);
    if (filt->parsed()) cmd_filter(o);
    if (smo->parsed()) cmd_smooth(o);
    if (cmp->parsed()) cmd_compare(o);
    if (bench->parsed()) cmd_bench(o);
  } catch (const Error& e) {
    return fail(to_string(e.code()), e.what());
  } catch (const fs::filesystem_error& e) {
    return fail("IO", e.what());
  } catch (const std::exception& e) {
    return fail("INTERNAL", e.what());
  }
  return 0;
}
