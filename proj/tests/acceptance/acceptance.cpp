// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "msfilter/campaign.hpp"
#include "msfilter/exact.hpp"
#include "msfilter/filter.hpp"
#include "msfilter/gpb.hpp"
#include "msfilter/imm.hpp"
#include "msfilter/io.hpp"
#include "msfilter/metrics.hpp"
#include "msfilter/mixture.hpp"
#include "msfilter/simulate.hpp"
#include "msfilter/smoother.hpp"
#include "oracles.hpp"

using namespace msfilter;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string num(double x) {
  std::ostringstream out;
  out.precision(3);
  out << x;
  return out.str();
}

std::vector<AlgoTag> tags(std::initializer_list<const char*> names) {
  std::vector<AlgoTag> out;
  for (const char* n : names) out.push_back(AlgoTag::parse(n));
  return out;
}

FilterOptions retained(Warmup w = Warmup::kPaper) { return {w, true, std::nullopt}; }

Outcome single_regime_reduction() {
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 1 + trial % 4;
    const int p = 1 + trial % 3;
    const MSStateSpace model = oracle::random_model(rng, 1, m, p);
    const auto sample = oracle::draw(rng, model, 200);
    const auto [x0, P0] = oracle::mixture_prior(model, Vector::Ones(1));
    const auto ref = oracle::kalman(model.regime(0), sample.data.y, x0, P0);
    for (const AlgoTag& tag : tags({"gpb1", "gpb2", "gpb3", "imm1", "imm2"})) {
      const FilterRun run = run_filter(model, sample.data, tag);
      worst = std::max(worst, std::abs(run.total_loglik - ref.loglik));
      for (std::size_t t = 0; t < 200; ++t) {
        worst = std::max(worst, oracle::max_abs(run.steps[t].fused_mean, ref.upd_mean[t]));
        worst = std::max(worst, oracle::max_abs(run.steps[t].fused_cov, ref.upd_cov[t]));
      }
    }
  }
  const double secs = seconds_since(start);
  return {worst <= 1e-10 && secs < 10.0, "max abs diff " + num(worst) + ", " + num(secs) + " s"};
}

Outcome exact_oracle_equivalence() {
  const auto start = Clock::now();
  std::mt19937_64 rng(202);
  double worst = 0.0;
  FilterOptions growing;
  growing.warmup = Warmup::kGrowing;
  for (int trial = 0; trial < 20; ++trial) {
    const MSStateSpace model = oracle::random_model(rng, 2, 1 + trial % 3, 1 + trial % 2);
    const auto sample = oracle::draw(rng, model, 6);
    const ExactRun exact = exact_run(model, sample.data);
    for (const AlgoTag& tag : tags({"gpb6", "imm6"})) {
      const FilterRun run = run_filter(model, sample.data, tag, growing);
      worst = std::max(worst, std::abs(run.total_loglik - exact.total_loglik));
      for (std::size_t t = 0; t < 6; ++t) {
        worst = std::max(worst, oracle::max_abs(run.steps[t].regime_marginals, exact.steps[t].regime_marginals));
      }
    }
  }
  const double secs = seconds_since(start);
  return {worst <= 1e-8 && secs < 10.0, "max abs diff " + num(worst) + ", " + num(secs) + " s"};
}

struct Moments {
  Vector mean;
  Matrix second;  // E[x x']
};

Moments mixture_moments(const std::vector<GaussianBelief>& beliefs, const std::vector<double>& weights) {
  const Eigen::Index m = beliefs.front().mean.size();
  Moments out{Vector::Zero(m), Matrix::Zero(m, m)};
  double total = 0.0;
  for (double w : weights) total += w;
  for (std::size_t k = 0; k < beliefs.size(); ++k) {
    const double w = weights[k] / total;
    out.mean += w * beliefs[k].mean;
    out.second += w * (beliefs[k].cov + beliefs[k].mean * beliefs[k].mean.transpose());
  }
  return out;
}

Outcome moment_matching() {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int cases = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int h = 2 + trial % 2;
    const int m = 1 + trial % 4;
    const int depth = 1 + (trial / 2) % 3;
    const std::size_t size = history_count(h, depth);

    HistoryPosterior post;
    post.regimes = h;
    post.depth = depth;
    double total = 0.0;
    for (std::size_t k = 0; k < size; ++k) {
      const Matrix A = oracle::random_matrix(rng, m, m);
      post.beliefs.push_back({oracle::random_matrix(rng, m, 1, 2.0).col(0), A * A.transpose()});
      post.weights.push_back(u(rng) < 0.1 ? 0.0 : u(rng));
      total += post.weights.back();
    }
    if (total == 0.0) post.weights[0] = total = 1.0;
    for (double& w : post.weights) w /= total;
    post.regime_probs = newest_regime_marginals(post.weights, h);
    const Moments before = mixture_moments(post.beliefs, post.weights);

    if (trial % 2 == 0) {
      // collapse by dropping the oldest regimes
      const HistoryPosterior after = gpb_collapse(post, depth - 1 - (trial / 6) % depth);
      const Moments m2 = mixture_moments(after.beliefs, after.weights);
      worst = std::max({worst, oracle::max_abs(before.mean, m2.mean), oracle::max_abs(before.second, m2.second)});
    } else {
      // IMM mixing over the full-depth grand transition
      const MarkovChain chain{oracle::random_chain(rng, h)};
      const MixingWeights mix = imm_mixing_probs(post.weights, TransitionKernel::between(chain, depth, depth, {}));
      const auto mixed = imm_mix(post.beliefs, post.weights, mix);
      const Moments m2 = mixture_moments(mixed, mix.predicted);
      worst = std::max({worst, oracle::max_abs(before.mean, m2.mean), oracle::max_abs(before.second, m2.second)});
    }
    ++cases;
  }
  return {worst <= 1e-10, std::to_string(cases) + " cases, max abs diff " + num(worst)};
}

Outcome smoother_reductions() {
  std::mt19937_64 rng(404);
  double rts_worst = 0.0;
  double fix_states = 0.0;
  bool fix_probs = true;
  double psd_worst = std::numeric_limits<double>::infinity();  // min eigenvalue of P_{t|t-1} + 1e-8 I - P_{t|n}
  int runs = 0;

  auto audit = [&](const FilterRun& run, const SmootherRun& sm) {
    ++runs;
    const auto& last = run.steps.back();
    fix_probs = fix_probs && sm.history_probs.back() == last.history_weights &&
                sm.regime_probs.back() == last.regime_marginals;
    for (std::size_t k = 0; k < last.records.size(); ++k) {
      fix_states = std::max({fix_states, oracle::max_abs(sm.histories.back()[k].mean, last.records[k].upd_mean),
                             oracle::max_abs(sm.histories.back()[k].cov, last.records[k].upd_cov)});
    }
    for (std::size_t t = 0; t < sm.histories.size(); ++t) {
      for (std::size_t k = 0; k < sm.histories[t].size(); ++k) {
        const Matrix& pred = run.steps[t].records[k].pred_cov;
        const Matrix gap = pred + 1e-8 * Matrix::Identity(pred.rows(), pred.cols()) - sm.histories[t][k].cov;
        psd_worst = std::min(psd_worst, Eigen::SelfAdjointEigenSolver<Matrix>(gap).eigenvalues().minCoeff());
      }
    }
  };

  for (int trial = 0; trial < 20; ++trial) {
    const MSStateSpace model = oracle::random_model(rng, 1, 1 + trial % 4, 1 + trial % 3);
    const auto sample = oracle::draw(rng, model, 100);
    const auto [x0, P0] = oracle::mixture_prior(model, Vector::Ones(1));
    const auto kf = oracle::kalman(model.regime(0), sample.data.y, x0, P0);
    const auto ref = oracle::rts(model.regime(0), kf);
    for (const AlgoTag& tag : tags({"gpb1", "gpb2", "imm1", "imm2"})) {
      const FilterRun run = run_filter(model, sample.data, tag, retained());
      const SmootherRun sm = smooth_run(run, model);
      for (std::size_t t = 0; t < 100; ++t) {
        rts_worst = std::max({rts_worst, oracle::max_abs(sm.means[t], ref.mean[t]), oracle::max_abs(sm.covs[t], ref.cov[t])});
      }
      audit(run, sm);
    }
  }
  for (int trial = 0; trial < 20; ++trial) {
    const MSStateSpace model = oracle::random_model(rng, 2 + trial % 2, 1 + trial % 3, 1 + trial % 2);
    const auto sample = oracle::draw(rng, model, 60);
    for (const AlgoTag& tag : tags({"gpb1", "gpb2", "gpb3", "imm1", "imm2"})) {
      for (Warmup w : {Warmup::kPaper, Warmup::kGrowing}) {
        const FilterRun run = run_filter(model, sample.data, tag, retained(w));
        audit(run, smooth_run(run, model));
      }
    }
  }
  const bool pass = rts_worst <= 1e-10 && fix_probs && fix_states <= 1e-12 && psd_worst >= 0.0;
  return {pass, "(a) RTS max diff " + num(rts_worst) + "; (b) fixpoint probs " + (fix_probs ? "exact" : "NOT exact") +
                    ", states " + num(fix_states) + "; (c) min eig " + num(psd_worst) + " over " +
                    std::to_string(runs) + " runs"};
}

fs::path data_dir() { return fs::path(MSFILTER_DATA_DIR); }

struct CampaignResult {
  MetricReport report;
  double seconds = 0.0;
};

const CampaignResult& shared_campaign() {
  static const CampaignResult result = [] {
    const auto start = Clock::now();
    CampaignConfig config = io::load_campaign(data_dir() / "campaign_m2.json");
    const MSStateSpace model = io::load_model(config.model_path);
    CampaignResult r;
    r.report = monte_carlo(model, config);
    r.seconds = seconds_since(start);
    return r;
  }();
  return result;
}

Outcome smoothing_improves() {
  const CampaignResult& c = shared_campaign();
  bool pass = c.seconds < 120.0 && c.report.failed_seeds.empty();
  std::string detail;
  for (const AlgoMetrics& a : c.report.algorithms) {
    const bool states = (a.mean_state_smoothed.array() < a.mean_state_updated.array()).all();
    const bool probs = (a.mean_prob_smoothed.array() <= a.mean_prob_updated.array()).all();
    pass = pass && states && probs;
    detail += a.tag.name() + " state " + num(a.mean_state_updated.mean()) + "->" + num(a.mean_state_smoothed.mean()) +
              " prob " + num(a.mean_prob_updated.mean()) + "->" + num(a.mean_prob_smoothed.mean()) + "; ";
  }
  return {pass, detail + std::to_string(c.report.n_sims - static_cast<int>(c.report.failed_seeds.size())) + " seeds, " +
                    num(c.seconds) + " s"};
}

/// Lower end of a one-sided 95% bootstrap interval for the mean of a - b
/// (per-seed averages over state variables).
double paired_lower_bound(const Matrix& a, const Matrix& b, std::uint64_t seed) {
  const Vector diff = a.rowwise().mean() - b.rowwise().mean();
  const std::vector<double> samples(diff.data(), diff.data() + diff.size());
  return bootstrap_mean_interval(samples, 0.90, 10000, seed).lo;
}

Outcome accuracy_ordering() {
  const CampaignResult& c = shared_campaign();
  const auto find = [&](const char* name) -> const AlgoMetrics& {
    for (const auto& a : c.report.algorithms)
      if (a.tag.name() == name) return a;
    throw std::runtime_error("campaign lacks " + std::string(name));
  };
  const AlgoMetrics& g1 = find("gpb1");
  const AlgoMetrics& g2 = find("gpb2");
  const AlgoMetrics& i1 = find("imm1");
  const double lb_g2 = paired_lower_bound(g1.state_rmse_updated, g2.state_rmse_updated, 1);
  const double lb_i1 = paired_lower_bound(g1.state_rmse_updated, i1.state_rmse_updated, 2);
  return {lb_g2 >= 0.0 && lb_i1 >= 0.0,
          "95% lower bound of RMSE gap gpb1-gpb2 " + num(lb_g2) + ", gpb1-imm1 " + num(lb_i1)};
}

double median_seconds(const MSStateSpace& model, const ObservationSeries& data, const AlgoTag& tag) {
  std::vector<double> times;
  for (int rep = 0; rep < 7; ++rep) {
    const auto start = Clock::now();
    const FilterRun run = run_filter(model, data, tag);
    times.push_back(seconds_since(start));
    if (run.periods() != data.periods()) throw std::runtime_error("short run");
  }
  std::sort(times.begin(), times.end());
  return times[3];
}

Outcome speed_ordering() {
  std::mt19937_64 rng(707);
  MSStateSpace model = oracle::random_model(rng, 2, 10, 5);
  model.chain.Q << 0.95, 0.05, 0.2, 0.8;
  const SimOutput sim = simulate(model, 1000, 7);
  const ObservationSeries data{sim.observations};
  const double imm1 = median_seconds(model, data, AlgoTag::parse("imm1"));
  const double gpb2 = median_seconds(model, data, AlgoTag::parse("gpb2"));
  const double gpb3 = median_seconds(model, data, AlgoTag::parse("gpb3"));
  return {imm1 < gpb2 && gpb3 > gpb2,
          "median s: imm1 " + num(imm1) + ", gpb2 " + num(gpb2) + ", gpb3 " + num(gpb3)};
}

Outcome regime_distinctness() {
  MSStateSpace model = io::load_model(data_dir() / "two_regime_m2.json");
  CampaignConfig config;
  config.n = 300;
  config.n_sims = 100;
  config.seed_base = 9000;
  config.algorithms = tags({"imm1"});

  model.chain.Q << 0.95, 0.05, 0.05, 0.95;
  const MetricReport persistent = monte_carlo(model, config);
  model.chain.Q << 0.9, 0.1, 0.1, 0.9;
  const MetricReport switching = monte_carlo(model, config);
  const AlgoMetrics& a = persistent.algorithms.front();
  const AlgoMetrics& b = switching.algorithms.front();
  if (a.prob_rmse_updated.rows() != b.prob_rmse_updated.rows()) return {false, "unequal successful seeds"};
  const double lb_upd = paired_lower_bound(b.prob_rmse_updated, a.prob_rmse_updated, 3);
  const double lb_smo = paired_lower_bound(b.prob_rmse_smoothed, a.prob_rmse_smoothed, 4);
  return {lb_upd > 0.0 && lb_smo > 0.0,
          "prob RMSE updated " + num(a.mean_prob_updated(0)) + " (0.95) vs " + num(b.mean_prob_updated(0)) +
              " (0.9), smoothed " + num(a.mean_prob_smoothed(0)) + " vs " + num(b.mean_prob_smoothed(0)) +
              "; 95% lower bounds " + num(lb_upd) + ", " + num(lb_smo)};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + MSFILTER_CLI + "\" " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / ("msfilter_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string model = (data_dir() / "two_regime_m2.json").string();

  fs::path campaign = root / "campaign.json";
  {
    io::json doc = io::read_json(data_dir() / "campaign_m2.json");
    doc["model"] = model;
    doc["n_sims"] = 5;
    doc["n"] = 120;
    io::write_json(campaign, doc);
  }

  std::vector<std::string> failures;
  std::vector<std::string> compared;
  for (int rep = 0; rep < 2; ++rep) {
    const fs::path dir = root / ("rep" + std::to_string(rep));
    const std::string d = dir.string();
    const std::vector<std::string> commands{
        "simulate --model " + model + " --length 150 --seed 42 --out " + d + "/sim",
        "filter --algo gpb --order 2 --model " + model + " --data " + d + "/sim/obs.csv --out " + d + "/gpb --retain-for-smoothing",
        "filter --algo imm --order 1 --model " + model + " --data " + d + "/sim/obs.csv --out " + d + "/imm --retain-for-smoothing --warmup growing",
        "smooth --from " + d + "/gpb",
        "smooth --from " + d + "/imm",
        "compare --oracle --model " + model + " --data " + d + "/sim/obs.csv --algos gpb,imm --order 6 --max-n 6 --warmup growing --out " + d + "/cmp",
        "bench --campaign " + campaign.string() + " --out " + d + "/bench",
        "--threads 2 bench --campaign " + campaign.string() + " --out " + d + "/bench_mt",
    };
    for (const std::string& c : commands) {
      if (run_cli(c) != 0) failures.push_back("exit status of: " + c);
    }
  }
  const std::vector<std::string> files{"sim/truth.csv", "sim/obs.csv",   "gpb/filtered.csv", "gpb/smoothed.csv",
                                       "imm/filtered.csv", "imm/smoothed.csv", "cmp/compare.csv",  "bench/tables.csv",
                                       "bench_mt/tables.csv"};
  for (const std::string& f : files) {
    const std::string a = slurp(root / "rep0" / f);
    const std::string b = slurp(root / "rep1" / f);
    if (a.empty() || a != b) failures.push_back(f);
    compared.push_back(f);
  }
  if (slurp(root / "rep0/bench/tables.csv") != slurp(root / "rep0/bench_mt/tables.csv")) {
    failures.push_back("bench tables differ between 1 and 2 threads");
  }
  fs::remove_all(root);
  std::string detail = std::to_string(compared.size()) + " CSV files compared across reruns";
  for (const auto& f : failures) detail += "; mismatch " + f;
  return {failures.empty(), detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"single-regime reduction", single_regime_reduction},
      {"exact-oracle equivalence", exact_oracle_equivalence},
      {"moment matching of collapse/mix", moment_matching},
      {"smoother reductions", smoother_reductions},
      {"smoothing improves accuracy", smoothing_improves},
      {"accuracy ordering", accuracy_ordering},
      {"speed ordering", speed_ordering},
      {"regime-distinctness effect", regime_distinctness},
      {"CLI determinism", cli_determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome out;
    try {
      out = check();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (out.pass ? "PASS" : "FAIL") << "  " << name << ": " << out.detail << std::endl;
    failed += out.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
