#include "adammcmc/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "adammcmc/chain.hpp"
#include "adammcmc/diagnostics.hpp"
#include "adammcmc/experiment.hpp"
#include "adammcmc/prolate.hpp"
#include "adammcmc/samplers.hpp"

namespace adammcmc {

namespace {

using Clock = std::chrono::steady_clock;

// Proposal widths for the sigma scan without directional noise, and the
// near-zero width for the high-acceptance check (theta units).
const std::vector<double> kDeskSigmaGrid = {0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 4.0, 7.0};
constexpr double kDeskTinySigma = 0.01;
// With sigma -> 0 the proposal collapses onto the update direction and the
// proposal ratio tends to exp(2 xi / sigma_dir - 2 / sigma_dir^2), so the
// directional width has to sit well above 1. P / 100 is about 1 for this net.
constexpr double kDeskTinySigmaDir = 100.0;

// Micro-MLP preset: the network computes with kDeskWeightScale * theta.
constexpr double kDeskWeightScale = 0.005;
constexpr double kDeskLambda = 5.0;
constexpr double kDeskHalfWidth = 1.0 / kDeskWeightScale;
// Sharper target for the M-H comparison, so batch noise reaches the acceptance step.
constexpr double kDeskMhLambda = 50.0;

struct Verdict {
  bool passed = false;
  std::string detail;
};

template <class Body>
CriterionResult timed(int id, std::string name, Body&& body) {
  const auto t0 = Clock::now();
  CriterionResult r;
  r.id = id;
  r.name = std::move(name);
  try {
    Verdict v = body();
    r.passed = v.passed;
    r.detail = std::move(v.detail);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream ss;
  ss << std::setprecision(precision) << v;
  return ss.str();
}

std::string join(const std::vector<double>& v, int precision = 3) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += fmt(v[i], precision);
  }
  return s;
}

void write_text(const std::optional<std::filesystem::path>& dir, const std::string& name,
                const std::string& text) {
  if (!dir) return;
  std::filesystem::create_directories(*dir);
  std::ofstream f(*dir / name);
  f << text;
}

double log_uniform(RngState& rng, double lo, double hi) {
  return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * rng.uniform_open_closed());
}

// ---------------------------------------------------------------------------
// 1: rank-1 algebra against a dense extended-precision factorization

using LongMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using LongVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

Verdict rank1_algebra() {
  RngState rng(20240101);
  constexpr int kInstances = 500;
  double worst_det = 0.0;
  double worst_quad = 0.0;
  for (int i = 0; i < kInstances; ++i) {
    const auto p = static_cast<Eigen::Index>(1 + std::min(63.0, std::floor(64.0 * rng.uniform_open_closed())));
    const double sigma = log_uniform(rng, 1e-2, 10.0);
    const double sigma_dir = i % 10 == 0 ? 0.0 : log_uniform(rng, 1e-3, 1e2);
    const ParamVector d = log_uniform(rng, 1e-3, 10.0) * rng.normal_vector(p) / std::sqrt(double(p));
    const ParamVector x = sigma * log_uniform(rng, 0.1, 10.0) * rng.normal_vector(p);
    const ProlateCovariance cov(sigma, sigma_dir, d);

    const LongVector dl = d.cast<long double>();
    LongMatrix dense = LongMatrix::Identity(p, p) * (static_cast<long double>(sigma) * sigma);
    dense += static_cast<long double>(sigma_dir) * sigma_dir * dl * dl.transpose();
    const Eigen::LLT<LongMatrix> llt(dense);
    if (llt.info() != Eigen::Success) return {false, "dense factorization failed"};
    long double log_det = 0.0L;
    for (Eigen::Index k = 0; k < p; ++k) log_det += 2.0L * std::log(llt.matrixL()(k, k));
    const LongVector xl = x.cast<long double>();
    const long double quad = xl.dot(llt.solve(xl));

    const double det_err = std::abs(cov.log_det() - static_cast<double>(log_det)) /
                           std::max(1.0, std::abs(static_cast<double>(log_det)));
    const double quad_err = std::abs(cov.inv_quad_form(x) - static_cast<double>(quad)) /
                            std::abs(static_cast<double>(quad));
    worst_det = std::max(worst_det, det_err);
    worst_quad = std::max(worst_quad, quad_err);
  }
  return {worst_det < 1e-10 && worst_quad < 1e-8,
          "500 instances, max rel err log_det " + fmt(worst_det, 3) + " (< 1e-10), inv_quad_form " +
              fmt(worst_quad, 3) + " (< 1e-8)"};
}

// ---------------------------------------------------------------------------
// 2: proposal sampling moments

Verdict proposal_sampling() {
  constexpr Eigen::Index kP = 8;
  constexpr int kDraws = 100000;
  RngState rng(77);
  const double sigma = 0.7;
  const double sigma_dir = 1.3;
  const ParamVector d = rng.normal_vector(kP);
  const ParamVector mean = ParamVector::Zero(kP);
  const ProlateCovariance cov(sigma, sigma_dir, d);
  const Eigen::MatrixXd truth =
      sigma * sigma * Eigen::MatrixXd::Identity(kP, kP) + sigma_dir * sigma_dir * d * d.transpose();

  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(kP, kP);
  double dir_sq = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const ParamVector x = cov.sample(mean, rng);
    second.noalias() += x * x.transpose();
    const double v = x.dot(d);
    dir_sq += v * v;
  }
  second /= kDraws;
  dir_sq /= kDraws;

  // Known mean, so the estimator is unbiased with Var = (S_ii S_jj + S_ij^2) / n.
  double worst_z = 0.0;
  for (Eigen::Index i = 0; i < kP; ++i) {
    for (Eigen::Index j = 0; j < kP; ++j) {
      const double se = std::sqrt((truth(i, i) * truth(j, j) + truth(i, j) * truth(i, j)) / kDraws);
      worst_z = std::max(worst_z, std::abs(second(i, j) - truth(i, j)) / se);
    }
  }
  const double d2 = d.squaredNorm();
  const double dir_truth = sigma * sigma * d2 + sigma_dir * sigma_dir * d2 * d2;
  const double dir_z = std::abs(dir_sq - dir_truth) / (dir_truth * std::sqrt(2.0 / kDraws));
  return {worst_z < 4.0 && dir_z < 3.0,
          "max entry |z| " + fmt(worst_z, 3) + " (< 4), gradient-direction variance " +
              fmt(dir_sq) + " vs " + fmt(dir_truth) + ", |z| " + fmt(dir_z, 3) + " (< 3)"};
}

// ---------------------------------------------------------------------------
// 3: detailed balance of the augmented chain

Verdict detailed_balance() {
  const GibbsTarget target = quadratic_target(2, 1.0, 10.0);
  AdamParams ap;
  ap.gamma = 0.05;
  ap.beta1 = 0.9;
  ap.beta2 = 0.95;
  const ProposalParams pp{0.5, 2.0};
  const CorrectionParams full = CorrectionParams::full_from_s2(1e-2, ap);
  CorrectionParams unit = full;
  unit.mode = CorrectionMode::Unit;
  RngState rng_full(11);
  RngState rng_unit(11);
  const auto rep_full = check_detailed_balance(target, ap, pp, full, 200, rng_full);
  const auto rep_unit = check_detailed_balance(target, ap, pp, unit, 200, rng_unit);
  return {rep_full.max_violation < 1e-8,
          "200 triples, max violation " + fmt(rep_full.max_violation, 3) +
              " (< 1e-8); with C = 1 it is " + fmt(rep_unit.max_violation, 3)};
}

// ---------------------------------------------------------------------------
// 4: posterior moments on the 2D quadratic

Verdict posterior_moments() {
  constexpr std::int64_t kBurn = 10000;
  constexpr std::int64_t kKeep = 200000;
  const GibbsTarget target = quadratic_target(2, 1.0, 10.0);
  AdamMcmcParams params;
  params.adam.gamma = 1e-3;
  params.adam.beta1 = 0.9;
  params.adam.beta2 = 0.9;
  params.proposal = {0.5, 10.0};
  ChainState state = make_chain_state(*target.oracle, ParamVector::Zero(2), 0);
  std::vector<double> x0, x1;
  x0.reserve(kKeep);
  x1.reserve(kKeep);
  for (std::int64_t k = 0; k < kBurn + kKeep; ++k) {
    adammcmc_step(state, target, params);
    if (k >= kBurn) {
      x0.push_back(state.theta[0]);
      x1.push_back(state.theta[1]);
    }
  }
  const double truth = truncated_gaussian_variance(1.0, 10.0);
  bool ok = true;
  std::string detail;
  int coord = 0;
  for (const auto* xs : {&x0, &x1}) {
    const SeriesSummary s = summarize_series(*xs);
    const double zm = s.mean / s.se_mean;
    const double zv = (s.variance - truth) / s.se_variance;
    ok = ok && std::abs(zm) < 3.0 && std::abs(zv) < 3.0;
    detail += (coord ? "; " : "") + std::string("coord ") + std::to_string(coord) + " mean " +
              fmt(s.mean, 3) + " (z " + fmt(zm, 3) + "), var " + fmt(s.variance) + " vs " +
              fmt(truth) + " (z " + fmt(zv, 3) + ")";
    ++coord;
  }
  return {ok, detail};
}

// ---------------------------------------------------------------------------
// 5: TV decay on a 1D quadratic, pooled running histograms of several chains

Verdict tv_convergence(const SuiteOptions& opts) {
  constexpr int kChains = 16;
  const std::vector<std::int64_t> checkpoints = {100, 1000, 10000, 100000};
  const GibbsTarget target = quadratic_target(1, 1.0, 10.0);
  const GridSpec grid{{-5.0}, {5.0}, {50}};
  const GridDensity reference = GridDensity::from_target(target, grid);
  AdamMcmcParams params;
  params.adam.gamma = 1e-3;
  params.adam.beta1 = 0.9;
  params.adam.beta2 = 0.9;
  params.proposal = {0.5, 10.0};

  std::vector<std::vector<double>> paths(kChains);
  for (int c = 0; c < kChains; ++c) {
    ChainState state = make_chain_state(*target.oracle, ParamVector::Constant(1, 8.0),
                                        1000 + static_cast<std::uint64_t>(c));
    paths[c].reserve(static_cast<std::size_t>(checkpoints.back()));
    for (std::int64_t k = 0; k < checkpoints.back(); ++k) {
      adammcmc_step(state, target, params);
      paths[c].push_back(state.theta[0]);
    }
  }
  std::vector<double> tvs;
  std::ostringstream trace;
  trace << "step,tv\n" << std::setprecision(17);
  for (std::int64_t t : checkpoints) {
    std::vector<ParamVector> pooled;
    pooled.reserve(static_cast<std::size_t>(t) * kChains);
    for (const auto& path : paths) {
      for (std::int64_t k = 0; k < t; ++k) pooled.push_back(ParamVector::Constant(1, path[k]));
    }
    tvs.push_back(tv_distance_to_target(pooled, reference));
    trace << t << ',' << tvs.back() << '\n';
  }
  write_text(opts.out_dir, "tv_trace.csv", trace.str());
  bool decreasing = true;
  for (std::size_t i = 1; i < tvs.size(); ++i) decreasing = decreasing && tvs[i] < tvs[i - 1];
  return {decreasing && tvs.back() < 0.05,
          "TV at 1e2/1e3/1e4/1e5 steps: " + join(tvs, 3) + " (decreasing, last < 0.05)"};
}

// ---------------------------------------------------------------------------
// 6: degenerate AdamMCMC against MALA

Verdict mala_equivalence() {
  constexpr int kSteps = 10000;
  const double gamma = 0.05;
  const double sigma = 0.4;
  ParamVector slope(3);
  slope << 0.5, -1.0, 2.0;
  const GibbsTarget target = linear_target(slope, 1.0, 100.0);
  AdamMcmcParams params;
  params.adam.gamma = gamma;
  params.adam.beta1 = 0.0;
  params.adam.drift = DriftRule::ScaledGradient;
  params.proposal = {sigma, 0.0};

  ChainState a = make_chain_state(*target.oracle, ParamVector::Zero(3), 5);
  ChainState m = make_chain_state(*target.oracle, ParamVector::Zero(3), 5);
  int mismatches = 0;
  int accepted = 0;
  for (int k = 0; k < kSteps; ++k) {
    const StepResult ra = adammcmc_step(a, target, params);
    const StepResult rm = mala_step(m, target, gamma, sigma);
    const bool same = ra.accepted == rm.accepted && ra.log_alpha == rm.log_alpha &&
                      a.theta == m.theta;
    if (!same) ++mismatches;
    accepted += ra.accepted ? 1 : 0;
  }
  return {mismatches == 0 && accepted > 0 && accepted < kSteps,
          std::to_string(kSteps) + " steps on a constant-gradient target, " +
              std::to_string(mismatches) + " mismatches, " + std::to_string(accepted) +
              " accepted"};
}

// ---------------------------------------------------------------------------
// 7-9: micro-MLP trends

std::vector<double> replicate_means(const std::vector<ScanRow>& rows, const std::vector<double>& grid) {
  return mean_acceptance_by_value(rows, grid);
}

std::string scan_table(const std::vector<ScanRow>& rows) {
  std::ostringstream ss;
  write_scan_csv(ss, rows);
  return ss.str();
}

Verdict acceptance_trends(const SuiteOptions& opts) {
  const RunConfig base = desk_mlp_config();
  const double small_sigma = 0.05 * RunConfig{}.sigma;
  std::string detail;
  bool ok = true;

  // (a) sigma_dir at small sigma.
  const std::vector<double> dir_grid = {0.0, 10.0, 1e2, 1e3, 1e4};
  RunConfig a = base;
  a.sigma = small_sigma;
  const auto rows_a = scan_acceptance(a, "sigma_dir", dir_grid, 3, opts.jobs);
  const auto acc_a = replicate_means(rows_a, dir_grid);
  write_text(opts.out_dir, "scan_sigma_dir.csv", scan_table(rows_a));
  const auto peak = static_cast<std::size_t>(
      std::max_element(acc_a.begin(), acc_a.end()) - acc_a.begin());
  // Rising segment: grid points up to the acceptance peak, one value per replicate.
  std::vector<double> xs, ys;
  for (const auto& r : rows_a) {
    const auto idx = static_cast<std::size_t>(
        std::find(dir_grid.begin(), dir_grid.end(), r.value) - dir_grid.begin());
    if (idx <= peak) {
      xs.push_back(static_cast<double>(idx));
      ys.push_back(r.mean_acceptance);
    }
  }
  const double rho = peak >= 2 ? spearman_correlation(xs, ys) : 0.0;
  const bool ok_a = peak >= 2 && rho > 0.8;
  ok = ok && ok_a;
  detail += "(a) sigma=" + fmt(small_sigma) + " acceptance vs sigma_dir {" + join(dir_grid) + "}: " +
            join(acc_a) + ", rising through index " + std::to_string(peak) + ", spearman " +
            fmt(rho, 3) + (ok_a ? "" : " FAIL");

  // (b) sigma without directional noise: interior maximum.
  const std::vector<double> sigma_grid = kDeskSigmaGrid;
  RunConfig b = base;
  b.sigma_dir = 0.0;
  const auto rows_b = scan_acceptance(b, "sigma", sigma_grid, 3, opts.jobs);
  const auto acc_b = replicate_means(rows_b, sigma_grid);
  write_text(opts.out_dir, "scan_sigma.csv", scan_table(rows_b));
  const auto top = static_cast<std::size_t>(
      std::max_element(acc_b.begin(), acc_b.end()) - acc_b.begin());
  const bool ok_b = top > 0 && top + 1 < acc_b.size() && acc_b[top] > acc_b.front() &&
                    acc_b[top] > acc_b.back();
  ok = ok && ok_b;
  detail += "; (b) sigma_dir=0 acceptance vs sigma {" + join(sigma_grid) + "}: " + join(acc_b) +
            (ok_b ? ", interior maximum" : " no interior maximum FAIL");

  // (b) small sigma with directional noise, 2000 steps.
  RunConfig c = base;
  c.sigma = kDeskTinySigma;
  c.sigma_dir = kDeskTinySigmaDir;
  c.steps = 2000;
  c.burn_in = 1000;
  c.gap = 100;
  c.n_samples = 10;
  const Experiment exp = build_experiment(c);
  const RunResult res = run_experiment(exp);
  const bool ok_c = res.metrics.acceptance_rate >= 0.9;
  ok = ok && ok_c;
  detail += "; sigma=" + fmt(c.sigma) + " with sigma_dir=" + fmt(kDeskTinySigmaDir) + ": acceptance " +
            fmt(res.metrics.acceptance_rate, 3) + " over 2000 steps (>= 0.9)";
  return {ok, detail};
}

struct SpreadStats {
  double mean = 0.0;
  double se = 0.0;
};

SpreadStats mean_se(const std::vector<double>& v) {
  SpreadStats s;
  const double n = static_cast<double>(v.size());
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() > 1) {
    double sq = 0.0;
    for (double x : v) sq += (x - s.mean) * (x - s.mean);
    s.se = std::sqrt(sq / (n - 1.0) / n);
  }
  return s;
}

Verdict spread_trend(const SuiteOptions& opts) {
  constexpr int kReplicates = 5;
  const std::vector<double> grid = {1.0, 2.0, 4.0, 7.0};
  const RunConfig base = desk_mlp_config();
  std::vector<SpreadStats> id_stats, ood_stats;
  std::ostringstream table;
  table << "sigma,seed,acceptance,median_spread_test,median_spread_ood\n" << std::setprecision(17);
  for (double sigma : grid) {
    std::vector<double> id, ood;
    for (int r = 0; r < kReplicates; ++r) {
      RunConfig c = base;
      c.sigma = sigma;
      c.seed = base.seed + static_cast<std::uint64_t>(r);
      const Experiment exp = build_experiment(c);
      const RunResult res = run_experiment(exp);
      id.push_back(res.metrics.median_spread_test.value());
      ood.push_back(res.metrics.median_spread_ood.value());
      table << sigma << ',' << c.seed << ',' << res.metrics.acceptance_rate << ',' << id.back()
            << ',' << ood.back() << '\n';
    }
    id_stats.push_back(mean_se(id));
    ood_stats.push_back(mean_se(ood));
  }
  write_text(opts.out_dir, "spread_vs_sigma.csv", table.str());

  // Non-decreasing, except for at most one drop that stays within twice the
  // combined replicate standard error.
  int drops = 0;
  bool drops_in_noise = true;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double drop = id_stats[i - 1].mean - id_stats[i].mean;
    if (drop > 0.0) {
      ++drops;
      const double noise = 2.0 * std::hypot(id_stats[i - 1].se, id_stats[i].se);
      drops_in_noise = drops_in_noise && drop <= noise;
    }
  }
  const bool rises = id_stats.back().mean > id_stats.front().mean;
  const bool monotone = rises && (drops == 0 || (drops == 1 && drops_in_noise));
  const std::size_t at2 = 1;
  const bool ood_wider = ood_stats[at2].mean > id_stats[at2].mean;
  std::vector<double> id_means, ood_means;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    id_means.push_back(id_stats[i].mean);
    ood_means.push_back(ood_stats[i].mean);
  }
  return {monotone && ood_wider,
          "median test spread vs sigma {1,2,4,7} (mean of " + std::to_string(kReplicates) +
              " seeds): " + join(id_means) + (monotone ? "" : " not monotone FAIL") +
              "; OOD: " + join(ood_means) + "; at sigma=2 OOD " + fmt(ood_stats[at2].mean, 3) +
              (ood_wider ? " > " : " <= ") + "test " + fmt(id_stats[at2].mean, 3)};
}

Verdict stochastic_mh(const SuiteOptions& opts) {
  // Matched pairs are pooled over seeds; one pair is dominated by slow mixing.
  constexpr int kPairs = 6;
  const RunConfig base = desk_mh_config();
  std::vector<double> st_loss, fu_loss;
  double st_acc = 0.0;
  double fu_acc = 0.0;
  std::ostringstream table;
  table << std::setprecision(17) << "seed,chain,mean_acceptance,loss_mean,loss_var\n";
  for (int k = 0; k < kPairs; ++k) {
    RunConfig c = base;
    c.seed = base.seed + static_cast<std::uint64_t>(k);
    const MhComparison cmp = compare_full_vs_stochastic_mh(c, c.steps, c.burn_in);
    const auto burn = static_cast<std::size_t>(c.burn_in);
    st_loss.insert(st_loss.end(), cmp.stochastic_full_loss.begin() + static_cast<std::ptrdiff_t>(burn),
                   cmp.stochastic_full_loss.end());
    fu_loss.insert(fu_loss.end(), cmp.full_full_loss.begin() + static_cast<std::ptrdiff_t>(burn),
                   cmp.full_full_loss.end());
    st_acc += cmp.stochastic_stats.mean_acceptance / kPairs;
    fu_acc += cmp.full_stats.mean_acceptance / kPairs;
    for (const auto& [name, stats] : {std::pair{"stochastic", cmp.stochastic_stats},
                                      std::pair{"full", cmp.full_stats}}) {
      table << c.seed << ',' << name << ',' << stats.mean_acceptance << ',' << stats.loss_mean << ','
            << stats.loss_var << '\n';
    }
  }
  write_text(opts.out_dir, "stochastic_vs_full_mh.csv", table.str());
  const auto moments = [](const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double sq = 0.0;
    for (double x : v) sq += (x - mean) * (x - mean);
    return std::pair{mean, sq / n};
  };
  const auto [st_mean, st_var] = moments(st_loss);
  const auto [fu_mean, fu_var] = moments(fu_loss);
  const double mean_gap = std::abs(st_mean - fu_mean) / std::abs(fu_mean);
  const double var_gap = std::abs(st_var - fu_var) / fu_var;
  const bool ok = fu_acc <= st_acc && mean_gap < 0.1 && var_gap < 0.1;
  return {ok, std::to_string(kPairs) + " matched pairs: acceptance full " + fmt(fu_acc, 3) +
                  " vs stochastic " + fmt(st_acc, 3) + "; post-burn-in loss mean " +
                  fmt(fu_mean, 3) + " vs " + fmt(st_mean, 3) + " (rel. gap " + fmt(mean_gap, 3) +
                  "), variance rel. gap " + fmt(var_gap, 3) + " (< 0.1)"};
}

std::string record_bytes(const RunConfig& c) {
  const Experiment exp = build_experiment(c);
  const RunResult res = run_experiment(exp);
  std::ostringstream ss;
  res.chain.record.write_csv(ss);
  write_samples_csv(ss, res.chain.samples);
  return ss.str();
}

Verdict determinism() {
  RunConfig mlp = desk_mlp_config();
  mlp.steps = 600;
  mlp.burn_in = 100;
  mlp.gap = 50;
  mlp.n_samples = 10;
  mlp.batch_size = 250;
  RunConfig quad;
  quad.target = "quadratic";
  quad.dim = 3;
  quad.sigma = 0.5;
  quad.sigma_dir = 5.0;
  quad.steps = 5000;
  quad.burn_in = 1000;
  quad.gap = 400;
  quad.n_samples = 10;
  quad.seed = 9;
  bool same = true;
  std::size_t bytes = 0;
  for (const RunConfig* c : {&mlp, &quad}) {
    const std::string first = record_bytes(*c);
    const std::string second = record_bytes(*c);
    same = same && first == second;
    bytes += first.size();
  }
  return {same, std::string(same ? "identical" : "different") +
                    " chain records and samples across two runs (mlp with batches, quadratic; " +
                    std::to_string(bytes) + " bytes)"};
}

}  // namespace

RunConfig desk_mlp_config() {
  RunConfig c;
  c.target = "mlp";
  c.hidden = {8, 8};
  c.weight_scale = kDeskWeightScale;
  c.lambda = kDeskLambda;
  c.prior_half_width = kDeskHalfWidth;
  c.seed = 0;
  return c;
}

RunConfig desk_mh_config() {
  RunConfig c = desk_mlp_config();
  c.lambda = kDeskMhLambda;
  c.batch_size = 500;
  c.steps = 50000;
  c.burn_in = 10000;
  c.seed = 1;
  return c;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream ss;
  ss << (r.passed ? "[PASS] " : "[FAIL] ") << r.id << ' ' << r.name << " (" << std::fixed
     << std::setprecision(1) << r.seconds << " s): " << r.detail;
  return ss.str();
}

CriterionResult check_rank1_algebra() { return timed(1, "rank-1 algebra", rank1_algebra); }
CriterionResult check_proposal_sampling() {
  return timed(2, "proposal sampling", proposal_sampling);
}
CriterionResult check_detailed_balance_criterion() {
  return timed(3, "detailed balance", detailed_balance);
}
CriterionResult check_posterior_moments() {
  return timed(4, "posterior moments", posterior_moments);
}
CriterionResult check_tv_convergence(const SuiteOptions& opts) {
  return timed(5, "TV convergence", [&] { return tv_convergence(opts); });
}
CriterionResult check_mala_equivalence() {
  return timed(6, "MALA equivalence", mala_equivalence);
}
CriterionResult check_acceptance_trends(const SuiteOptions& opts) {
  return timed(7, "acceptance trends", [&] { return acceptance_trends(opts); });
}
CriterionResult check_spread_trend(const SuiteOptions& opts) {
  return timed(8, "posterior spread", [&] { return spread_trend(opts); });
}
CriterionResult check_stochastic_mh(const SuiteOptions& opts) {
  return timed(9, "stochastic vs full M-H", [&] { return stochastic_mh(opts); });
}
CriterionResult check_determinism() { return timed(10, "determinism", determinism); }

std::vector<CriterionResult> run_acceptance_suite(const SuiteOptions& opts) {
  std::vector<std::function<CriterionResult()>> checks = {
      check_rank1_algebra,
      check_proposal_sampling,
      check_detailed_balance_criterion,
      check_posterior_moments,
      [&] { return check_tv_convergence(opts); },
      check_mala_equivalence,
  };
  if (!opts.quick) {
    checks.emplace_back([&] { return check_acceptance_trends(opts); });
    checks.emplace_back([&] { return check_spread_trend(opts); });
    checks.emplace_back([&] { return check_stochastic_mh(opts); });
  }
  checks.emplace_back(check_determinism);
  std::vector<CriterionResult> out;
  for (const auto& check : checks) {
    out.push_back(check());
    if (opts.on_result) opts.on_result(out.back());
  }
  return out;
}

}  // namespace adammcmc
