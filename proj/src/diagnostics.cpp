#include "adammcmc/diagnostics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <Eigen/Dense>

#include "adammcmc/experiment.hpp"

namespace adammcmc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> v) {
  double mx = kNegInf;
  for (double x : v) mx = std::max(mx, x);
  if (mx == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

// Cell index of a point, or npos when it lies outside the grid.
std::size_t cell_of(const GridSpec& g, const ParamVector& x) {
  std::size_t index = 0;
  for (std::size_t d = 0; d < g.dims(); ++d) {
    const double t = (x[static_cast<Eigen::Index>(d)] - g.lower[d]) / (g.upper[d] - g.lower[d]);
    if (!(t >= 0.0 && t <= 1.0)) return std::numeric_limits<std::size_t>::max();
    auto b = static_cast<std::size_t>(t * g.bins[d]);
    b = std::min(b, static_cast<std::size_t>(g.bins[d] - 1));
    index = index * static_cast<std::size_t>(g.bins[d]) + b;
  }
  return index;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 50);
}

std::vector<double> ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

// Dense N(mean, Sigma) log density; Sigma = sigma^2 I + sigma_dir^2 u u^T.
double dense_log_normal(const ParamVector& mean, const ParamVector& x, double sigma,
                        double sigma_dir, const ParamVector& u) {
  const Eigen::Index p = x.size();
  const Eigen::MatrixXd cov = sigma * sigma * Eigen::MatrixXd::Identity(p, p) +
                              sigma_dir * sigma_dir * u * u.transpose();
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const Eigen::VectorXd diff = x - mean;
  const Eigen::VectorXd white = llt.matrixL().solve(diff);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * static_cast<double>(p) * std::log(2.0 * std::numbers::pi) - 0.5 * log_det -
         0.5 * white.squaredNorm();
}

double isotropic_log_normal(const ParamVector& mean, const ParamVector& x, double variance) {
  const auto p = static_cast<double>(x.size());
  return -0.5 * p * std::log(2.0 * std::numbers::pi * variance) -
         0.5 * (x - mean).squaredNorm() / variance;
}

// Posterior times stationary momentum densities, unnormalized.
double log_invariant_density(const GibbsTarget& target, const ParamVector& theta, const Momenta& m,
                             const CorrectionParams& cp, const AdamParams& ap) {
  const double log_post = target.log_density(theta);
  if (log_post == kNegInf) return kNegInf;
  const ParamVector g = target.oracle->grad(theta);
  return log_post + isotropic_log_normal(g, m.first, cp.s2(1, ap)) +
         isotropic_log_normal(g.cwiseAbs2(), m.second, cp.s2(2, ap));
}

}  // namespace

// ---------------------------------------------------------------------------
// Grids and TV distance

std::size_t GridSpec::n_cells() const {
  std::size_t n = 1;
  for (int b : bins) n *= static_cast<std::size_t>(b);
  return n;
}

void GridSpec::validate() const {
  if (bins.empty() || bins.size() > 2) throw std::invalid_argument("grid: only 1 or 2 dimensions");
  if (lower.size() != bins.size() || upper.size() != bins.size()) {
    throw std::invalid_argument("grid: bounds and bins must have the same length");
  }
  for (std::size_t d = 0; d < bins.size(); ++d) {
    if (bins[d] < 1) throw std::invalid_argument("grid: bins must be positive");
    if (!(upper[d] > lower[d])) throw std::invalid_argument("grid: upper must exceed lower");
  }
}

GridDensity GridDensity::from_target(const GibbsTarget& target, const GridSpec& grid,
                                     int subdivisions) {
  grid.validate();
  if (static_cast<std::size_t>(target.dim()) != grid.dims()) {
    throw std::invalid_argument("grid: dimension differs from target");
  }
  if (subdivisions < 1) throw std::invalid_argument("grid: subdivisions must be positive");
  GridDensity out;
  out.grid_ = grid;
  out.log_mass_.assign(grid.n_cells(), kNegInf);
  const std::size_t dims = grid.dims();
  std::vector<double> width(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    width[d] = (grid.upper[d] - grid.lower[d]) / grid.bins[d] / subdivisions;
  }
  double log_vol = 0.0;
  for (double w : width) log_vol += std::log(w);

  ParamVector point(static_cast<Eigen::Index>(dims));
  std::vector<double> sub;
  for (std::size_t cell = 0; cell < grid.n_cells(); ++cell) {
    std::vector<std::size_t> idx(dims);
    std::size_t rest = cell;
    for (std::size_t d = dims; d-- > 0;) {
      idx[d] = rest % static_cast<std::size_t>(grid.bins[d]);
      rest /= static_cast<std::size_t>(grid.bins[d]);
    }
    sub.clear();
    const int n_sub = dims == 1 ? subdivisions : subdivisions * subdivisions;
    for (int s = 0; s < n_sub; ++s) {
      const int s0 = s % subdivisions;
      const int s1 = s / subdivisions;
      for (std::size_t d = 0; d < dims; ++d) {
        const int sd = d == 0 ? s0 : s1;
        const double cell_lo = grid.lower[d] + static_cast<double>(idx[d] * subdivisions) * width[d];
        point[static_cast<Eigen::Index>(d)] = cell_lo + (sd + 0.5) * width[d];
      }
      sub.push_back(target.log_density(point) + log_vol);
    }
    out.log_mass_[cell] = log_sum_exp(sub);
  }
  const double total = log_sum_exp(out.log_mass_);
  for (double& v : out.log_mass_) v -= total;
  return out;
}

GridDensity GridDensity::from_samples(std::span<const ParamVector> samples, const GridSpec& grid) {
  grid.validate();
  if (samples.empty()) throw std::invalid_argument("histogram: no samples");
  std::vector<double> counts(grid.n_cells(), 0.0);
  double outside = 0.0;
  for (const auto& x : samples) {
    require_same_dim(x.size(), static_cast<Eigen::Index>(grid.dims()), "histogram");
    const std::size_t c = cell_of(grid, x);
    if (c == std::numeric_limits<std::size_t>::max()) {
      outside += 1.0;
    } else {
      counts[c] += 1.0;
    }
  }
  const auto n = static_cast<double>(samples.size());
  GridDensity out;
  out.grid_ = grid;
  out.log_mass_.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) out.log_mass_[i] = std::log(counts[i] / n);
  out.outside_mass_ = outside / n;
  out.sample_count_ = samples.size();
  return out;
}

GridDensity GridDensity::from_weights(const GridSpec& grid, std::vector<double> weights) {
  grid.validate();
  if (weights.size() != grid.n_cells()) throw std::invalid_argument("grid: weight count mismatch");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("grid: weights must be non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("grid: weights sum to zero");
  GridDensity out;
  out.grid_ = grid;
  out.log_mass_.resize(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) out.log_mass_[i] = std::log(weights[i] / total);
  return out;
}

std::vector<double> GridDensity::mass() const {
  std::vector<double> m(log_mass_.size());
  std::transform(log_mass_.begin(), log_mass_.end(), m.begin(), [](double v) { return std::exp(v); });
  return m;
}

double tv_distance(const GridDensity& a, const GridDensity& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("tv_distance: grid mismatch");
  const auto ma = a.mass();
  const auto mb = b.mass();
  double sum = std::abs(a.outside_mass() - b.outside_mass());
  for (std::size_t i = 0; i < ma.size(); ++i) sum += std::abs(ma[i] - mb[i]);
  return std::min(1.0, 0.5 * sum);
}

double tv_distance_to_target(std::span<const ParamVector> samples, const GridDensity& target) {
  if (samples.size() < 1000) throw std::invalid_argument("tv_distance: need at least 1000 samples");
  return tv_distance(GridDensity::from_samples(samples, target.grid()), target);
}

// ---------------------------------------------------------------------------
// Moments

SeriesSummary summarize_series(std::span<const double> values, int n_batches) {
  if (n_batches < 2) throw std::invalid_argument("summarize_series: need >= 2 batches");
  const std::size_t batch = values.size() / static_cast<std::size_t>(n_batches);
  if (batch < 1) throw std::invalid_argument("summarize_series: series shorter than batch count");
  SeriesSummary s;
  const std::size_t used = batch * static_cast<std::size_t>(n_batches);
  const auto tail = values.subspan(values.size() - used);
  s.mean = std::accumulate(tail.begin(), tail.end(), 0.0) / static_cast<double>(used);
  double sq = 0.0;
  for (double v : tail) sq += (v - s.mean) * (v - s.mean);
  s.variance = sq / static_cast<double>(used);

  std::vector<double> bm(static_cast<std::size_t>(n_batches));
  std::vector<double> bv(static_cast<std::size_t>(n_batches));
  for (std::size_t b = 0; b < bm.size(); ++b) {
    double m = 0.0;
    double v = 0.0;
    for (std::size_t i = 0; i < batch; ++i) {
      const double x = tail[b * batch + i];
      m += x;
      v += (x - s.mean) * (x - s.mean);
    }
    bm[b] = m / static_cast<double>(batch);
    bv[b] = v / static_cast<double>(batch);
  }
  auto se = [&](const std::vector<double>& xs, double centre) {
    double acc = 0.0;
    for (double x : xs) acc += (x - centre) * (x - centre);
    const auto nb = static_cast<double>(xs.size());
    return std::sqrt(acc / (nb - 1.0) / nb);
  };
  s.se_mean = se(bm, s.mean);
  s.se_variance = se(bv, s.variance);
  return s;
}

double truncated_gaussian_variance(double lambda, double half_width) {
  if (!(lambda > 0.0) || !(half_width > 0.0)) {
    throw std::invalid_argument("truncated_gaussian_variance: lambda and R must be positive");
  }
  const auto density = [lambda](double x) { return std::exp(-0.5 * lambda * x * x); };
  const auto second = [lambda](double x) { return x * x * std::exp(-0.5 * lambda * x * x); };
  // Symmetric, so integrate [0, R]. Panels of at most one standard deviation;
  // a single wide panel samples only the flat tails and converges to zero.
  const double sd = 1.0 / std::sqrt(lambda);
  const double upper = std::min(half_width, 40.0 * sd);
  const int panels = std::max(1, static_cast<int>(std::ceil(upper / sd)));
  const double h = upper / panels;
  double z = 0.0, m2 = 0.0;
  for (int i = 0; i < panels; ++i) {
    z += integrate(density, i * h, (i + 1) * h, 1e-15);
    m2 += integrate(second, i * h, (i + 1) * h, 1e-15);
  }
  return m2 / z;
}

double spearman_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("spearman: need two equally long series of length >= 2");
  }
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// ---------------------------------------------------------------------------
// Detailed balance

DetailedBalanceReport check_detailed_balance(const GibbsTarget& target, const AdamParams& ap,
                                             const ProposalParams& pp, const CorrectionParams& cp,
                                             int n_trials, RngState& rng,
                                             const AcceptanceFunction& acceptance) {
  if (n_trials < 1) throw std::invalid_argument("check_detailed_balance: n_trials must be >= 1");
  // f is defined through s_l^2, which needs positive rho even in unit mode.
  if (!(cp.rho1 > 0.0 && cp.rho2 > 0.0)) {
    throw std::invalid_argument("check_detailed_balance: rho1 and rho2 must be positive");
  }
  const Eigen::Index p = target.dim();
  DetailedBalanceReport report;
  report.violations.reserve(static_cast<std::size_t>(n_trials));
  for (int t = 0; t < n_trials; ++t) {
    const ParamVector theta = rng.normal_vector(p);
    const ParamVector tau = rng.normal_vector(p);
    Momenta m{rng.normal_vector(p), rng.normal_vector(p).cwiseAbs()};
    const auto k = static_cast<std::int64_t>(rng.uniform_open_closed() * 50.0);
    const ParamVector u = adam_update_vector(m, k, ap);

    const auto at_theta = target.oracle->value_and_grad(theta);
    const auto at_tau = target.oracle->value_and_grad(tau);
    const MoveTerms forward{theta, at_theta.loss, at_theta.grad, tau, at_tau.loss, at_tau.grad, m, u};
    const MoveTerms backward{tau, at_tau.loss, at_tau.grad, theta, at_theta.loss, at_theta.grad, m, u};

    const double lhs = acceptance(forward, target, pp, cp, ap) +
                       dense_log_normal(theta - u, tau, pp.sigma, pp.sigma_dir, u) +
                       log_invariant_density(target, theta, m, cp, ap);
    const double rhs = acceptance(backward, target, pp, cp, ap) +
                       dense_log_normal(tau - u, theta, pp.sigma, pp.sigma_dir, u) +
                       log_invariant_density(target, tau, m, cp, ap);
    double violation = 0.0;
    if (lhs == kNegInf && rhs == kNegInf) {
      violation = 0.0;
    } else {
      violation = std::abs(std::expm1(lhs - rhs));
      if (std::isnan(violation)) violation = std::numeric_limits<double>::infinity();
    }
    report.violations.push_back(violation);
    report.max_violation = std::max(report.max_violation, violation);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Scans

std::vector<ScanRow> scan_acceptance(const RunConfig& base, const std::string& param,
                                     const std::vector<double>& grid, int replicates, int jobs) {
  if (grid.empty()) throw ConfigError("grid", "must not be empty");
  if (!is_scan_param(param)) {
    throw ConfigError(param, "unknown scan parameter (expected sigma, sigma_dir, beta, lambda)");
  }
  if (replicates < 1) throw ConfigError("replicates", "must be >= 1");
  struct Task {
    double value;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (double v : grid) {
    for (int r = 0; r < replicates; ++r) tasks.push_back({v, base.seed + static_cast<std::uint64_t>(r)});
  }
  // Validate every grid point up front so workers only see runnable configs.
  std::vector<RunConfig> configs;
  configs.reserve(tasks.size());
  for (const auto& t : tasks) {
    RunConfig c = base;
    set_scan_param(c, param, t.value);
    c.seed = t.seed;
    c.validate();
    configs.push_back(std::move(c));
  }

  std::vector<ScanRow> rows(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        const Experiment exp = build_experiment(configs[i]);
        const RunResult res = run_experiment(exp);
        rows[i] = {param, tasks[i].value, tasks[i].seed, res.metrics.acceptance_rate,
                   scan_metric(exp, res)};
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  return rows;
}

std::vector<double> mean_acceptance_by_value(const std::vector<ScanRow>& rows,
                                             const std::vector<double>& grid) {
  std::vector<double> out;
  for (double v : grid) {
    double acc = 0.0;
    int n = 0;
    for (const auto& r : rows) {
      if (r.value == v) {
        acc += r.mean_acceptance;
        ++n;
      }
    }
    out.push_back(n ? acc / n : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

void write_scan_csv(std::ostream& out, const std::vector<ScanRow>& rows) {
  out << "param,value,seed,mean_acceptance,metric\n";
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : rows) {
    out << r.param << ',' << r.value << ',' << r.seed << ',' << r.mean_acceptance << ',' << r.metric
        << '\n';
  }
  out.precision(old);
}

void write_scan_long_csv(std::ostream& out, const std::vector<ScanRow>& rows) {
  out << "param,value,seed,quantity,y\n";
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : rows) {
    out << r.param << ',' << r.value << ',' << r.seed << ",mean_acceptance," << r.mean_acceptance
        << '\n';
    out << r.param << ',' << r.value << ',' << r.seed << ",metric," << r.metric << '\n';
  }
  out.precision(old);
}

// ---------------------------------------------------------------------------
// Full versus stochastic M-H

namespace {

ChainStats stats_after(const ChainRecord& record, const std::vector<double>& loss,
                       std::int64_t burn_in) {
  ChainStats s;
  s.mean_acceptance = record.acceptance_rate();
  const auto start = static_cast<std::size_t>(std::min<std::int64_t>(burn_in, static_cast<std::int64_t>(loss.size())));
  const std::size_t n = loss.size() - start;
  if (n == 0) return s;
  double sum = 0.0;
  for (std::size_t i = start; i < loss.size(); ++i) sum += loss[i];
  s.loss_mean = sum / static_cast<double>(n);
  double sq = 0.0;
  for (std::size_t i = start; i < loss.size(); ++i) sq += (loss[i] - s.loss_mean) * (loss[i] - s.loss_mean);
  s.loss_var = sq / static_cast<double>(n);
  return s;
}

}  // namespace

MhComparison compare_full_vs_stochastic_mh(const RunConfig& config, std::int64_t steps,
                                           std::int64_t burn_in) {
  if (config.batch_size <= 0) throw ConfigError("batch_size", "must be positive for a comparison");
  if (steps < 1) throw ConfigError("steps", "must be >= 1");
  RunConfig base = config;
  base.sampler = "adammcmc";
  base.steps = steps;
  base.burn_in = steps - 1;
  base.gap = 1;
  base.n_samples = 1;

  MhComparison out;
  for (const bool stochastic : {true, false}) {
    RunConfig c = base;
    c.stochastic_mh = stochastic;
    const Experiment exp = build_experiment(c);
    ChainState state = make_chain_state(*exp.target.oracle, exp.theta0, c.seed);
    std::vector<double> full_loss;
    full_loss.reserve(static_cast<std::size_t>(steps));
    double current = state.cached_loss;
    const auto observer = [&](std::int64_t, const ChainState& s, const StepResult& r) {
      if (r.accepted) current = stochastic ? exp.target.oracle->eval(s.theta) : s.cached_loss;
      full_loss.push_back(current);
    };
    auto res = run_chain(make_step_function(exp), std::move(state), exp.schedule(), observer);
    if (stochastic) {
      out.stochastic = std::move(res.record);
      out.stochastic_full_loss = std::move(full_loss);
      out.stochastic_stats = stats_after(out.stochastic, out.stochastic_full_loss, burn_in);
    } else {
      out.full = std::move(res.record);
      out.full_full_loss = std::move(full_loss);
      out.full_stats = stats_after(out.full, out.full_full_loss, burn_in);
    }
  }
  return out;
}

}  // namespace adammcmc
