#include "adammcmc/chain.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace adammcmc {

void ChainSchedule::validate() const {
  if (total_steps < 1) throw std::invalid_argument("schedule: total_steps must be >= 1");
  if (burn_in < 0) throw std::invalid_argument("schedule: burn_in must be >= 0");
  if (gap < 1) throw std::invalid_argument("schedule: gap must be >= 1");
  if (n_samples < 1) throw std::invalid_argument("schedule: n_samples must be >= 1");
  if (burn_in + n_samples * gap > total_steps) {
    throw std::out_of_range("schedule: burn_in + n_samples * gap = " +
                            std::to_string(burn_in + n_samples * gap) + " exceeds total_steps = " +
                            std::to_string(total_steps));
  }
}

std::vector<std::int64_t> ChainSchedule::sample_steps() const {
  validate();
  std::vector<std::int64_t> steps;
  steps.reserve(static_cast<std::size_t>(n_samples));
  for (std::int64_t i = 1; i <= n_samples; ++i) steps.push_back(burn_in + i * gap);
  return steps;
}

double ChainRecord::acceptance_rate() const {
  if (rows.empty()) return 0.0;
  const auto hits = std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.accepted; });
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

std::size_t ChainRecord::count(RejectReason reason) const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [&](const auto& r) { return r.reason == reason; }));
}

void ChainRecord::write_csv(std::ostream& out) const {
  out << "step,loss,log_alpha,accepted,theta_norm,u_norm\n";
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : rows) {
    out << r.step << ',' << r.loss << ',' << r.log_alpha << ',' << (r.accepted ? 1 : 0) << ','
        << r.theta_norm << ',' << r.u_norm << '\n';
  }
  out.precision(old_precision);
}

ChainOutput run_chain(const StepFunction& step, ChainState state, const ChainSchedule& schedule,
                      const StepObserver& observer) {
  const auto sample_at = schedule.sample_steps();
  ChainOutput out;
  out.samples.reserve(sample_at.size());
  out.record.rows.reserve(static_cast<std::size_t>(schedule.total_steps));
  auto next_sample = sample_at.begin();
  for (std::int64_t k = 1; k <= schedule.total_steps; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    const StepResult r = step(state);
    const auto t1 = std::chrono::steady_clock::now();
    ChainRecordRow row;
    row.step = k;
    row.loss = r.loss;
    row.log_alpha = r.log_alpha;
    row.accepted = r.accepted;
    row.theta_norm = state.theta.norm();
    row.u_norm = r.u_norm;
    row.reason = r.reason;
    row.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    out.record.rows.push_back(row);
    if (observer) observer(k, state, r);
    if (next_sample != sample_at.end() && *next_sample == k) {
      out.samples.push_back(state.theta);
      ++next_sample;
    }
  }
  out.final_state = std::move(state);
  return out;
}

double quantile_linear(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty set");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile_linear(std::move(values), 0.5); }

EnsemblePrediction ensemble_predict(std::span<const ParamVector> samples, const MicroMlp& net,
                                    const Eigen::MatrixX2d& inputs) {
  if (samples.empty()) throw std::invalid_argument("ensemble_predict: no samples");
  const Eigen::Index n = inputs.rows();
  Eigen::MatrixXd class1(n, static_cast<Eigen::Index>(samples.size()));
  for (std::size_t s = 0; s < samples.size(); ++s) {
    class1.col(static_cast<Eigen::Index>(s)) = net.forward(samples[s], inputs).col(1);
  }
  EnsemblePrediction out;
  out.mean = class1.rowwise().mean();
  out.spread = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
  out.spread_defined = samples.size() >= 2;
  if (out.spread_defined) {
    for (Eigen::Index i = 0; i < n; ++i) {
      std::vector<double> v(samples.size());
      for (std::size_t s = 0; s < samples.size(); ++s) v[s] = class1(i, static_cast<Eigen::Index>(s));
      out.spread[i] = quantile_linear(v, 0.75) - quantile_linear(v, 0.25);
    }
  }
  return out;
}

Eigen::MatrixXd ensemble_mean_probs(std::span<const ParamVector> samples, const MicroMlp& net,
                                    const Eigen::MatrixX2d& inputs) {
  if (samples.empty()) throw std::invalid_argument("ensemble_mean_probs: no samples");
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(inputs.rows(), net.n_classes());
  for (const auto& s : samples) acc += net.forward(s, inputs);
  return acc / static_cast<double>(samples.size());
}

void write_samples_csv(std::ostream& out, std::span<const ParamVector> samples) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& s : samples) {
    for (Eigen::Index i = 0; i < s.size(); ++i) out << (i ? "," : "") << s[i];
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace adammcmc
