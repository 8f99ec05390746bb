#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "adammcmc/loss.hpp"
#include "adammcmc/samplers.hpp"
#include "adammcmc/types.hpp"

namespace adammcmc {

/// Burn-in b, gap c and sample count N. Samples are the states after steps
/// b + c, b + 2c, ..., b + Nc.
struct ChainSchedule {
  std::int64_t total_steps = 20000;
  std::int64_t burn_in = 10000;
  std::int64_t gap = 1000;
  std::int64_t n_samples = 10;

  /// Throws std::out_of_range when b + N c exceeds the step budget and
  /// std::invalid_argument for non-positive gap or sample count.
  void validate() const;
  std::vector<std::int64_t> sample_steps() const;
};

struct ChainRecordRow {
  std::int64_t step = 0;
  double loss = 0.0;
  double log_alpha = 0.0;
  bool accepted = false;
  double theta_norm = 0.0;
  double u_norm = 0.0;
  RejectReason reason = RejectReason::None;
  double wall_seconds = 0.0;
};

struct ChainRecord {
  std::vector<ChainRecordRow> rows;

  double acceptance_rate() const;
  std::size_t count(RejectReason reason) const;

  /// Columns: step,loss,log_alpha,accepted,theta_norm,u_norm. Wall time is
  /// kept in memory only so the file is reproducible byte for byte.
  void write_csv(std::ostream& out) const;
};

using StepFunction = std::function<StepResult(ChainState&)>;

/// Called after every step with the 1-based step index and post-step state.
using StepObserver = std::function<void(std::int64_t, const ChainState&, const StepResult&)>;

struct ChainOutput {
  std::vector<ParamVector> samples;
  ChainRecord record;
  ChainState final_state;
};

ChainOutput run_chain(const StepFunction& step, ChainState state, const ChainSchedule& schedule,
                      const StepObserver& observer = {});

/// Linear interpolation between order statistics (numpy's default).
double quantile_linear(std::vector<double> values, double q);

struct EnsemblePrediction {
  Eigen::VectorXd mean;    ///< mean class-1 probability per input
  Eigen::VectorXd spread;  ///< q75 - q25 of the class-1 probability per input
  bool spread_defined = true;
};

/// Per-input mean and interquartile spread of the class-1 probability over
/// the sample ensemble. With fewer than two samples the spread is flagged
/// undefined and left as NaN.
EnsemblePrediction ensemble_predict(std::span<const ParamVector> samples, const MicroMlp& net,
                                    const Eigen::MatrixX2d& inputs);

/// Mean class-probability matrix of the ensemble (rows are inputs).
Eigen::MatrixXd ensemble_mean_probs(std::span<const ParamVector> samples, const MicroMlp& net,
                                    const Eigen::MatrixX2d& inputs);

struct EnsembleSummary {
  std::vector<ParamVector> samples;
  EnsemblePrediction prediction;
};

/// Samples as CSV: one row of P values per sample, no header.
void write_samples_csv(std::ostream& out, std::span<const ParamVector> samples);

double median(std::vector<double> values);

}  // namespace adammcmc
