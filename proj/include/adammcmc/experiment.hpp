#pragma once

#include <filesystem>
#include <memory>
#include <optional>

#include <Eigen/Core>

#include "adammcmc/chain.hpp"
#include "adammcmc/config.hpp"
#include "adammcmc/loss.hpp"
#include "adammcmc/samplers.hpp"

namespace adammcmc {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kArtifactSchemaVersion = 1;

/// A RunConfig resolved into concrete objects.
struct Experiment {
  RunConfig config;
  GibbsTarget target;
  std::shared_ptr<const MicroMlp> mlp;  ///< set for the mlp target
  Dataset test;
  Eigen::MatrixX2d ood;
  ParamVector theta0;
  AdamMcmcParams mcmc;
  SghmcParams sghmc;

  ChainSchedule schedule() const;
};

/// Throws ConfigError for invalid configurations.
Experiment build_experiment(const RunConfig& config);

/// Step function for the configured sampler. With batch_size > 0 the
/// function owns a batch stream seeded from the run seed.
StepFunction make_step_function(const Experiment& exp);

struct RunMetrics {
  double acceptance_rate = 0.0;
  std::size_t boundary_rejects = 0;
  std::size_t nonfinite_rejects = 0;
  Eigen::VectorXd post_mean;  ///< trajectory mean after burn-in
  Eigen::VectorXd post_var;   ///< trajectory variance after burn-in
  double post_loss_mean = 0.0;
  std::optional<double> test_accuracy;  ///< accuracy of the ensemble mean prediction
  std::optional<double> median_spread_test;
  std::optional<double> median_spread_ood;
};

struct RunResult {
  ChainOutput chain;
  RunMetrics metrics;
  std::optional<EnsemblePrediction> test_prediction;
  std::optional<EnsemblePrediction> ood_prediction;
};

RunResult run_experiment(const Experiment& exp);

/// Scalar used by scans: test accuracy for the mlp, the worst moment error
/// against N(0, 1/lambda) for the quadratic, and the mean post-burn-in loss
/// otherwise.
double scan_metric(const Experiment& exp, const RunResult& result);

/// Writes config.json, chain_record.csv, samples.csv, samples.json,
/// ensemble_summary.json and manifest.json into `dir`.
void write_run_artifacts(const std::filesystem::path& dir, const Experiment& exp,
                         const RunResult& result);

}  // namespace adammcmc
