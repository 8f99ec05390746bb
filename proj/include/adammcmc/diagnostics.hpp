#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "adammcmc/chain.hpp"
#include "adammcmc/config.hpp"
#include "adammcmc/loss.hpp"
#include "adammcmc/samplers.hpp"

namespace adammcmc {

/// Rectangular grid over one or two dimensions.
struct GridSpec {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<int> bins;

  std::size_t dims() const { return bins.size(); }
  std::size_t n_cells() const;
  void validate() const;
  bool operator==(const GridSpec&) const = default;
};

/// Normalized cell masses on a grid, stored as logs. Mass that falls outside
/// the grid (empirical histograms only) is kept separately.
class GridDensity {
 public:
  /// Cell masses of exp(-lambda L) over the grid, integrated with a
  /// composite midpoint rule of `subdivisions` points per axis and cell, then
  /// normalized with log-sum-exp.
  static GridDensity from_target(const GibbsTarget& target, const GridSpec& grid,
                                 int subdivisions = 16);

  /// Histogram of samples (each of dimension dims()).
  static GridDensity from_samples(std::span<const ParamVector> samples, const GridSpec& grid);

  /// From explicit non-negative cell weights (normalized here).
  static GridDensity from_weights(const GridSpec& grid, std::vector<double> weights);

  const GridSpec& grid() const { return grid_; }
  const std::vector<double>& log_mass() const { return log_mass_; }
  std::vector<double> mass() const;
  double outside_mass() const { return outside_mass_; }
  std::size_t sample_count() const { return sample_count_; }

 private:
  GridSpec grid_;
  std::vector<double> log_mass_;
  double outside_mass_ = 0.0;
  std::size_t sample_count_ = 0;
};

/// Half the L1 distance between the two cell-mass vectors (plus the outside
/// mass). Throws std::invalid_argument when the grids differ.
double tv_distance(const GridDensity& a, const GridDensity& b);

/// Histograms at least 1000 samples and compares against `target`.
double tv_distance_to_target(std::span<const ParamVector> samples, const GridDensity& target);

/// Mean and variance of a correlated series with batch-means standard errors.
struct SeriesSummary {
  double mean = 0.0;
  double variance = 0.0;
  double se_mean = 0.0;
  double se_variance = 0.0;
};
SeriesSummary summarize_series(std::span<const double> values, int n_batches = 50);

/// Variance of N(0, 1/lambda) truncated to [-R, R], by adaptive Simpson quadrature.
double truncated_gaussian_variance(double lambda, double half_width);

double spearman_correlation(std::span<const double> x, std::span<const double> y);

struct DetailedBalanceReport {
  double max_violation = 0.0;
  std::vector<double> violations;
};

/// Samples random (theta, tau, m) triples and compares
/// alpha(tau|theta,m) q1(tau|theta,m) f(theta,m) against the reverse move,
/// where f is the posterior times the stationary momentum densities. The
/// proposal densities and f are evaluated with a dense covariance,
/// independent of the rank-1 code path used by `acceptance`.
/// The violation per trial is |lhs / rhs - 1|.
DetailedBalanceReport check_detailed_balance(
    const GibbsTarget& target, const AdamParams& ap, const ProposalParams& pp,
    const CorrectionParams& cp, int n_trials, RngState& rng,
    const AcceptanceFunction& acceptance = adammcmc_log_acceptance);

struct ScanRow {
  std::string param;
  double value = 0.0;
  std::uint64_t seed = 0;
  double mean_acceptance = 0.0;
  double metric = 0.0;
};

/// One chain per (grid value, replicate); replicate r uses seed base.seed + r.
/// Rows are ordered by grid value, then replicate.
std::vector<ScanRow> scan_acceptance(const RunConfig& base, const std::string& param,
                                     const std::vector<double>& grid, int replicates = 3,
                                     int jobs = 1);

/// Mean acceptance per grid value, averaged over replicates.
std::vector<double> mean_acceptance_by_value(const std::vector<ScanRow>& rows,
                                             const std::vector<double>& grid);

void write_scan_csv(std::ostream& out, const std::vector<ScanRow>& rows);
/// Long format: param,value,seed,quantity,y.
void write_scan_long_csv(std::ostream& out, const std::vector<ScanRow>& rows);

struct ChainStats {
  double mean_acceptance = 0.0;
  double loss_mean = 0.0;
  double loss_var = 0.0;
};

struct MhComparison {
  ChainRecord stochastic;
  ChainRecord full;
  std::vector<double> stochastic_full_loss;  ///< full-data loss per step
  std::vector<double> full_full_loss;
  ChainStats stochastic_stats;  ///< loss statistics over steps after `burn_in`
  ChainStats full_stats;
};

/// Two AdamMCMC chains from the same start and seeds, both driven by batch
/// gradients; one evaluates the M-H losses on the batch, the other on all data.
/// `config.batch_size` must be positive.
MhComparison compare_full_vs_stochastic_mh(const RunConfig& config, std::int64_t steps,
                                           std::int64_t burn_in);

}  // namespace adammcmc
