#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace adammcmc {

/// Bad or inconsistent configuration. `field()` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Flat experiment configuration. Every field has a default; the JSON form
/// uses the member names as keys.
struct RunConfig {
  // target
  std::string target = "mlp";  ///< quadratic | banana | linear | mlp
  int dim = 2;                 ///< analytic targets only
  double banana_curvature = 5.0;
  double linear_slope = 0.5;
  std::string dataset;  ///< CSV path; empty generates the two-moons set
  int n_train = 2000;
  int n_test = 2000;
  double data_noise = 0.2;
  std::uint64_t data_seed = 7;
  std::vector<int> hidden = {16, 16};
  double weight_scale = 1.0;  ///< mlp computes with weight_scale * theta
  double init_offset = 0.0;  ///< analytic targets start at init_offset * ones

  // sampler
  std::string sampler = "adammcmc";  ///< mala | adammcmc | adam | sgd | sghmc
  double lambda = 1.0;
  double gamma = 1e-3;
  double sigma = 2.0;
  std::optional<double> sigma_dir;  ///< unset means P / 100
  double beta1 = 0.99;
  double beta2 = 0.99;
  double delta = 1e-8;
  std::string drift = "adam";  ///< adam | gradient
  double prior_half_width = 100.0;
  std::string correction = "unit";  ///< unit | full
  double s2 = 1e-4;
  std::optional<double> rho1;  ///< unset means sqrt((1 - beta1^2) s2)
  std::optional<double> rho2;
  double sghmc_friction = 0.05;
  double sghmc_noise = 1.0;

  // data access
  int batch_size = 0;          ///< 0 evaluates the full data every step
  bool stochastic_mh = true;   ///< with batches: M-H losses on the batch too

  // schedule
  std::int64_t steps = 20000;
  std::int64_t burn_in = 10000;
  std::int64_t gap = 1000;
  std::int64_t n_samples = 10;

  std::uint64_t seed = 0;
  std::string out_dir = "runs/default";

  /// Throws ConfigError naming the first invalid field.
  void validate() const;

  std::string to_json() const;
  /// Unknown keys and ill-typed values raise ConfigError.
  static RunConfig from_json(const std::string& text);
  static RunConfig load(const std::string& path);

  /// FNV-1a over the canonical JSON without `out_dir`.
  std::string hash() const;
};

/// Sets a scannable hyperparameter: sigma, sigma_dir, beta (both betas), lambda.
void set_scan_param(RunConfig& config, const std::string& name, double value);
bool is_scan_param(const std::string& name);

}  // namespace adammcmc
