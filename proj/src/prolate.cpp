#include "adammcmc/prolate.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace adammcmc {

namespace {

double safe_norm(const ParamVector& v) {
  const double n = v.norm();
  return std::isfinite(n) ? n : v.stableNorm();
}

}  // namespace

ProlateCovariance::ProlateCovariance(double sigma, double sigma_dir, ParamVector direction)
    : sigma_(sigma), sigma_dir_(sigma_dir), direction_(std::move(direction)) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("ProlateCovariance: sigma must be positive and finite");
  }
  if (!(sigma_dir >= 0.0) || !std::isfinite(sigma_dir)) {
    throw std::invalid_argument("ProlateCovariance: sigma_dir must be non-negative and finite");
  }
  sigma2_ = sigma_ * sigma_;
  dir_norm_ = safe_norm(direction_);
  dir_scale_ = sigma_dir_ * dir_norm_;
}

double ProlateCovariance::log_det() const {
  const double iso = 2.0 * static_cast<double>(dim()) * std::log(sigma_);
  if (isotropic()) return iso;
  // log(1 + r^2) with r = sigma_dir |d| / sigma, evaluated from log r so that
  // huge directions do not overflow.
  const double log_r = std::log(sigma_dir_) + std::log(dir_norm_) - std::log(sigma_);
  const double rank1 = log_r > 50.0 ? 2.0 * log_r + std::log1p(std::exp(-2.0 * log_r))
                                    : std::log1p(std::exp(2.0 * log_r));
  return iso + rank1;
}

double ProlateCovariance::inv_quad_form(const ParamVector& x) const {
  require_same_dim(x.size(), dim(), "inv_quad_form");
  if (isotropic()) return x.squaredNorm() / sigma2_;
  // Split x into the component along d and the orthogonal remainder; this is
  // the Sherman-Morrison form without the cancellation of |x|^2 - <d,x>^2 c.
  const ParamVector unit = direction_ / dir_norm_;
  const double along = unit.dot(x);
  const double perp2 = (x - along * unit).squaredNorm();
  return perp2 / sigma2_ + along * along / directional_variance();
}

ParamVector ProlateCovariance::solve(const ParamVector& x) const {
  require_same_dim(x.size(), dim(), "solve");
  if (isotropic()) return x / sigma2_;
  const ParamVector unit = direction_ / dir_norm_;
  const double along = unit.dot(x);
  return (x - along * unit) / sigma2_ + (along / directional_variance()) * unit;
}

ParamVector ProlateCovariance::multiply(const ParamVector& x) const {
  require_same_dim(x.size(), dim(), "multiply");
  return sigma2_ * x + (sigma_dir_ * sigma_dir_ * direction_.dot(x)) * direction_;
}

double ProlateCovariance::log_density(const ParamVector& mean, const ParamVector& x) const {
  require_same_dim(mean.size(), dim(), "log_density");
  require_same_dim(x.size(), dim(), "log_density");
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  return -0.5 * static_cast<double>(dim()) * log_2pi - 0.5 * log_det() -
         0.5 * inv_quad_form(x - mean);
}

ParamVector ProlateCovariance::sample(const ParamVector& mean, const ParamVector& z,
                                      double xi) const {
  require_same_dim(mean.size(), dim(), "sample");
  require_same_dim(z.size(), dim(), "sample");
  ParamVector out = mean + sigma_ * z;
  if (sigma_dir_ != 0.0) out += (sigma_dir_ * xi) * direction_;
  return out;
}

ParamVector ProlateCovariance::sample(const ParamVector& mean, RngState& rng) const {
  const ParamVector z = rng.normal_vector(dim());
  const double xi = sigma_dir_ != 0.0 ? rng.normal() : 0.0;
  return sample(mean, z, xi);
}

}  // namespace adammcmc
