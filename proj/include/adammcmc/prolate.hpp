#pragma once

#include "adammcmc/types.hpp"

namespace adammcmc {

/// Gaussian covariance sigma^2 I + sigma_dir^2 d d^T, stored implicitly.
///
/// Every operation costs O(P). The matrix is never materialized: the
/// determinant follows from the matrix determinant lemma and the inverse from
/// the Sherman-Morrison formula, both of which reduce to dot products with
/// the direction d.
class ProlateCovariance {
 public:
  ProlateCovariance(double sigma, double sigma_dir, ParamVector direction);

  double sigma() const { return sigma_; }
  double sigma_dir() const { return sigma_dir_; }
  const ParamVector& direction() const { return direction_; }
  Eigen::Index dim() const { return direction_.size(); }

  /// Variance along the unit direction d/|d|: sigma^2 + sigma_dir^2 |d|^2.
  double directional_variance() const { return sigma2_ + dir_scale_ * dir_scale_; }

  /// log det = 2P log sigma + log(1 + sigma_dir^2 |d|^2 / sigma^2).
  double log_det() const;

  /// x^T Sigma^{-1} x.
  double inv_quad_form(const ParamVector& x) const;

  /// Sigma^{-1} x.
  ParamVector solve(const ParamVector& x) const;

  /// Sigma x.
  ParamVector multiply(const ParamVector& x) const;

  /// Log of the N(mean, Sigma) density at x.
  double log_density(const ParamVector& mean, const ParamVector& x) const;

  /// mean + sigma z + sigma_dir xi d for given standard-normal draws.
  ParamVector sample(const ParamVector& mean, const ParamVector& z, double xi) const;

  /// Draws z (P normals), then xi unless sigma_dir == 0.
  ParamVector sample(const ParamVector& mean, RngState& rng) const;

  /// True when the rank-1 term vanishes and the covariance is sigma^2 I.
  bool isotropic() const { return dir_scale_ == 0.0; }

 private:
  double sigma_;
  double sigma_dir_;
  ParamVector direction_;
  double sigma2_;
  double dir_norm_;   // |d|
  double dir_scale_;  // sigma_dir * |d|
};

}  // namespace adammcmc
