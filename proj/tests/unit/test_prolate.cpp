#include <cmath>
#include <limits>

#include <gtest/gtest.h>
#include <Eigen/Dense>

#include "adammcmc/prolate.hpp"

using namespace adammcmc;

namespace {

Eigen::MatrixXd dense(double sigma, double sigma_dir, const ParamVector& d) {
  return sigma * sigma * Eigen::MatrixXd::Identity(d.size(), d.size()) +
         sigma_dir * sigma_dir * d * d.transpose();
}

ParamVector vec(std::initializer_list<double> v) {
  ParamVector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) x[i++] = a;
  return x;
}

}  // namespace

TEST(ProlateLogDet, IdentityIsZero) {
  const ProlateCovariance cov(1.0, 0.0, vec({0.3, -2.0, 5.0}));
  EXPECT_DOUBLE_EQ(cov.log_det(), 0.0);
}

TEST(ProlateLogDet, RankOneAlongAxis) {
  // dense LU determinant of diag(0.25 + 4, 0.25, 0.25), taken offline
  const ProlateCovariance cov(0.5, 2.0, vec({1.0, 0.0, 0.0}));
  EXPECT_NEAR(cov.log_det(), -1.3256697393034558, 1e-14);
}

TEST(ProlateLogDet, ZeroDirection) {
  const ProlateCovariance cov(1.0, 3.0, ParamVector::Zero(10));
  EXPECT_DOUBLE_EQ(cov.log_det(), 0.0);
}

TEST(ProlateInvQuad, IsotropicReduction) {
  const ParamVector x = vec({1.0, -2.0, 0.5});
  const ProlateCovariance cov(0.7, 0.0, vec({3.0, 1.0, 1.0}));
  EXPECT_NEAR(cov.inv_quad_form(x), x.squaredNorm() / 0.49, 1e-14);
}

TEST(ProlateInvQuad, UnitExample) {
  // Sigma = diag(2, 1), x = e1: 1/2
  const ProlateCovariance cov(1.0, 1.0, vec({1.0, 0.0}));
  EXPECT_NEAR(cov.inv_quad_form(vec({1.0, 0.0})), 0.5, 1e-15);
}

TEST(ProlateDensity, StandardNormal) {
  const ProlateCovariance cov(1.0, 0.0, ParamVector::Zero(1));
  EXPECT_NEAR(cov.log_density(ParamVector::Zero(1), vec({1.0})),
              -0.5 * std::log(2.0 * M_PI) - 0.5, 1e-15);
}

TEST(ProlateDensity, MatchesDenseGaussian) {
  // numpy dense slogdet / solve, frozen
  const ProlateCovariance cov(0.7, 1.3, vec({1.0, 1.0}));
  EXPECT_NEAR(cov.log_density(vec({0.1, 0.2}), vec({0.3, -0.8})), -2.9338669227931247, 1e-13);
}

TEST(ProlateSample, DegenerateNoiseReturnsMean) {
  const ProlateCovariance cov(0.3, 2.0, vec({1.0, 2.0}));
  const ParamVector mean = vec({4.0, -1.0});
  EXPECT_EQ(cov.sample(mean, ParamVector::Zero(2), 0.0), mean);
}

TEST(ProlateSample, RankOneConstruction) {
  const ProlateCovariance cov(0.3, 2.0, vec({1.0, 2.0}));
  const ParamVector got = cov.sample(vec({0.0, 0.0}), vec({1.0, -1.0}), 0.5);
  EXPECT_NEAR(got[0], 0.3 + 1.0, 1e-15);
  EXPECT_NEAR(got[1], -0.3 + 2.0, 1e-15);
}

TEST(ProlateSample, IsotropicDrawsNoXi) {
  // With sigma_dir = 0 only P normals are consumed.
  const ProlateCovariance cov(1.0, 0.0, vec({1.0, 1.0}));
  RngState a(3), b(3);
  cov.sample(ParamVector::Zero(2), a);
  b.normal_vector(2);
  EXPECT_EQ(a.normal(), b.normal());
}

TEST(ProlateProperty, MatchesDenseOracle) {
  RngState rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = static_cast<Eigen::Index>(1 + trial % 64);
    const double sigma = 0.1 + 4.9 * rng.uniform_open_closed();
    const double sigma_dir = 10.0 * (1.0 - rng.uniform_open_closed());
    const ParamVector d = rng.normal_vector(p);
    const ParamVector x = rng.normal_vector(p);
    const ProlateCovariance cov(sigma, sigma_dir, d);
    const Eigen::MatrixXd s = dense(sigma, sigma_dir, d);
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(s);
    const double det = s.determinant();
    EXPECT_NEAR(std::exp(cov.log_det()) / det, 1.0, 1e-10) << "P=" << p;
    const double quad = x.dot(ldlt.solve(x));
    EXPECT_NEAR(cov.inv_quad_form(x) / quad, 1.0, 1e-8) << "P=" << p;
    EXPECT_LT((cov.solve(x) - ldlt.solve(x)).norm(), 1e-8 * ldlt.solve(x).norm() + 1e-12);
    EXPECT_LT((cov.multiply(x) - s * x).norm(), 1e-12 * (s * x).norm() + 1e-12);
  }
}

TEST(ProlateProperty, HugeDirectionStaysFinite) {
  ParamVector d = ParamVector::Constant(4, 1e200);
  const ProlateCovariance cov(1e-3, 1e3, d);
  EXPECT_TRUE(std::isfinite(cov.log_det()));
  EXPECT_TRUE(std::isfinite(cov.inv_quad_form(ParamVector::Ones(4))));
}

TEST(ProlateSample, EmpiricalDirectionalVariance) {
  RngState rng(5);
  const ParamVector d = vec({0.5, -1.0, 2.0});
  const ProlateCovariance cov(0.7, 1.3, d);
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = cov.sample(ParamVector::Zero(3), rng).dot(d);
    sum += v;
    sq += v * v;
  }
  const double var = sq / n - (sum / n) * (sum / n);
  const double truth = 0.49 * d.squaredNorm() + 1.69 * std::pow(d.squaredNorm(), 2);
  EXPECT_NEAR(var, truth, 3.0 * truth * std::sqrt(2.0 / n));
}

TEST(ProlateValidation, RejectsBadWidths) {
  EXPECT_THROW(ProlateCovariance(0.0, 1.0, ParamVector::Ones(2)), std::invalid_argument);
  EXPECT_THROW(ProlateCovariance(1.0, -1.0, ParamVector::Ones(2)), std::invalid_argument);
}
