#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "adammcmc/loss.hpp"

using namespace adammcmc;

namespace {

// Central differences with step 1e-4 (1 + |theta_i|).
ParamVector fd_grad(const LossOracle& f, const ParamVector& theta) {
  ParamVector g(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double h = 1e-4 * (1.0 + std::abs(theta[i]));
    ParamVector a = theta, b = theta;
    a[i] += h;
    b[i] -= h;
    g[i] = (f.eval(a) - f.eval(b)) / (2.0 * h);
  }
  return g;
}

void expect_fd_agreement(const LossOracle& f, RngState& rng, double scale) {
  for (int trial = 0; trial < 10; ++trial) {
    const ParamVector theta = scale * rng.normal_vector(f.dim());
    const ParamVector g = f.grad(theta);
    const ParamVector fd = fd_grad(f, theta);
    EXPECT_LE((g - fd).norm(), 1e-5 * std::max(1.0, fd.norm())) << "trial " << trial;
  }
}

MicroMlp small_net(double scale = 1.0) {
  return MicroMlp({2, 5, 4, 2}, make_two_moons(60, 0.2, 3), scale);
}

}  // namespace

TEST(Quadratic, LossAndGradient) {
  const QuadraticLoss f(3);
  ParamVector theta(3);
  theta << 1.0, -2.0, 0.5;
  const auto lg = f.value_and_grad(theta);
  EXPECT_DOUBLE_EQ(lg.loss, 0.5 * (1.0 + 4.0 + 0.25));
  EXPECT_EQ(lg.grad, theta);
}

TEST(Quadratic, TargetScalesWithLambda) {
  const GibbsTarget t = quadratic_target(2, 4.0, 10.0);
  ParamVector theta(2);
  theta << 0.5, 0.5;
  // exp(-4 |theta|^2 / 2) is N(0, 0.25 I), std 0.5 per coordinate
  EXPECT_DOUBLE_EQ(t.log_density(theta), -4.0 * 0.25);
}

TEST(GibbsTarget, OutsideBoxIsMinusInfinity) {
  const GibbsTarget t = quadratic_target(2, 1.0, 1.0);
  ParamVector in(2), out(2), edge(2);
  in << 0.5, -0.5;
  out << 0.5, 1.0000001;
  edge << 1.0, -1.0;
  EXPECT_TRUE(std::isfinite(t.log_density(in)));
  EXPECT_EQ(t.log_density(out), -std::numeric_limits<double>::infinity());
  EXPECT_TRUE(t.prior.contains(edge));
  EXPECT_FALSE(t.prior.contains(out));
}

TEST(GradientCheck, Quadratic) {
  RngState rng(1);
  expect_fd_agreement(QuadraticLoss(5), rng, 2.0);
}

TEST(GradientCheck, Banana) {
  RngState rng(2);
  expect_fd_agreement(BananaLoss(5, 5.0), rng, 1.0);
}

TEST(GradientCheck, Linear) {
  RngState rng(3);
  ParamVector a(3);
  a << 0.5, -1.0, 2.0;
  expect_fd_agreement(LinearLoss(a), rng, 1.0);
}

TEST(GradientCheck, MicroMlp) {
  RngState rng(4);
  const MicroMlp net = small_net();
  expect_fd_agreement(net, rng, 0.7);
}

TEST(GradientCheck, MicroMlpWithParamScale) {
  RngState rng(5);
  const MicroMlp net = small_net(0.02);
  expect_fd_agreement(net, rng, 30.0);
}

TEST(MicroMlp, ZeroParamsGiveUniformProbabilities) {
  const MicroMlp net = small_net();
  Eigen::MatrixX2d x(3, 2);
  x << 0, 0, 1, -2, 50, 3;
  const Eigen::MatrixXd p = net.forward(ParamVector::Zero(net.dim()), x);
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(p(i, 0), 0.5);
    EXPECT_DOUBLE_EQ(p(i, 1), 0.5);
  }
}

TEST(MicroMlp, RowsAreProbabilityVectors) {
  const MicroMlp net = small_net();
  RngState rng(6);
  const ParamVector theta = 3.0 * rng.normal_vector(net.dim());
  Eigen::MatrixX2d x(100, 2);
  for (Eigen::Index i = 0; i < 100; ++i) x.row(i) << 5.0 * rng.normal(), 5.0 * rng.normal();
  const Eigen::MatrixXd p = net.forward(theta, x);
  for (Eigen::Index i = 0; i < 100; ++i) {
    EXPECT_GE(p.row(i).minCoeff(), 0.0);
    EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-12);
  }
}

TEST(MicroMlp, LossFiniteForExtremeWeights) {
  const MicroMlp net = small_net();
  const ParamVector theta = ParamVector::Constant(net.dim(), 1e3);
  EXPECT_TRUE(std::isfinite(net.eval(theta)));
}

TEST(MicroMlp, ParameterCountAndDefaultLayout) {
  const MicroMlp net({2, 16, 16, 2}, make_two_moons(10, 0.1, 1));
  EXPECT_EQ(net.dim(), 2 * 16 + 16 + 16 * 16 + 16 + 16 * 2 + 2);
}

TEST(MicroMlp, ParamScaleIsAReparameterization) {
  const MicroMlp plain = small_net(1.0);
  const MicroMlp scaled = small_net(0.1);
  RngState rng(7);
  const ParamVector theta = rng.normal_vector(plain.dim());
  const auto a = plain.value_and_grad(theta);
  const auto b = scaled.value_and_grad(10.0 * theta);
  EXPECT_NEAR(a.loss, b.loss, 1e-12);
  EXPECT_LE((0.1 * a.grad - b.grad).norm(), 1e-12 * a.grad.norm());
}

TEST(MicroMlp, DimensionMismatchThrows) {
  const MicroMlp net = small_net();
  EXPECT_THROW(net.eval(ParamVector::Zero(net.dim() + 1)), std::invalid_argument);
}

TEST(MakeBatches, SingleFullBatch) {
  RngState rng(1);
  const auto b = make_batches(10, 10, rng);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b[0].size(), 10u);
}

TEST(MakeBatches, DisjointCoverWithShortLast) {
  RngState rng(2);
  const auto b = make_batches(10, 3, rng);
  ASSERT_EQ(b.size(), 4u);
  std::vector<std::size_t> sizes;
  std::set<std::size_t> all;
  std::size_t total = 0;
  for (const auto& batch : b) {
    sizes.push_back(batch.size());
    total += batch.size();
    all.insert(batch.begin(), batch.end());
    EXPECT_TRUE(std::is_sorted(batch.begin(), batch.end()));
  }
  EXPECT_EQ(sizes, (std::vector<std::size_t>{3, 3, 3, 1}));
  EXPECT_EQ(total, 10u);
  EXPECT_EQ(all.size(), 10u);
  EXPECT_EQ(*all.rbegin(), 9u);
}

TEST(MakeBatches, RejectsBadBatchSize) {
  RngState rng(3);
  EXPECT_THROW(make_batches(10, 0, rng), std::invalid_argument);
  EXPECT_THROW(make_batches(10, 11, rng), std::invalid_argument);
}

TEST(MakeBatches, IteratorReshufflesEachEpoch) {
  BatchIterator it(12, 4, 9);
  std::vector<std::size_t> first, second;
  for (int i = 0; i < 3; ++i) {
    auto b = it.next();
    first.insert(first.end(), b.begin(), b.end());
  }
  for (int i = 0; i < 3; ++i) {
    auto b = it.next();
    second.insert(second.end(), b.begin(), b.end());
  }
  EXPECT_NE(first, second);
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  EXPECT_EQ(first, second);
}

TEST(MakeBatches, BatchLossesAverageToFullLoss) {
  // equal-size batches: the plain mean of batch means is the full mean
  const MicroMlp net({2, 6, 2}, make_two_moons(120, 0.2, 4));
  RngState rng(8);
  const ParamVector theta = rng.normal_vector(net.dim());
  const auto batches = make_batches(120, 30, rng);
  double avg = 0.0;
  ParamVector gavg = ParamVector::Zero(net.dim());
  for (const auto& b : batches) {
    avg += net.eval_batch(theta, b) / batches.size();
    gavg += net.grad_batch(theta, b) / static_cast<double>(batches.size());
  }
  EXPECT_NEAR(avg / net.eval(theta), 1.0, 1e-10);
  EXPECT_LE((gavg - net.grad(theta)).norm(), 1e-10 * net.grad(theta).norm());
}

TEST(MakeBatches, FullCoverBatchIsBitIdentical) {
  const MicroMlp net({2, 6, 2}, make_two_moons(50, 0.2, 4));
  RngState rng(9);
  const ParamVector theta = rng.normal_vector(net.dim());
  std::vector<std::size_t> all(50);
  std::iota(all.begin(), all.end(), std::size_t{0});
  EXPECT_EQ(net.eval_batch(theta, all), net.eval(theta));
  EXPECT_EQ(net.grad_batch(theta, all), net.grad(theta));
}

TEST(Dataset, TwoMoonsBalancedAndDeterministic) {
  const Dataset a = make_two_moons(200, 0.2, 5);
  const Dataset b = make_two_moons(200, 0.2, 5);
  EXPECT_EQ(a.inputs, b.inputs);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(std::count(a.labels.begin(), a.labels.end(), 1), 100);
}

TEST(Dataset, CsvRoundTrip) {
  const Dataset a = make_two_moons(25, 0.2, 6);
  std::stringstream ss;
  write_dataset_csv(ss, a);
  const Dataset b = read_dataset_csv(ss);
  EXPECT_EQ(a.inputs, b.inputs);
  EXPECT_EQ(a.labels, b.labels);
}

TEST(Dataset, CsvRejectsBadHeader) {
  std::stringstream ss("a,b,c\n1,2,0\n");
  EXPECT_THROW(read_dataset_csv(ss), std::runtime_error);
}

TEST(Dataset, OodInputsLieOnAnnulus) {
  const Eigen::MatrixX2d x = make_ood_inputs(100, 1);
  const Eigen::RowVector2d center(0.5, 0.25);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double r = (x.row(i) - center).norm();
    EXPECT_GE(r, 5.0 - 1e-12);
    EXPECT_LE(r, 8.0 + 1e-12);
  }
}
