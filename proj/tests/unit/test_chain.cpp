#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "adammcmc/chain.hpp"

using namespace adammcmc;

namespace {

// Linear classifier [2, 2] whose class-1 probability is p everywhere.
ParamVector constant_prob_params(double p) {
  ParamVector theta = ParamVector::Zero(6);  // 2x2 weights, 2 biases
  theta[5] = std::log(p / (1.0 - p));
  return theta;
}

MicroMlp linear_net() { return MicroMlp({2, 2}, make_two_moons(10, 0.1, 1)); }

ChainState stub_state(double x) {
  ChainState s;
  s.theta = ParamVector::Constant(1, x);
  s.momenta = Momenta::zeros(1);
  return s;
}

}  // namespace

TEST(Schedule, BudgetBoundary) {
  ChainSchedule ok{98, 48, 5, 10};
  EXPECT_NO_THROW(ok.validate());
  ChainSchedule over{97, 48, 5, 10};
  EXPECT_THROW(over.validate(), std::out_of_range);
}

TEST(Schedule, RejectsNonPositiveGapOrCount) {
  EXPECT_THROW((ChainSchedule{10, 0, 0, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((ChainSchedule{10, 0, 1, 0}.validate()), std::invalid_argument);
  EXPECT_THROW((ChainSchedule{10, -1, 1, 1}.validate()), std::invalid_argument);
}

TEST(Schedule, SampleStepsAreBPlusIC) {
  const ChainSchedule s{100, 10, 7, 5};
  EXPECT_EQ(s.sample_steps(), (std::vector<std::int64_t>{17, 24, 31, 38, 45}));
}

TEST(RunChain, AlwaysAcceptKeepsWholeTrajectory) {
  const StepFunction step = [](ChainState& s) {
    s.theta[0] += 1.0;
    ++s.step;
    StepResult r;
    r.accepted = true;
    return r;
  };
  const ChainOutput out = run_chain(step, stub_state(0.0), {6, 0, 1, 6});
  ASSERT_EQ(out.samples.size(), 6u);
  for (int i = 0; i < 6; ++i) EXPECT_EQ(out.samples[i][0], i + 1.0);
  EXPECT_EQ(out.record.acceptance_rate(), 1.0);
}

TEST(RunChain, ConstantSamplerGivesZeroSpread) {
  const ParamVector star = constant_prob_params(0.3);
  const StepFunction step = [star](ChainState& s) {
    s.theta = star;
    return StepResult{};
  };
  ChainState s0;
  s0.theta = ParamVector::Zero(6);
  const ChainOutput out = run_chain(step, s0, {20, 5, 3, 5});
  ASSERT_EQ(out.samples.size(), 5u);
  for (const auto& x : out.samples) EXPECT_EQ(x, star);
  const MicroMlp net = linear_net();
  Eigen::MatrixX2d x(4, 2);
  x << 0, 0, 1, 1, -3, 2, 5, 5;
  const auto pred = ensemble_predict(out.samples, net, x);
  EXPECT_EQ(pred.spread, Eigen::VectorXd::Zero(4));
}

TEST(RunChain, RecordCountsAndRate) {
  int k = 0;
  const StepFunction step = [&k](ChainState&) {
    StepResult r;
    r.accepted = (k++ % 4) == 0;
    r.reason = r.accepted ? RejectReason::None : RejectReason::MetropolisHastings;
    return r;
  };
  const ChainOutput out = run_chain(step, stub_state(0.0), {100, 0, 10, 10});
  EXPECT_EQ(out.record.rows.size(), 100u);
  EXPECT_DOUBLE_EQ(out.record.acceptance_rate(), 0.25);
  EXPECT_EQ(out.record.count(RejectReason::MetropolisHastings), 75u);
  EXPECT_EQ(out.record.rows.front().step, 1);
  EXPECT_EQ(out.record.rows.back().step, 100);
}

TEST(ChainRecord, CsvColumns) {
  ChainRecord rec;
  rec.rows.push_back({1, 0.5, -0.25, true, 2.0, 0.1, RejectReason::None, 1.23});
  std::ostringstream ss;
  rec.write_csv(ss);
  const std::string text = ss.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "step,loss,log_alpha,accepted,theta_norm,u_norm");
  EXPECT_EQ(text.find("1.23"), std::string::npos);
}

TEST(Quantile, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(quantile_linear({0.1, 0.2, 0.3, 0.4}, 0.75), 0.325);
  EXPECT_DOUBLE_EQ(quantile_linear({0.4, 0.1, 0.3, 0.2}, 0.25), 0.175);
  EXPECT_DOUBLE_EQ(quantile_linear({5.0}, 0.5), 5.0);
  EXPECT_DOUBLE_EQ(median({3.0, 1.0, 2.0, 10.0}), 2.5);
}

TEST(Ensemble, HandQuantileExample) {
  const MicroMlp net = linear_net();
  std::vector<ParamVector> samples;
  for (double p : {0.1, 0.2, 0.3, 0.4}) samples.push_back(constant_prob_params(p));
  Eigen::MatrixX2d x(1, 2);
  x << 0.3, -0.7;
  const auto pred = ensemble_predict(samples, net, x);
  EXPECT_NEAR(pred.mean[0], 0.25, 1e-12);
  EXPECT_NEAR(pred.spread[0], 0.15, 1e-12);
}

TEST(Ensemble, MeanIsArithmeticMeanOfMembers) {
  const MicroMlp net({2, 4, 2}, make_two_moons(10, 0.1, 1));
  RngState rng(3);
  std::vector<ParamVector> samples;
  for (int i = 0; i < 7; ++i) samples.push_back(rng.normal_vector(net.dim()));
  Eigen::MatrixX2d x(20, 2);
  for (Eigen::Index i = 0; i < 20; ++i) x.row(i) << rng.normal(), rng.normal();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(20, 2);
  for (const auto& s : samples) sum += net.forward(s, x);
  const Eigen::MatrixXd mean = ensemble_mean_probs(samples, net, x);
  EXPECT_LE((mean - sum / 7.0).cwiseAbs().maxCoeff(), 1e-12);
  for (Eigen::Index i = 0; i < 20; ++i) EXPECT_NEAR(mean.row(i).sum(), 1.0, 1e-12);
  const auto pred = ensemble_predict(samples, net, x);
  EXPECT_LE((pred.mean - sum.col(1) / 7.0).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Ensemble, SingleSampleSpreadUndefined) {
  const MicroMlp net = linear_net();
  const std::vector<ParamVector> one{constant_prob_params(0.2)};
  Eigen::MatrixX2d x(2, 2);
  x << 0, 0, 1, 1;
  const auto pred = ensemble_predict(one, net, x);
  EXPECT_FALSE(pred.spread_defined);
  EXPECT_TRUE(std::isnan(pred.spread[0]));
  EXPECT_NEAR(pred.mean[0], 0.2, 1e-12);
}

TEST(Samples, CsvHasOneRowPerSample) {
  const std::vector<ParamVector> s{ParamVector::Constant(3, 1.0), ParamVector::Constant(3, 2.0)};
  std::ostringstream ss;
  write_samples_csv(ss, s);
  const std::string text = ss.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  EXPECT_EQ(std::count(text.begin(), text.end(), ','), 4);
}
