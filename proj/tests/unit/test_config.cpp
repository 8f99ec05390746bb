#include <string>

#include <gtest/gtest.h>

#include "adammcmc/config.hpp"
#include "adammcmc/experiment.hpp"

using namespace adammcmc;

namespace {

std::string field_of(const std::string& json) {
  try {
    RunConfig::from_json(json).validate();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(RunConfig, DefaultsMirrorMlpRuns) {
  const RunConfig c;
  EXPECT_EQ(c.gamma, 1e-3);
  EXPECT_EQ(c.beta1, 0.99);
  EXPECT_EQ(c.beta2, 0.99);
  EXPECT_EQ(c.lambda, 1.0);
  EXPECT_EQ(c.sigma, 2.0);
  EXPECT_FALSE(c.sigma_dir.has_value());
  EXPECT_EQ(c.prior_half_width, 100.0);
  EXPECT_EQ(c.steps, 20000);
  EXPECT_EQ(c.burn_in, 10000);
  EXPECT_EQ(c.gap, 1000);
  EXPECT_EQ(c.n_samples, 10);
  EXPECT_NO_THROW(c.validate());
}

TEST(RunConfig, RoundTripIsIdentical) {
  RunConfig c;
  c.target = "banana";
  c.sigma = 0.37;
  c.sigma_dir = 12.5;
  c.rho1 = 0.01;
  c.hidden = {3, 5};
  c.weight_scale = 0.25;
  c.seed = 123456789012345ULL;
  const std::string a = c.to_json();
  const std::string b = RunConfig::from_json(a).to_json();
  EXPECT_EQ(a, b);
  EXPECT_EQ(RunConfig::from_json(a).seed, c.seed);
}

TEST(RunConfig, PartialJsonKeepsDefaults) {
  const RunConfig c = RunConfig::from_json(R"({"sigma": 0.5})");
  EXPECT_EQ(c.sigma, 0.5);
  EXPECT_EQ(c.gamma, 1e-3);
}

TEST(RunConfig, UnknownKeyRejected) {
  EXPECT_EQ(field_of(R"({"sigmaa": 1.0})"), "sigmaa");
}

TEST(RunConfig, IllTypedValueRejected) {
  EXPECT_EQ(field_of(R"({"sigma": "big"})"), "sigma");
}

TEST(RunConfig, InvalidFieldsNamed) {
  EXPECT_EQ(field_of(R"({"sigma": 0})"), "sigma");
  EXPECT_EQ(field_of(R"({"sigma": -1})"), "sigma");
  EXPECT_EQ(field_of(R"({"sigma_dir": -0.1})"), "sigma_dir");
  EXPECT_EQ(field_of(R"({"beta1": 1.0})"), "beta1");
  EXPECT_EQ(field_of(R"({"gamma": 0})"), "gamma");
  EXPECT_EQ(field_of(R"({"lambda": 0})"), "lambda");
  EXPECT_EQ(field_of(R"({"sampler": "nuts"})"), "sampler");
  EXPECT_EQ(field_of(R"({"target": "cube"})"), "target");
  EXPECT_EQ(field_of(R"({"weight_scale": 0})"), "weight_scale");
  EXPECT_EQ(field_of(R"({"steps": 97, "burn_in": 48, "gap": 5, "n_samples": 10})"), "steps");
  EXPECT_EQ(field_of(R"({"steps": 98, "burn_in": 48, "gap": 5, "n_samples": 10})"), "");
}

TEST(RunConfig, MalformedJson) {
  EXPECT_THROW(RunConfig::from_json("{sigma: 1"), ConfigError);
  EXPECT_THROW(RunConfig::from_json("[1, 2]"), ConfigError);
}

TEST(RunConfig, HashIgnoresOutDirOnly) {
  RunConfig a, b;
  b.out_dir = "elsewhere";
  EXPECT_EQ(a.hash(), b.hash());
  b.seed = 1;
  EXPECT_NE(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
}

TEST(RunConfig, EverySymbolSettable) {
  const RunConfig c = RunConfig::from_json(R"({
    "lambda": 2, "gamma": 0.01, "sigma": 0.3, "sigma_dir": 4, "beta1": 0.5, "beta2": 0.6,
    "delta": 1e-6, "burn_in": 5, "gap": 2, "n_samples": 3, "steps": 20,
    "prior_half_width": 7, "rho1": 0.1, "rho2": 0.2, "s2": 0.3, "correction": "full",
    "batch_size": 10})");
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.lambda, 2);
  EXPECT_EQ(c.rho2.value(), 0.2);
  EXPECT_EQ(c.correction, "full");
}

TEST(ScanParam, SetsFields) {
  RunConfig c;
  set_scan_param(c, "beta", 0.5);
  EXPECT_EQ(c.beta1, 0.5);
  EXPECT_EQ(c.beta2, 0.5);
  set_scan_param(c, "sigma_dir", 3.0);
  EXPECT_EQ(c.sigma_dir.value(), 3.0);
  EXPECT_TRUE(is_scan_param("lambda"));
  EXPECT_FALSE(is_scan_param("gamma"));
  EXPECT_THROW(set_scan_param(c, "gamma", 1.0), ConfigError);
}

TEST(Experiment, SigmaDirDefaultsToPOver100) {
  RunConfig c;
  c.n_train = 50;
  c.n_test = 20;
  const Experiment e = build_experiment(c);
  EXPECT_EQ(e.target.dim(), 354);
  EXPECT_NEAR(e.mcmc.proposal.sigma_dir, 3.54, 1e-15);
}

TEST(Experiment, StartOutsideBoxRejected) {
  RunConfig c;
  c.target = "quadratic";
  c.init_offset = 20.0;
  c.prior_half_width = 10.0;
  EXPECT_THROW(build_experiment(c), ConfigError);
}

TEST(Experiment, RunIsDeterministic) {
  RunConfig c;
  c.target = "quadratic";
  c.dim = 3;
  c.sigma = 0.5;
  c.steps = 2000;
  c.burn_in = 1000;
  c.gap = 100;
  const Experiment e = build_experiment(c);
  const RunResult a = run_experiment(e);
  const RunResult b = run_experiment(e);
  ASSERT_EQ(a.chain.record.rows.size(), b.chain.record.rows.size());
  for (std::size_t i = 0; i < a.chain.record.rows.size(); ++i) {
    EXPECT_EQ(a.chain.record.rows[i].loss, b.chain.record.rows[i].loss);
    EXPECT_EQ(a.chain.record.rows[i].accepted, b.chain.record.rows[i].accepted);
  }
  EXPECT_EQ(a.chain.samples, b.chain.samples);
}
