#include "adammcmc/experiment.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace adammcmc {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

// Offsets that split one run seed into independent streams.
constexpr std::uint64_t kInitStream = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kBatchStream = 0xbf58476d1ce4e5b9ULL;

std::vector<int> layer_sizes(const RunConfig& c) {
  std::vector<int> sizes{2};
  sizes.insert(sizes.end(), c.hidden.begin(), c.hidden.end());
  sizes.push_back(2);
  return sizes;
}

Dataset load_train(const RunConfig& c) {
  if (c.dataset.empty()) return make_two_moons(static_cast<std::size_t>(c.n_train), c.data_noise, c.data_seed);
  std::ifstream f(c.dataset);
  if (!f) throw ConfigError("dataset", "cannot read " + c.dataset);
  try {
    return read_dataset_csv(f);
  } catch (const std::runtime_error& e) {
    throw ConfigError("dataset", e.what());
  }
}

ordered_json vector_json(const Eigen::VectorXd& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

}  // namespace

ChainSchedule Experiment::schedule() const {
  return {config.steps, config.burn_in, config.gap, config.n_samples};
}

Experiment build_experiment(const RunConfig& config) {
  config.validate();
  Experiment exp;
  exp.config = config;
  const PriorBox prior(config.prior_half_width);
  if (config.target == "mlp") {
    auto mlp = std::make_shared<MicroMlp>(layer_sizes(config), load_train(config),
                                          config.weight_scale);
    exp.test = make_two_moons(static_cast<std::size_t>(config.n_test), config.data_noise,
                              config.data_seed + 1);
    exp.ood = make_ood_inputs(static_cast<std::size_t>(config.n_test), config.data_seed + 2);
    RngState init_rng(config.seed ^ kInitStream);
    exp.theta0 = mlp->init_params(init_rng);
    if (config.batch_size > static_cast<int>(mlp->n_points())) {
      throw ConfigError("batch_size", "exceeds the number of training points");
    }
    exp.mlp = mlp;
    exp.target = {mlp, config.lambda, prior};
  } else {
    const Eigen::Index d = config.dim;
    if (config.target == "quadratic") {
      exp.target = {std::make_shared<QuadraticLoss>(d), config.lambda, prior};
    } else if (config.target == "banana") {
      exp.target = {std::make_shared<BananaLoss>(d, config.banana_curvature), config.lambda, prior};
    } else {
      exp.target = {std::make_shared<LinearLoss>(ParamVector::Constant(d, config.linear_slope)),
                    config.lambda, prior};
    }
    exp.theta0 = ParamVector::Constant(d, config.init_offset);
  }
  if (!prior.contains(exp.theta0)) throw ConfigError("init_offset", "start lies outside the prior box");

  auto& m = exp.mcmc;
  m.adam = {config.gamma, config.beta1, config.beta2, config.delta,
            config.drift == "gradient" ? DriftRule::ScaledGradient : DriftRule::Adam};
  const double p = static_cast<double>(exp.target.dim());
  m.proposal = {config.sigma, config.sigma_dir.value_or(p / 100.0)};
  if (config.correction == "full") {
    m.correction = CorrectionParams::full_from_s2(config.s2, m.adam);
    if (config.rho1) m.correction.rho1 = *config.rho1;
    if (config.rho2) m.correction.rho2 = *config.rho2;
  } else {
    m.correction.mode = CorrectionMode::Unit;
  }
  exp.sghmc = {config.gamma, config.sghmc_friction, config.sghmc_noise};
  return exp;
}

StepFunction make_step_function(const Experiment& exp) {
  std::shared_ptr<BatchIterator> batches;
  if (exp.config.batch_size > 0) {
    batches = std::make_shared<BatchIterator>(exp.target.oracle->n_points(),
                                              static_cast<std::size_t>(exp.config.batch_size),
                                              exp.config.seed ^ kBatchStream);
  }
  const bool batch_mh = exp.config.stochastic_mh;
  auto plan_for = [batches, batch_mh]() {
    EvalPlan plan;
    plan.batch_mh = batch_mh;
    if (batches) plan.batch = batches->next();
    return plan;
  };
  const GibbsTarget target = exp.target;
  const AdamMcmcParams mcmc = exp.mcmc;
  const std::string& sampler = exp.config.sampler;
  if (sampler == "adammcmc") {
    return [=](ChainState& s) { return adammcmc_step(s, target, mcmc, plan_for()); };
  }
  if (sampler == "mala") {
    return [=](ChainState& s) {
      return mala_step(s, target, mcmc.adam.gamma, mcmc.proposal.sigma, plan_for());
    };
  }
  if (sampler == "adam") {
    return [=](ChainState& s) { return adam_step(s, *target.oracle, mcmc.adam, plan_for().batch); };
  }
  if (sampler == "sgd") {
    return [=](ChainState& s) { return sgd_step(s, *target.oracle, mcmc.adam.gamma, plan_for().batch); };
  }
  const SghmcParams sghmc = exp.sghmc;
  return [=](ChainState& s) {
    return sghmc_step(s, *target.oracle, sghmc, target.lambda, plan_for().batch);
  };
}

RunResult run_experiment(const Experiment& exp) {
  const ChainSchedule schedule = exp.schedule();
  ChainState state = make_chain_state(*exp.target.oracle, exp.theta0, exp.config.seed);
  const Eigen::Index p = exp.target.dim();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(p);
  double loss_sum = 0.0;
  std::int64_t n_post = 0;
  const auto observer = [&](std::int64_t k, const ChainState& s, const StepResult& r) {
    if (k <= schedule.burn_in) return;
    sum += s.theta;
    sum_sq += s.theta.cwiseAbs2();
    loss_sum += r.loss;
    ++n_post;
  };

  RunResult result;
  result.chain = run_chain(make_step_function(exp), std::move(state), schedule, observer);
  if (!result.chain.final_state.theta.allFinite()) {
    throw NumericalError("chain ended at non-finite parameters");
  }
  auto& m = result.metrics;
  m.acceptance_rate = result.chain.record.acceptance_rate();
  m.boundary_rejects = result.chain.record.count(RejectReason::Boundary);
  m.nonfinite_rejects = result.chain.record.count(RejectReason::NonFinite);
  if (n_post > 0) {
    const double n = static_cast<double>(n_post);
    m.post_mean = sum / n;
    m.post_var = (sum_sq / n - m.post_mean.cwiseAbs2()).cwiseMax(0.0);
    m.post_loss_mean = loss_sum / n;
  }
  if (exp.mlp) {
    const auto& samples = result.chain.samples;
    result.test_prediction = ensemble_predict(samples, *exp.mlp, exp.test.inputs);
    result.ood_prediction = ensemble_predict(samples, *exp.mlp, exp.ood);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < exp.test.size(); ++i) {
      const int pred = result.test_prediction->mean[static_cast<Eigen::Index>(i)] > 0.5 ? 1 : 0;
      if (pred == exp.test.labels[i]) ++hits;
    }
    m.test_accuracy = static_cast<double>(hits) / static_cast<double>(exp.test.size());
    if (result.test_prediction->spread_defined) {
      const auto& st = result.test_prediction->spread;
      const auto& so = result.ood_prediction->spread;
      m.median_spread_test = median({st.data(), st.data() + st.size()});
      m.median_spread_ood = median({so.data(), so.data() + so.size()});
    }
  }
  return result;
}

double scan_metric(const Experiment& exp, const RunResult& result) {
  const auto& m = result.metrics;
  if (exp.mlp) return m.test_accuracy.value_or(0.0);
  if (m.post_mean.size() == 0) return std::numeric_limits<double>::quiet_NaN();
  if (exp.config.target == "quadratic") {
    const double var = 1.0 / exp.target.lambda;
    return std::max(m.post_mean.cwiseAbs().maxCoeff(), (m.post_var.array() - var).abs().maxCoeff());
  }
  return m.post_loss_mean;
}

void write_run_artifacts(const fs::path& dir, const Experiment& exp, const RunResult& result) {
  fs::create_directories(dir);
  const std::string hash = exp.config.hash();
  write_text(dir / "config.json", exp.config.to_json());
  {
    std::ofstream f(dir / "chain_record.csv", std::ios::binary);
    result.chain.record.write_csv(f);
  }
  {
    std::ofstream f(dir / "samples.csv", std::ios::binary);
    write_samples_csv(f, result.chain.samples);
  }
  const ChainSchedule sched = exp.schedule();
  ordered_json sidecar = {
      {"schema_version", kArtifactSchemaVersion},
      {"format", "csv"},
      {"P", exp.target.dim()},
      {"n_samples", result.chain.samples.size()},
      {"schedule",
       {{"total_steps", sched.total_steps},
        {"burn_in", sched.burn_in},
        {"gap", sched.gap},
        {"n_samples", sched.n_samples}}},
      {"sample_steps", sched.sample_steps()},
      {"config_hash", hash},
      {"seed", exp.config.seed},
  };
  write_text(dir / "samples.json", sidecar.dump(2) + "\n");

  const auto& m = result.metrics;
  ordered_json summary = {
      {"schema_version", kArtifactSchemaVersion},
      {"acceptance_rate", m.acceptance_rate},
      {"boundary_rejects", m.boundary_rejects},
      {"nonfinite_rejects", m.nonfinite_rejects},
      {"post_burn_in_loss_mean", m.post_loss_mean},
  };
  if (m.post_mean.size() > 0 && !exp.mlp) {
    summary["post_burn_in_mean"] = vector_json(m.post_mean);
    summary["post_burn_in_var"] = vector_json(m.post_var);
  }
  if (exp.mlp && result.test_prediction) {
    summary["test_accuracy"] = *m.test_accuracy;
    summary["spread_defined"] = result.test_prediction->spread_defined;
    summary["median_spread_test"] =
        m.median_spread_test ? ordered_json(*m.median_spread_test) : ordered_json(nullptr);
    summary["median_spread_ood"] =
        m.median_spread_ood ? ordered_json(*m.median_spread_ood) : ordered_json(nullptr);
    summary["test_mean_prediction"] = vector_json(result.test_prediction->mean);
    summary["test_spread"] = result.test_prediction->spread_defined
                                 ? vector_json(result.test_prediction->spread)
                                 : ordered_json(nullptr);
  }
  write_text(dir / "ensemble_summary.json", summary.dump(2) + "\n");

  ordered_json manifest = {
      {"schema_version", kArtifactSchemaVersion},
      {"tool", "adammcmc"},
      {"version", kVersion},
      {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." +
                            std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
      {"config_hash", hash},
      {"seed", exp.config.seed},
      {"sampler", exp.config.sampler},
      {"target", exp.config.target},
      {"P", exp.target.dim()},
      {"files",
       {"config.json", "chain_record.csv", "samples.csv", "samples.json", "ensemble_summary.json"}},
  };
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace adammcmc
