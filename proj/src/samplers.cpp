#include "adammcmc/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace adammcmc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool all_finite(const ParamVector& v) { return v.allFinite(); }

}  // namespace

void AdamParams::validate() const {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw std::invalid_argument("beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw std::invalid_argument("beta2 must lie in [0, 1)");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
}

void ProposalParams::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be positive");
  if (!(sigma_dir >= 0.0) || !std::isfinite(sigma_dir)) {
    throw std::invalid_argument("sigma_dir must be non-negative");
  }
}

CorrectionParams CorrectionParams::full_from_s2(double s2, const AdamParams& adam) {
  if (!(s2 > 0.0)) throw std::invalid_argument("s2 must be positive");
  CorrectionParams cp;
  cp.mode = CorrectionMode::Full;
  cp.rho1 = std::sqrt((1.0 - adam.beta1 * adam.beta1) * s2);
  cp.rho2 = std::sqrt((1.0 - adam.beta2 * adam.beta2) * s2);
  return cp;
}

double CorrectionParams::s2(int l, const AdamParams& adam) const {
  const double rho = l == 1 ? rho1 : rho2;
  const double beta = l == 1 ? adam.beta1 : adam.beta2;
  return rho * rho / (1.0 - beta * beta);
}

void CorrectionParams::validate() const {
  if (mode == CorrectionMode::Full && !(rho1 > 0.0 && rho2 > 0.0)) {
    throw std::invalid_argument("rho1 and rho2 must be positive for the full correction");
  }
}

ChainState make_chain_state(const LossOracle& oracle, ParamVector theta0, std::uint64_t seed) {
  require_same_dim(theta0.size(), oracle.dim(), "make_chain_state");
  ChainState s;
  auto at = oracle.value_and_grad(theta0);
  if (!std::isfinite(at.loss) || !all_finite(at.grad)) {
    throw NumericalError("initial state has a non-finite loss or gradient");
  }
  const Eigen::Index p = theta0.size();
  s.theta = std::move(theta0);
  s.momenta = Momenta::zeros(p);
  s.cached_loss = at.loss;
  s.cached_grad = std::move(at.grad);
  s.velocity = ParamVector::Zero(p);
  s.rng = RngState(seed);
  return s;
}

StepNoise draw_step_noise(RngState& rng, Eigen::Index dim, bool directional, bool momenta) {
  StepNoise noise;
  if (momenta) {
    noise.momentum1 = rng.normal_vector(dim);
    noise.momentum2 = rng.normal_vector(dim);
  }
  noise.z = rng.normal_vector(dim);
  noise.xi = directional ? rng.normal() : 0.0;
  noise.uniform = rng.uniform_open_closed();
  return noise;
}

Momenta adam_momentum_update(const Momenta& m, const ParamVector& grad, const AdamParams& p) {
  require_same_dim(m.first.size(), grad.size(), "adam_momentum_update");
  require_same_dim(m.second.size(), grad.size(), "adam_momentum_update");
  Momenta out;
  out.first = p.beta1 * m.first + (1.0 - p.beta1) * grad;
  out.second = p.beta2 * m.second + (1.0 - p.beta2) * grad.cwiseAbs2();
  return out;
}

ParamVector adam_update_vector(const Momenta& m, std::int64_t k, const AdamParams& p) {
  if (k < 0) throw std::invalid_argument("adam_update_vector: k must be >= 0");
  const auto exponent = static_cast<double>(k + 1);
  const double bias1 = 1.0 - std::pow(p.beta1, exponent);
  if (p.drift == DriftRule::ScaledGradient) return (p.gamma / bias1) * m.first;
  const double bias2 = 1.0 - std::pow(p.beta2, exponent);
  const Eigen::ArrayXd denom = (m.second.array().abs() / bias2).sqrt() + p.delta;
  return ((p.gamma / bias1) * m.first.array() / denom).matrix();
}

double correction_log_term(const Momenta& m_next, const ParamVector& grad_theta,
                           const ParamVector& grad_tau, const CorrectionParams& cp,
                           const AdamParams& ap) {
  require_same_dim(grad_theta.size(), grad_tau.size(), "correction_log_term");
  require_same_dim(m_next.first.size(), grad_tau.size(), "correction_log_term");
  const double s1 = cp.s2(1, ap);
  const double s2 = cp.s2(2, ap);
  const double first = (-(m_next.first - grad_tau).squaredNorm() +
                        (m_next.first - grad_theta).squaredNorm()) /
                       (2.0 * s1);
  const double second = (-(m_next.second - grad_tau.cwiseAbs2()).squaredNorm() +
                         (m_next.second - grad_theta.cwiseAbs2()).squaredNorm()) /
                        (2.0 * s2);
  return first + second;
}

double correction_term_C(const Momenta& m_next, const ParamVector& grad_theta,
                         const ParamVector& grad_tau, const CorrectionParams& cp,
                         const AdamParams& ap) {
  return std::exp(correction_log_term(m_next, grad_theta, grad_tau, cp, ap));
}

double adammcmc_log_acceptance(const MoveTerms& move, const GibbsTarget& target,
                               const ProposalParams& pp, const CorrectionParams& cp,
                               const AdamParams& ap) {
  if (!target.prior.contains(move.tau) || !std::isfinite(move.loss_tau)) return kNegInf;
  // p(theta) = 0 with p(tau) > 0: the ratio is infinite.
  if (!target.prior.contains(move.theta) || !std::isfinite(move.loss_theta)) return 0.0;

  const ProlateCovariance cov(pp.sigma, pp.sigma_dir, move.u);
  // Forward: tau ~ N(theta - u, Sigma); backward: theta ~ N(tau - u, Sigma).
  // Normalizers match, so only the quadratic forms enter.
  const double q_forward = cov.inv_quad_form(move.tau - (move.theta - move.u));
  const double q_backward = cov.inv_quad_form(move.theta - (move.tau - move.u));
  double log_ratio =
      -target.lambda * (move.loss_tau - move.loss_theta) - 0.5 * (q_backward - q_forward);
  if (cp.mode == CorrectionMode::Full) {
    if (!all_finite(move.grad_tau)) return kNegInf;
    log_ratio += correction_log_term(move.m_next, move.grad_theta, move.grad_tau, cp, ap);
  }
  if (std::isnan(log_ratio)) return kNegInf;
  return std::min(0.0, log_ratio);
}

StepResult adammcmc_step(ChainState& state, const GibbsTarget& target, const AdamMcmcParams& params,
                         const EvalPlan& plan) {
  const StepNoise noise =
      draw_step_noise(state.rng, state.theta.size(), params.proposal.sigma_dir != 0.0,
                      params.correction.randomize_momenta);
  return adammcmc_step(state, target, params, noise, plan);
}

StepResult adammcmc_step(ChainState& state, const GibbsTarget& target, const AdamMcmcParams& params,
                         const StepNoise& noise, const EvalPlan& plan) {
  const LossOracle& oracle = *target.oracle;
  const bool batched = !plan.batch.empty();
  const bool mh_on_batch = batched && plan.batch_mh;
  const bool need_grad_tau = params.correction.mode == CorrectionMode::Full;

  // Gradient driving the momenta, and the M-H loss/gradient at theta.
  LossAndGrad at_theta = batched ? oracle.batch_value_and_grad(state.theta, plan.batch)
                                 : LossAndGrad{state.cached_loss, state.cached_grad};
  const ParamVector& drive_grad = at_theta.grad;
  const double mh_loss_theta = mh_on_batch || !batched ? at_theta.loss : state.cached_loss;
  const ParamVector& mh_grad_theta = mh_on_batch || !batched ? at_theta.grad : state.cached_grad;

  Momenta m_next = adam_momentum_update(state.momenta, drive_grad, params.adam);
  if (params.correction.randomize_momenta) {
    require_same_dim(noise.momentum1.size(), m_next.first.size(), "adammcmc_step momentum noise");
    require_same_dim(noise.momentum2.size(), m_next.second.size(), "adammcmc_step momentum noise");
    m_next.first += params.correction.rho1 * noise.momentum1;
    m_next.second += params.correction.rho2 * noise.momentum2;
  }
  const ParamVector u = adam_update_vector(m_next, state.step, params.adam);
  const ProlateCovariance cov(params.proposal.sigma, params.proposal.sigma_dir, u);
  ParamVector tau = cov.sample(state.theta - u, noise.z, noise.xi);

  StepResult result;
  result.u_norm = u.norm();

  LossAndGrad at_tau{std::numeric_limits<double>::quiet_NaN(), ParamVector()};
  if (!target.prior.contains(tau)) {
    result.reason = RejectReason::Boundary;
    result.log_alpha = kNegInf;
  } else {
    if (mh_on_batch) {
      if (need_grad_tau) {
        at_tau = oracle.batch_value_and_grad(tau, plan.batch);
      } else {
        at_tau.loss = oracle.eval_batch(tau, plan.batch);
      }
    } else if (!batched || need_grad_tau) {
      at_tau = oracle.value_and_grad(tau);
    } else {
      at_tau.loss = oracle.eval(tau);
    }
    if (!std::isfinite(at_tau.loss) || (at_tau.grad.size() > 0 && !all_finite(at_tau.grad))) {
      result.reason = RejectReason::NonFinite;
      result.log_alpha = kNegInf;
    } else {
      const ParamVector& grad_tau = at_tau.grad.size() > 0 ? at_tau.grad : mh_grad_theta;
      const MoveTerms move{state.theta, mh_loss_theta, mh_grad_theta, tau,
                           at_tau.loss, grad_tau,      m_next,        u};
      result.log_alpha = adammcmc_log_acceptance(move, target, params.proposal, params.correction,
                                                 params.adam);
    }
  }

  result.accepted = std::log(noise.uniform) <= result.log_alpha;
  if (result.accepted) {
    state.theta = std::move(tau);
    if (!batched) {
      state.cached_loss = at_tau.loss;
      state.cached_grad = std::move(at_tau.grad);
    } else {
      // Batch mode recomputes theta's values every step; the cache only
      // tracks the M-H loss for reporting (full data when batch_mh is off).
      state.cached_loss = at_tau.loss;
      if (at_tau.grad.size() > 0 && !mh_on_batch) state.cached_grad = std::move(at_tau.grad);
    }
    result.reason = RejectReason::None;
  } else if (result.reason == RejectReason::None) {
    result.reason = RejectReason::MetropolisHastings;
  }
  if (batched && mh_on_batch && !result.accepted) state.cached_loss = mh_loss_theta;
  result.loss = result.accepted ? state.cached_loss : mh_loss_theta;
  state.momenta = std::move(m_next);
  ++state.step;
  return result;
}

double mala_log_acceptance(const GibbsTarget& target, const ParamVector& theta, double loss_theta,
                           const ParamVector& grad_theta, const ParamVector& tau, double loss_tau,
                           const ParamVector& grad_tau, double gamma, double sigma) {
  if (!target.prior.contains(tau) || !std::isfinite(loss_tau) || !all_finite(grad_tau)) {
    return kNegInf;
  }
  if (!target.prior.contains(theta) || !std::isfinite(loss_theta)) return 0.0;
  const double s2 = sigma * sigma;
  const double q_forward = (tau - (theta - gamma * grad_theta)).squaredNorm() / s2;
  const double q_backward = (theta - (tau - gamma * grad_tau)).squaredNorm() / s2;
  const double log_ratio =
      -target.lambda * (loss_tau - loss_theta) - 0.5 * (q_backward - q_forward);
  if (std::isnan(log_ratio)) return kNegInf;
  return std::min(0.0, log_ratio);
}

StepResult mala_step(ChainState& state, const GibbsTarget& target, double gamma, double sigma,
                     const EvalPlan& plan) {
  const StepNoise noise = draw_step_noise(state.rng, state.theta.size(), false);
  return mala_step(state, target, gamma, sigma, noise, plan);
}

StepResult mala_step(ChainState& state, const GibbsTarget& target, double gamma, double sigma,
                     const StepNoise& noise, const EvalPlan& plan) {
  if (!(sigma > 0.0)) throw std::invalid_argument("mala_step: sigma must be positive");
  const LossOracle& oracle = *target.oracle;
  const bool batched = !plan.batch.empty();
  const bool mh_on_batch = batched && plan.batch_mh;

  const LossAndGrad at_theta = batched ? oracle.batch_value_and_grad(state.theta, plan.batch)
                                       : LossAndGrad{state.cached_loss, state.cached_grad};
  const double mh_loss_theta = mh_on_batch || !batched ? at_theta.loss : state.cached_loss;

  ParamVector tau = (state.theta - gamma * at_theta.grad) + sigma * noise.z;

  StepResult result;
  result.u_norm = gamma * at_theta.grad.norm();
  LossAndGrad at_tau{std::numeric_limits<double>::quiet_NaN(), ParamVector()};
  double loss_tau_mh = at_tau.loss;
  if (!target.prior.contains(tau)) {
    result.reason = RejectReason::Boundary;
    result.log_alpha = kNegInf;
  } else {
    at_tau = evaluate(oracle, tau, plan.batch);
    loss_tau_mh = mh_on_batch || !batched ? at_tau.loss : oracle.eval(tau);
    if (!std::isfinite(loss_tau_mh) || !all_finite(at_tau.grad)) {
      result.reason = RejectReason::NonFinite;
      result.log_alpha = kNegInf;
    } else {
      result.log_alpha = mala_log_acceptance(target, state.theta, mh_loss_theta, at_theta.grad, tau,
                                             loss_tau_mh, at_tau.grad, gamma, sigma);
    }
  }

  result.accepted = std::log(noise.uniform) <= result.log_alpha;
  if (result.accepted) {
    state.theta = std::move(tau);
    state.cached_loss = loss_tau_mh;
    if (!batched) state.cached_grad = std::move(at_tau.grad);
    result.reason = RejectReason::None;
  } else if (result.reason == RejectReason::None) {
    result.reason = RejectReason::MetropolisHastings;
  }
  if (mh_on_batch && !result.accepted) state.cached_loss = mh_loss_theta;
  result.loss = state.cached_loss;
  ++state.step;
  return result;
}

namespace {

// Moves theta by `delta`, refreshes the cache and fills the step result.
StepResult finish_deterministic(ChainState& state, const LossOracle& oracle,
                                const ParamVector& delta, double batch_loss, bool batched) {
  state.theta += delta;
  if (!all_finite(state.theta)) throw NumericalError("optimizer produced non-finite parameters");
  StepResult result;
  result.accepted = true;
  result.log_alpha = 0.0;
  result.u_norm = delta.norm();
  if (!batched) {
    auto at = oracle.value_and_grad(state.theta);
    state.cached_loss = at.loss;
    state.cached_grad = std::move(at.grad);
    result.loss = at.loss;
  } else {
    state.cached_loss = batch_loss;
    result.loss = batch_loss;
  }
  ++state.step;
  return result;
}

}  // namespace

StepResult adam_step(ChainState& state, const LossOracle& oracle, const AdamParams& p,
                     std::span<const std::size_t> batch) {
  const bool batched = !batch.empty();
  const LossAndGrad at = batched ? oracle.batch_value_and_grad(state.theta, batch)
                                 : LossAndGrad{state.cached_loss, state.cached_grad};
  state.momenta = adam_momentum_update(state.momenta, at.grad, p);
  const ParamVector u = adam_update_vector(state.momenta, state.step, p);
  return finish_deterministic(state, oracle, -u, at.loss, batched);
}

StepResult sgd_step(ChainState& state, const LossOracle& oracle, double gamma,
                    std::span<const std::size_t> batch) {
  const bool batched = !batch.empty();
  const LossAndGrad at = batched ? oracle.batch_value_and_grad(state.theta, batch)
                                 : LossAndGrad{state.cached_loss, state.cached_grad};
  return finish_deterministic(state, oracle, -gamma * at.grad, at.loss, batched);
}

StepResult sghmc_step(ChainState& state, const LossOracle& oracle, const SghmcParams& p,
                      double lambda, std::span<const std::size_t> batch) {
  const bool batched = !batch.empty();
  const LossAndGrad at = batched ? oracle.batch_value_and_grad(state.theta, batch)
                                 : LossAndGrad{state.cached_loss, state.cached_grad};
  if (state.velocity.size() != state.theta.size()) state.velocity = ParamVector::Zero(state.theta.size());
  const double noise_std = p.noise_scale * std::sqrt(2.0 * p.friction * p.gamma);
  const ParamVector z = state.rng.normal_vector(state.theta.size());
  state.velocity =
      (1.0 - p.friction) * state.velocity - (p.gamma * lambda) * at.grad + noise_std * z;
  return finish_deterministic(state, oracle, state.velocity, at.loss, batched);
}

}  // namespace adammcmc
