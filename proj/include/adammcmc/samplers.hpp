#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>

#include "adammcmc/loss.hpp"
#include "adammcmc/prolate.hpp"
#include "adammcmc/types.hpp"

namespace adammcmc {

/// How the proposal offset u_k is formed from the momenta.
enum class DriftRule {
  Adam,           ///< bias-corrected m1 / (sqrt(bias-corrected m2) + delta)
  ScaledGradient  ///< gamma * bias-corrected m1; with beta1 = 0 this is gamma * grad
};

struct AdamParams {
  double gamma = 1e-3;
  double beta1 = 0.99;
  double beta2 = 0.99;
  double delta = 1e-8;
  DriftRule drift = DriftRule::Adam;

  void validate() const;
};

struct ProposalParams {
  double sigma = 2.0;
  double sigma_dir = 0.0;

  void validate() const;
};

enum class CorrectionMode { Unit, Full };

/// Momentum-noise levels rho_1, rho_2 used by the full correction term.
struct CorrectionParams {
  CorrectionMode mode = CorrectionMode::Unit;
  double rho1 = 1e-2;
  double rho2 = 1e-2;
  /// Perturb the updated momenta with N(0, rho_l^2) noise. Together with the
  /// full correction this is the augmented chain that leaves the posterior
  /// exactly invariant; the practical sampler keeps the momenta deterministic.
  bool randomize_momenta = false;

  /// rho_l^2 = (1 - beta_l^2) s^2, the parameterization under which the
  /// augmented chain keeps the Gibbs posterior invariant.
  static CorrectionParams full_from_s2(double s2, const AdamParams& adam);

  /// Stationary momentum variance s_l^2 = rho_l^2 / (1 - beta_l^2).
  double s2(int l, const AdamParams& adam) const;

  void validate() const;
};

/// First and second Adam moments.
struct Momenta {
  ParamVector first;
  ParamVector second;

  static Momenta zeros(Eigen::Index dim) {
    return {ParamVector::Zero(dim), ParamVector::Zero(dim)};
  }
};

struct ChainState {
  ParamVector theta;
  Momenta momenta;
  std::int64_t step = 0;
  double cached_loss = 0.0;  ///< full-data loss at theta
  ParamVector cached_grad;   ///< full-data gradient at theta
  ParamVector velocity;      ///< sgHMC auxiliary velocity
  RngState rng;
};

/// Zero momenta, step 0, loss and gradient cached at theta0.
ChainState make_chain_state(const LossOracle& oracle, ParamVector theta0, std::uint64_t seed);

enum class RejectReason { None, MetropolisHastings, Boundary, NonFinite };

struct StepResult {
  bool accepted = false;
  double log_alpha = 0.0;
  double loss = 0.0;    ///< loss at the post-step parameters
  double u_norm = 0.0;  ///< norm of the deterministic update
  RejectReason reason = RejectReason::None;
};

/// Pre-drawn randomness for one Metropolis-Hastings step.
struct StepNoise {
  ParamVector z;        ///< isotropic standard normals
  double xi = 0.0;      ///< directional standard normal
  double uniform = 1.0; ///< acceptance draw in (0, 1]
  ParamVector momentum1;  ///< momentum perturbations, only with randomize_momenta
  ParamVector momentum2;
};

/// Draw order: momentum perturbations when `momenta` is set, then z, then xi
/// only when `directional`, then the acceptance uniform.
StepNoise draw_step_noise(RngState& rng, Eigen::Index dim, bool directional, bool momenta = false);

/// Which data the step evaluates.
///
/// An empty batch means full data. With a batch, the proposal gradient always
/// comes from the batch; the Metropolis-Hastings losses come from the same
/// batch when `batch_mh` is set and from the full data otherwise.
struct EvalPlan {
  std::span<const std::size_t> batch;
  bool batch_mh = true;
};

Momenta adam_momentum_update(const Momenta& m, const ParamVector& grad, const AdamParams& p);

/// u_k(m) using bias-correction exponent k + 1.
ParamVector adam_update_vector(const Momenta& m, std::int64_t k, const AdamParams& p);

/// Log of the correction factor C: the ratio of the stationary momentum
/// densities centered at grad(tau) and grad(theta).
double correction_log_term(const Momenta& m_next, const ParamVector& grad_theta,
                           const ParamVector& grad_tau, const CorrectionParams& cp,
                           const AdamParams& ap);

double correction_term_C(const Momenta& m_next, const ParamVector& grad_theta,
                         const ParamVector& grad_tau, const CorrectionParams& cp,
                         const AdamParams& ap);

/// Everything the acceptance ratio of one AdamMCMC move depends on.
struct MoveTerms {
  const ParamVector& theta;
  double loss_theta;
  const ParamVector& grad_theta;
  const ParamVector& tau;
  double loss_tau;
  const ParamVector& grad_tau;
  const Momenta& m_next;
  const ParamVector& u;
};

/// log alpha for moving theta -> tau with shared momenta m_next and update u.
/// Returns a value in [-inf, 0].
double adammcmc_log_acceptance(const MoveTerms& move, const GibbsTarget& target,
                               const ProposalParams& pp, const CorrectionParams& cp,
                               const AdamParams& ap);

using AcceptanceFunction = std::function<double(const MoveTerms&, const GibbsTarget&,
                                                const ProposalParams&, const CorrectionParams&,
                                                const AdamParams&)>;

struct AdamMcmcParams {
  AdamParams adam;
  ProposalParams proposal;
  CorrectionParams correction;
};

StepResult adammcmc_step(ChainState& state, const GibbsTarget& target, const AdamMcmcParams& params,
                         const EvalPlan& plan = {});
StepResult adammcmc_step(ChainState& state, const GibbsTarget& target, const AdamMcmcParams& params,
                         const StepNoise& noise, const EvalPlan& plan = {});

/// MALA: proposal N(theta - gamma grad, sigma^2 I), Metropolis-Hastings
/// correction with the gradient at tau for the backward density.
StepResult mala_step(ChainState& state, const GibbsTarget& target, double gamma, double sigma,
                     const EvalPlan& plan = {});
StepResult mala_step(ChainState& state, const GibbsTarget& target, double gamma, double sigma,
                     const StepNoise& noise, const EvalPlan& plan = {});

/// Log acceptance of MALA for theta -> tau (isotropic proposals).
double mala_log_acceptance(const GibbsTarget& target, const ParamVector& theta, double loss_theta,
                           const ParamVector& grad_theta, const ParamVector& tau, double loss_tau,
                           const ParamVector& grad_tau, double gamma, double sigma);

struct SghmcParams {
  double gamma = 1e-3;     ///< learning rate
  double friction = 0.05;  ///< velocity damping per step
  double noise_scale = 1.0;
};

/// Deterministic Adam: theta' = theta - u_k(m').
StepResult adam_step(ChainState& state, const LossOracle& oracle, const AdamParams& p,
                     std::span<const std::size_t> batch = {});
StepResult sgd_step(ChainState& state, const LossOracle& oracle, double gamma,
                    std::span<const std::size_t> batch = {});
/// Friction-damped velocity update with injected noise for the Gibbs target
/// at inverse temperature lambda.
StepResult sghmc_step(ChainState& state, const LossOracle& oracle, const SghmcParams& p,
                      double lambda, std::span<const std::size_t> batch = {});

}  // namespace adammcmc
