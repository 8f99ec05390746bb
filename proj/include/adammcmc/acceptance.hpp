#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "adammcmc/config.hpp"

namespace adammcmc {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// "[PASS] 3 detailed-balance (1.2 s): detail"
std::string format_result(const CriterionResult& r);

struct SuiteOptions {
  bool quick = false;  ///< skip the micro-MLP trend criteria
  /// When set, per-criterion data (TV trace, scan tables, spreads) is written here.
  std::optional<std::filesystem::path> out_dir;
  /// Called as each criterion finishes.
  std::function<void(const CriterionResult&)> on_result;
  int jobs = 1;
};

CriterionResult check_rank1_algebra();
CriterionResult check_proposal_sampling();
CriterionResult check_detailed_balance_criterion();
CriterionResult check_posterior_moments();
CriterionResult check_tv_convergence(const SuiteOptions& opts = {});
CriterionResult check_mala_equivalence();
CriterionResult check_acceptance_trends(const SuiteOptions& opts = {});
CriterionResult check_spread_trend(const SuiteOptions& opts = {});
CriterionResult check_stochastic_mh(const SuiteOptions& opts = {});
CriterionResult check_determinism();

/// Runs criteria 1-10 (1-6 and 10 with `quick`).
std::vector<CriterionResult> run_acceptance_suite(const SuiteOptions& opts = {});

/// Micro-MLP base configuration shared by the trend criteria.
RunConfig desk_mlp_config();
/// desk_mlp_config with minibatches, for the stochastic vs full M-H comparison.
RunConfig desk_mh_config();

}  // namespace adammcmc
