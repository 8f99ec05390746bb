#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace adammcmc {

/// Flat vector of network or target parameters.
using ParamVector = Eigen::VectorXd;

/// Raised when a chain hits a state it cannot continue from (non-finite
/// parameters or a non-finite loss at the current state).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

/// Random source owned by a single chain. Copying the state copies the
/// stream position, so two copies produce identical draws.
class RngState {
 public:
  explicit RngState(std::uint64_t seed = 0) : engine_(seed) {}

  double normal() { return normal_(engine_); }

  /// Uniform on (0, 1]; a zero draw would accept proposals with alpha = 0.
  double uniform_open_closed() { return 1.0 - uniform_(engine_); }

  ParamVector normal_vector(Eigen::Index n) {
    ParamVector z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = normal();
    return z;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace adammcmc
