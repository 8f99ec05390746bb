#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "adammcmc/types.hpp"

namespace adammcmc {

struct LossAndGrad {
  double loss = 0.0;
  ParamVector grad;
};

/// Empirical loss L_n and its gradient.
///
/// Losses are averages over data points, so the loss on a batch of indices
/// is an unbiased estimate of the full-data loss. Analytic targets report a
/// single data point and ignore the batch contents.
class LossOracle {
 public:
  virtual ~LossOracle() = default;

  virtual Eigen::Index dim() const = 0;
  virtual std::size_t n_points() const = 0;

  virtual LossAndGrad value_and_grad(const ParamVector& theta) const = 0;
  virtual LossAndGrad batch_value_and_grad(const ParamVector& theta,
                                           std::span<const std::size_t> batch) const;

  virtual double eval(const ParamVector& theta) const { return value_and_grad(theta).loss; }
  virtual double eval_batch(const ParamVector& theta, std::span<const std::size_t> batch) const {
    return batch_value_and_grad(theta, batch).loss;
  }
  ParamVector grad(const ParamVector& theta) const { return value_and_grad(theta).grad; }
  ParamVector grad_batch(const ParamVector& theta, std::span<const std::size_t> batch) const {
    return batch_value_and_grad(theta, batch).grad;
  }
};

/// Full-data evaluation when `batch` is empty, batch evaluation otherwise.
LossAndGrad evaluate(const LossOracle& oracle, const ParamVector& theta,
                     std::span<const std::size_t> batch);

/// Uniform prior on the box [-R, R]^P.
class PriorBox {
 public:
  explicit PriorBox(double half_width = 100.0);
  double half_width() const { return half_width_; }
  bool contains(const ParamVector& theta) const;

 private:
  double half_width_;
};

/// Gibbs posterior exp(-lambda L_n) restricted to the prior box.
struct GibbsTarget {
  std::shared_ptr<const LossOracle> oracle;
  double lambda = 1.0;
  PriorBox prior;

  Eigen::Index dim() const { return oracle->dim(); }

  /// -lambda L_n(theta) inside the box, -inf outside.
  double log_density(const ParamVector& theta) const;
};

/// L(theta) = |theta|^2 / 2.
class QuadraticLoss final : public LossOracle {
 public:
  explicit QuadraticLoss(Eigen::Index dim);
  Eigen::Index dim() const override { return dim_; }
  std::size_t n_points() const override { return 1; }
  LossAndGrad value_and_grad(const ParamVector& theta) const override;

 private:
  Eigen::Index dim_;
};

/// L(theta) = <a, theta>; constant gradient.
class LinearLoss final : public LossOracle {
 public:
  explicit LinearLoss(ParamVector slope);
  Eigen::Index dim() const override { return slope_.size(); }
  std::size_t n_points() const override { return 1; }
  LossAndGrad value_and_grad(const ParamVector& theta) const override;

 private:
  ParamVector slope_;
};

/// Rosenbrock-type banana: for consecutive pairs (x, y),
/// L = x^2 / 2 + curvature (y - x^2)^2 / 2. An unpaired last coordinate
/// contributes z^2 / 2.
class BananaLoss final : public LossOracle {
 public:
  explicit BananaLoss(Eigen::Index dim, double curvature = 5.0);
  Eigen::Index dim() const override { return dim_; }
  std::size_t n_points() const override { return 1; }
  LossAndGrad value_and_grad(const ParamVector& theta) const override;

 private:
  Eigen::Index dim_;
  double curvature_;
};

GibbsTarget quadratic_target(Eigen::Index dim, double lambda, double half_width);
GibbsTarget linear_target(ParamVector slope, double lambda, double half_width);
GibbsTarget banana_target(Eigen::Index dim, double lambda, double half_width,
                          double curvature = 5.0);

/// Labeled 2-D points.
struct Dataset {
  Eigen::MatrixX2d inputs;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

/// Two interleaved noisy half-circles, `n` points split evenly over 2 classes.
Dataset make_two_moons(std::size_t n, double noise, std::uint64_t seed);

/// Points on an annulus around the two-moons support, far from any training data.
Eigen::MatrixX2d make_ood_inputs(std::size_t n, std::uint64_t seed, double inner_radius = 5.0,
                                 double outer_radius = 8.0);

/// CSV with header `x1,x2,label`.
void write_dataset_csv(std::ostream& out, const Dataset& data);
Dataset read_dataset_csv(std::istream& in);

/// Fully connected ReLU network with softmax cross-entropy loss.
///
/// Parameters are laid out layer by layer as a row-major weight matrix
/// (out x in) followed by the bias vector.
class MicroMlp final : public LossOracle {
 public:
  /// The network computes with weights `param_scale * theta`; the chain runs
  /// in theta. A small scale makes per-coordinate proposal noise of order one
  /// a moderate perturbation of the network.
  MicroMlp(std::vector<int> layer_sizes, Dataset train, double param_scale = 1.0);

  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  const Dataset& train() const { return train_; }
  int n_classes() const { return layer_sizes_.back(); }
  double param_scale() const { return param_scale_; }

  Eigen::Index dim() const override { return n_params_; }
  std::size_t n_points() const override { return train_.size(); }
  LossAndGrad value_and_grad(const ParamVector& theta) const override;
  LossAndGrad batch_value_and_grad(const ParamVector& theta,
                                   std::span<const std::size_t> batch) const override;
  double eval(const ParamVector& theta) const override;
  double eval_batch(const ParamVector& theta, std::span<const std::size_t> batch) const override;

  /// Class probabilities, one row per input.
  Eigen::MatrixXd forward(const ParamVector& theta, const Eigen::MatrixX2d& inputs) const;

  /// Fraction of inputs whose argmax class equals the label.
  double accuracy(const ParamVector& theta, const Dataset& data) const;

  /// Glorot-uniform network weights, zero biases (divided by param_scale).
  ParamVector init_params(RngState& rng) const;

 private:
  LossAndGrad loss_impl(const ParamVector& theta, const Eigen::MatrixX2d& x,
                        std::span<const int> y, bool with_grad) const;

  std::vector<int> layer_sizes_;
  Dataset train_;
  Eigen::Index n_params_;
  double param_scale_ = 1.0;
};

/// Mean cross-entropy of class probabilities against labels.
double cross_entropy(const Eigen::MatrixXd& probs, std::span<const int> labels);

/// Shuffled partition of {0..n-1} into batches of `batch_size` (the last may
/// be short). Indices inside a batch are sorted so that a batch covering all
/// points evaluates exactly like the full data.
std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size,
                                                   RngState& rng);

/// Endless batch stream; reshuffles at the start of every epoch.
class BatchIterator {
 public:
  BatchIterator(std::size_t n, std::size_t batch_size, std::uint64_t seed);
  std::span<const std::size_t> next();
  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t n_;
  std::size_t batch_size_;
  RngState rng_;
  std::vector<std::vector<std::size_t>> batches_;
  std::size_t cursor_ = 0;
  std::size_t epoch_ = 0;
};

}  // namespace adammcmc
