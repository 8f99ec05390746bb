#include "adammcmc/loss.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace adammcmc {

LossAndGrad LossOracle::batch_value_and_grad(const ParamVector& theta,
                                             std::span<const std::size_t> /*batch*/) const {
  return value_and_grad(theta);
}

LossAndGrad evaluate(const LossOracle& oracle, const ParamVector& theta,
                     std::span<const std::size_t> batch) {
  return batch.empty() ? oracle.value_and_grad(theta) : oracle.batch_value_and_grad(theta, batch);
}

PriorBox::PriorBox(double half_width) : half_width_(half_width) {
  if (!(half_width > 0.0)) throw std::invalid_argument("PriorBox: half_width must be positive");
}

bool PriorBox::contains(const ParamVector& theta) const {
  // NaN coordinates fail both comparisons and fall outside.
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (!(theta[i] >= -half_width_ && theta[i] <= half_width_)) return false;
  }
  return true;
}

double GibbsTarget::log_density(const ParamVector& theta) const {
  if (!prior.contains(theta)) return -std::numeric_limits<double>::infinity();
  return -lambda * oracle->eval(theta);
}

// ---------------------------------------------------------------------------
// Analytic targets

QuadraticLoss::QuadraticLoss(Eigen::Index dim) : dim_(dim) {
  if (dim < 1) throw std::invalid_argument("QuadraticLoss: dim must be >= 1");
}

LossAndGrad QuadraticLoss::value_and_grad(const ParamVector& theta) const {
  require_same_dim(theta.size(), dim_, "QuadraticLoss");
  return {0.5 * theta.squaredNorm(), theta};
}

LinearLoss::LinearLoss(ParamVector slope) : slope_(std::move(slope)) {
  if (slope_.size() < 1) throw std::invalid_argument("LinearLoss: dim must be >= 1");
}

LossAndGrad LinearLoss::value_and_grad(const ParamVector& theta) const {
  require_same_dim(theta.size(), slope_.size(), "LinearLoss");
  return {slope_.dot(theta), slope_};
}

BananaLoss::BananaLoss(Eigen::Index dim, double curvature) : dim_(dim), curvature_(curvature) {
  if (dim < 1) throw std::invalid_argument("BananaLoss: dim must be >= 1");
}

LossAndGrad BananaLoss::value_and_grad(const ParamVector& theta) const {
  require_same_dim(theta.size(), dim_, "BananaLoss");
  LossAndGrad out{0.0, ParamVector::Zero(dim_)};
  Eigen::Index i = 0;
  for (; i + 1 < dim_; i += 2) {
    const double x = theta[i];
    const double r = theta[i + 1] - x * x;
    out.loss += 0.5 * x * x + 0.5 * curvature_ * r * r;
    out.grad[i] = x - 2.0 * curvature_ * r * x;
    out.grad[i + 1] = curvature_ * r;
  }
  if (i < dim_) {
    out.loss += 0.5 * theta[i] * theta[i];
    out.grad[i] = theta[i];
  }
  return out;
}

GibbsTarget quadratic_target(Eigen::Index dim, double lambda, double half_width) {
  return {std::make_shared<QuadraticLoss>(dim), lambda, PriorBox(half_width)};
}

GibbsTarget linear_target(ParamVector slope, double lambda, double half_width) {
  return {std::make_shared<LinearLoss>(std::move(slope)), lambda, PriorBox(half_width)};
}

GibbsTarget banana_target(Eigen::Index dim, double lambda, double half_width, double curvature) {
  return {std::make_shared<BananaLoss>(dim, curvature), lambda, PriorBox(half_width)};
}

// ---------------------------------------------------------------------------
// Data

Dataset make_two_moons(std::size_t n, double noise, std::uint64_t seed) {
  RngState rng(seed);
  Dataset data;
  data.inputs.resize(static_cast<Eigen::Index>(n), 2);
  data.labels.resize(n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng.engine());
  for (std::size_t k = 0; k < n; ++k) {
    const int label = k < n / 2 ? 0 : 1;
    const double t = std::numbers::pi * (1.0 - rng.uniform_open_closed());
    double x = std::cos(t);
    double y = std::sin(t);
    if (label == 1) {
      x = 1.0 - x;
      y = 0.5 - y;
    }
    const auto row = static_cast<Eigen::Index>(order[k]);
    data.inputs(row, 0) = x + noise * rng.normal();
    data.inputs(row, 1) = y + noise * rng.normal();
    data.labels[order[k]] = label;
  }
  return data;
}

Eigen::MatrixX2d make_ood_inputs(std::size_t n, std::uint64_t seed, double inner_radius,
                                 double outer_radius) {
  RngState rng(seed);
  Eigen::MatrixX2d out(static_cast<Eigen::Index>(n), 2);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double angle = 2.0 * std::numbers::pi * rng.uniform_open_closed();
    const double radius =
        inner_radius + (outer_radius - inner_radius) * rng.uniform_open_closed();
    out(i, 0) = 0.5 + radius * std::cos(angle);
    out(i, 1) = 0.25 + radius * std::sin(angle);
  }
  return out;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  out << "x1,x2,label\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out << data.inputs(r, 0) << ',' << data.inputs(r, 1) << ',' << data.labels[i] << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("x1,x2,label", 0) != 0) {
    throw std::runtime_error("dataset csv: expected header 'x1,x2,label'");
  }
  std::vector<double> xs;
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string a, b, c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c)) {
      throw std::runtime_error("dataset csv: malformed line " + std::to_string(line_no));
    }
    try {
      xs.push_back(std::stod(a));
      xs.push_back(std::stod(b));
      labels.push_back(std::stoi(c));
    } catch (const std::exception&) {
      throw std::runtime_error("dataset csv: bad number on line " + std::to_string(line_no));
    }
  }
  Dataset data;
  data.inputs.resize(static_cast<Eigen::Index>(labels.size()), 2);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    data.inputs(static_cast<Eigen::Index>(i), 0) = xs[2 * i];
    data.inputs(static_cast<Eigen::Index>(i), 1) = xs[2 * i + 1];
  }
  data.labels = std::move(labels);
  return data;
}

// ---------------------------------------------------------------------------
// Micro-MLP

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Index count_params(const std::vector<int>& sizes) {
  Eigen::Index total = 0;
  for (std::size_t l = 1; l < sizes.size(); ++l) total += sizes[l] * (sizes[l - 1] + 1);
  return total;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    p.row(i) = (logits.row(i).array() - mx).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

}  // namespace

MicroMlp::MicroMlp(std::vector<int> layer_sizes, Dataset train, double param_scale)
    : layer_sizes_(std::move(layer_sizes)), train_(std::move(train)), param_scale_(param_scale) {
  if (!(param_scale_ > 0.0) || !std::isfinite(param_scale_)) {
    throw std::invalid_argument("MicroMlp: param_scale must be positive");
  }
  if (layer_sizes_.size() < 2) throw std::invalid_argument("MicroMlp: need at least 2 layers");
  if (layer_sizes_.front() != 2) throw std::invalid_argument("MicroMlp: input width must be 2");
  for (int s : layer_sizes_) {
    if (s < 1) throw std::invalid_argument("MicroMlp: layer sizes must be positive");
  }
  if (layer_sizes_.back() < 2) throw std::invalid_argument("MicroMlp: need at least 2 classes");
  for (int y : train_.labels) {
    if (y < 0 || y >= layer_sizes_.back()) {
      throw std::invalid_argument("MicroMlp: label out of range");
    }
  }
  n_params_ = count_params(layer_sizes_);
}

Eigen::MatrixXd MicroMlp::forward(const ParamVector& theta_in, const Eigen::MatrixX2d& inputs) const {
  require_same_dim(theta_in.size(), n_params_, "MicroMlp::forward");
  const ParamVector theta = param_scale_ * theta_in;
  Eigen::MatrixXd a = inputs;
  Eigen::Index offset = 0;
  const std::size_t n_layers = layer_sizes_.size() - 1;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const int in = layer_sizes_[l];
    const int out = layer_sizes_[l + 1];
    Eigen::Map<const RowMajorMatrix> w(theta.data() + offset, out, in);
    offset += static_cast<Eigen::Index>(out) * in;
    Eigen::Map<const Eigen::VectorXd> b(theta.data() + offset, out);
    offset += out;
    Eigen::MatrixXd z = a * w.transpose();
    z.rowwise() += b.transpose();
    a = l + 1 < n_layers ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
  }
  return softmax_rows(a);
}

double cross_entropy(const Eigen::MatrixXd& probs, std::span<const int> labels) {
  require_same_dim(probs.rows(), static_cast<Eigen::Index>(labels.size()), "cross_entropy");
  double total = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) total -= std::log(probs(i, labels[i]));
  return total / static_cast<double>(labels.size());
}

LossAndGrad MicroMlp::loss_impl(const ParamVector& theta_in, const Eigen::MatrixX2d& x,
                                std::span<const int> y, bool with_grad) const {
  require_same_dim(theta_in.size(), n_params_, "MicroMlp");
  const ParamVector theta = param_scale_ * theta_in;
  const std::size_t n_layers = layer_sizes_.size() - 1;
  const auto n = static_cast<double>(y.size());

  // Forward, keeping pre-activations for the backward pass.
  std::vector<Eigen::MatrixXd> acts;  // acts[l] is the input of layer l
  std::vector<Eigen::MatrixXd> pre;
  acts.reserve(n_layers);
  pre.reserve(n_layers);
  acts.emplace_back(x);
  std::vector<Eigen::Index> offsets(n_layers);
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const int in = layer_sizes_[l];
    const int out = layer_sizes_[l + 1];
    offsets[l] = offset;
    Eigen::Map<const RowMajorMatrix> w(theta.data() + offset, out, in);
    Eigen::Map<const Eigen::VectorXd> b(theta.data() + offset + static_cast<Eigen::Index>(out) * in,
                                        out);
    offset += static_cast<Eigen::Index>(out) * (in + 1);
    Eigen::MatrixXd z = acts.back() * w.transpose();
    z.rowwise() += b.transpose();
    pre.push_back(std::move(z));
    if (l + 1 < n_layers) acts.emplace_back(pre.back().cwiseMax(0.0));
  }

  // Log-sum-exp stabilized cross-entropy.
  const Eigen::MatrixXd& logits = pre.back();
  LossAndGrad out;
  double total = 0.0;
  Eigen::MatrixXd delta;  // dLoss/dlogits
  if (with_grad) delta.resize(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(i).array() - mx).exp().matrix();
    const double s = e.sum();
    total += mx + std::log(s) - logits(i, y[static_cast<std::size_t>(i)]);
    if (with_grad) {
      delta.row(i) = e / s;
      delta(i, y[static_cast<std::size_t>(i)]) -= 1.0;
    }
  }
  out.loss = total / n;
  if (!with_grad) return out;

  delta /= n;
  out.grad = ParamVector::Zero(n_params_);
  for (std::size_t l = n_layers; l-- > 0;) {
    const int in = layer_sizes_[l];
    const int outw = layer_sizes_[l + 1];
    Eigen::Map<RowMajorMatrix> gw(out.grad.data() + offsets[l], outw, in);
    Eigen::Map<Eigen::VectorXd> gb(out.grad.data() + offsets[l] + static_cast<Eigen::Index>(outw) * in,
                                   outw);
    gw.noalias() = delta.transpose() * acts[l];
    gb = delta.colwise().sum().transpose();
    if (l == 0) break;
    Eigen::Map<const RowMajorMatrix> w(theta.data() + offsets[l], outw, in);
    Eigen::MatrixXd back = delta * w;
    delta = (pre[l - 1].array() > 0.0).select(back, 0.0);
  }
  out.grad *= param_scale_;
  return out;
}

LossAndGrad MicroMlp::value_and_grad(const ParamVector& theta) const {
  return loss_impl(theta, train_.inputs, train_.labels, true);
}

double MicroMlp::eval(const ParamVector& theta) const {
  return loss_impl(theta, train_.inputs, train_.labels, false).loss;
}

namespace {

std::pair<Eigen::MatrixX2d, std::vector<int>> gather(const Dataset& data,
                                                     std::span<const std::size_t> batch) {
  Eigen::MatrixX2d x(static_cast<Eigen::Index>(batch.size()), 2);
  std::vector<int> y(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch[i] >= data.size()) throw std::out_of_range("batch index out of range");
    x.row(static_cast<Eigen::Index>(i)) = data.inputs.row(static_cast<Eigen::Index>(batch[i]));
    y[i] = data.labels[batch[i]];
  }
  return {std::move(x), std::move(y)};
}

}  // namespace

LossAndGrad MicroMlp::batch_value_and_grad(const ParamVector& theta,
                                           std::span<const std::size_t> batch) const {
  if (batch.empty()) return value_and_grad(theta);
  const auto [x, y] = gather(train_, batch);
  return loss_impl(theta, x, y, true);
}

double MicroMlp::eval_batch(const ParamVector& theta, std::span<const std::size_t> batch) const {
  if (batch.empty()) return eval(theta);
  const auto [x, y] = gather(train_, batch);
  return loss_impl(theta, x, y, false).loss;
}

double MicroMlp::accuracy(const ParamVector& theta, const Dataset& data) const {
  const Eigen::MatrixXd p = forward(theta, data.inputs);
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    Eigen::Index arg = 0;
    p.row(i).maxCoeff(&arg);
    if (arg == data.labels[static_cast<std::size_t>(i)]) ++hits;
  }
  return data.size() == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(data.size());
}

ParamVector MicroMlp::init_params(RngState& rng) const {
  ParamVector theta = ParamVector::Zero(n_params_);
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
    const int in = layer_sizes_[l];
    const int out = layer_sizes_[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(out) * in; ++k) {
      theta[offset + k] = limit * (2.0 * rng.uniform_open_closed() - 1.0);
    }
    offset += static_cast<Eigen::Index>(out) * (in + 1);
  }
  return theta / param_scale_;
}

// ---------------------------------------------------------------------------
// Batching

std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size,
                                                   RngState& rng) {
  if (batch_size < 1 || batch_size > n) {
    throw std::invalid_argument("make_batches: batch_size must be in [1, n]");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng.engine());
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t stop = std::min(n, start + batch_size);
    std::vector<std::size_t> b(order.begin() + static_cast<std::ptrdiff_t>(start),
                               order.begin() + static_cast<std::ptrdiff_t>(stop));
    std::sort(b.begin(), b.end());
    batches.push_back(std::move(b));
  }
  return batches;
}

BatchIterator::BatchIterator(std::size_t n, std::size_t batch_size, std::uint64_t seed)
    : n_(n), batch_size_(batch_size), rng_(seed) {
  batches_ = make_batches(n_, batch_size_, rng_);
}

std::span<const std::size_t> BatchIterator::next() {
  if (cursor_ == batches_.size()) {
    batches_ = make_batches(n_, batch_size_, rng_);
    cursor_ = 0;
    ++epoch_;
  }
  return batches_[cursor_++];
}

}  // namespace adammcmc
