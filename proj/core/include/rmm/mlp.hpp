#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rmm {

/// Fully connected network with ReLU hidden layers and an affine output
/// layer, operating on already normalised inputs.
class Mlp {
 public:
  Mlp() = default;
  /// He-initialised weights from a seeded generator.
  Mlp(std::vector<int> layer_sizes, std::uint64_t seed);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  std::vector<Eigen::MatrixXd>& weights() { return w_; }
  std::vector<Eigen::VectorXd>& biases() { return b_; }
  const std::vector<Eigen::MatrixXd>& weights() const { return w_; }
  const std::vector<Eigen::VectorXd>& biases() const { return b_; }

  /// Column-wise forward pass: inputs (in × N) → outputs (out × N).
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  /// Scalar output for one input with its input gradient.
  double value_and_gradient(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const;
  /// Output of hidden layer `layer` (1-based) given the previous layer's
  /// activation; exposed for the homogeneity property.
  Eigen::VectorXd layer(int layer, const Eigen::VectorXd& h) const;

  /// Mean squared error gradient over a batch; returns the loss.
  double gradient(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                  std::vector<Eigen::MatrixXd>& gw, std::vector<Eigen::VectorXd>& gb) const;

 private:
  std::vector<int> sizes_;
  std::vector<Eigen::MatrixXd> w_;
  std::vector<Eigen::VectorXd> b_;
};

struct AdamOptions {
  int epochs = 200;
  int batch_size = 64;
  double learning_rate = 1e-3;
  /// Learning rate decays by cosine annealing to this fraction.
  double final_lr_fraction = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 7;
};

/// Mini-batch Adam on mean squared error. Inputs are columns of x; y is
/// 1 × N. Returns the per-epoch training loss. Throws NumericError when the
/// loss becomes NaN.
std::vector<double> train_adam(Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                               const AdamOptions& options);

/// Coefficient of determination of predictions against truth.
double r_squared(const Eigen::VectorXd& truth, const Eigen::VectorXd& prediction);

}  // namespace rmm
