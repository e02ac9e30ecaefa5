#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace pam::clf::mlp {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// One tanh hidden layer feeding a sigmoid output unit.
struct Params {
  Eigen::MatrixXd w1;  // dim x hidden
  Eigen::VectorXd b1;  // hidden
  Eigen::VectorXd w2;  // hidden
  double b2 = 0.0;

  std::size_t size() const;
  std::vector<double> flatten() const;
  // Inverse of flatten for the same shape.
  void assign(const std::vector<double>& flat);
};

// Glorot-uniform weights, zero biases.
Params init(std::size_t dim, std::size_t hidden, std::uint64_t seed);

Eigen::VectorXd forward(const Params& p, const RowMatrix& x);

struct LossGradient {
  double loss = 0.0;
  Params grad;
};

// Mean binary cross-entropy plus (l2 / 2)(|w1|^2 + |w2|^2), with the exact
// backpropagated gradient.
LossGradient loss_and_gradient(const Params& p, const RowMatrix& x, const Eigen::VectorXd& y,
                               double l2);

}  // namespace pam::clf::mlp
