#include "rmm/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "rmm/error.hpp"

namespace rmm {

Mlp::Mlp(std::vector<int> sizes, std::uint64_t seed) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw ValidationError("mlp: need at least input and output layers");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (std::size_t i = 1; i < sizes_.size(); ++i) {
    const double sd = std::sqrt(2.0 / sizes_[i - 1]);
    Eigen::MatrixXd w(sizes_[i], sizes_[i - 1]);
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = sd * nd(rng);
    w_.push_back(std::move(w));
    b_.push_back(Eigen::VectorXd::Zero(sizes_[i]));
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd h = x;
  for (std::size_t l = 0; l < w_.size(); ++l) {
    Eigen::MatrixXd z = w_[l] * h;
    z.colwise() += b_[l];
    if (l + 1 < w_.size()) z = z.cwiseMax(0.0);
    h = std::move(z);
  }
  return h;
}

Eigen::VectorXd Mlp::layer(int l, const Eigen::VectorXd& h) const {
  Eigen::VectorXd z = w_.at(l - 1) * h + b_[l - 1];
  if (l < static_cast<int>(w_.size())) z = z.cwiseMax(0.0);
  return z;
}

double Mlp::value_and_gradient(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const {
  std::vector<Eigen::VectorXd> z(w_.size());
  Eigen::VectorXd h = x;
  for (std::size_t l = 0; l < w_.size(); ++l) {
    z[l] = w_[l] * h + b_[l];
    h = l + 1 < w_.size() ? Eigen::VectorXd(z[l].cwiseMax(0.0)) : z[l];
  }
  if (grad) {
    Eigen::RowVectorXd g = w_.back().row(0);
    for (int l = static_cast<int>(w_.size()) - 2; l >= 0; --l) {
      for (Eigen::Index i = 0; i < g.size(); ++i) {
        if (z[l][i] <= 0.0) g[i] = 0.0;
      }
      g = g * w_[l];
    }
    *grad = g.transpose();
  }
  return h[0];
}

double Mlp::gradient(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                     std::vector<Eigen::MatrixXd>& gw, std::vector<Eigen::VectorXd>& gb) const {
  const std::size_t nl = w_.size();
  const double n = static_cast<double>(x.cols());
  std::vector<Eigen::MatrixXd> act(nl + 1);
  act[0] = x;
  for (std::size_t l = 0; l < nl; ++l) {
    Eigen::MatrixXd z = w_[l] * act[l];
    z.colwise() += b_[l];
    if (l + 1 < nl) z = z.cwiseMax(0.0);
    act[l + 1] = std::move(z);
  }
  Eigen::MatrixXd delta = act[nl] - y;
  const double loss = delta.squaredNorm() / n;
  delta *= 2.0 / n;
  gw.resize(nl);
  gb.resize(nl);
  for (int l = static_cast<int>(nl) - 1; l >= 0; --l) {
    gw[l] = delta * act[l].transpose();
    gb[l] = delta.rowwise().sum();
    if (l > 0) {
      delta = (w_[l].transpose() * delta).cwiseProduct(
          (act[l].array() > 0.0).cast<double>().matrix());
    }
  }
  return loss;
}

std::vector<double> train_adam(Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                               const AdamOptions& o) {
  const Eigen::Index n = x.cols();
  if (n == 0 || y.cols() != n) throw ValidationError("train: empty or mismatched data");
  auto& w = net.weights();
  auto& b = net.biases();
  std::vector<Eigen::MatrixXd> mw, vw, gw;
  std::vector<Eigen::VectorXd> mb, vb, gb;
  for (std::size_t l = 0; l < w.size(); ++l) {
    mw.push_back(Eigen::MatrixXd::Zero(w[l].rows(), w[l].cols()));
    vw.push_back(mw.back());
    mb.push_back(Eigen::VectorXd::Zero(b[l].size()));
    vb.push_back(mb.back());
  }
  std::mt19937_64 rng(o.seed);
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> trace;
  long step = 0;
  const int bs = std::max(1, o.batch_size);
  Eigen::MatrixXd xb, yb;
  for (int epoch = 0; epoch < o.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double t = o.epochs > 1 ? static_cast<double>(epoch) / (o.epochs - 1) : 1.0;
    const double lr = o.learning_rate * (o.final_lr_fraction +
                                         (1.0 - o.final_lr_fraction) * 0.5 *
                                             (1.0 + std::cos(std::numbers::pi * t)));
    double loss_sum = 0.0;
    for (Eigen::Index start = 0; start < n; start += bs) {
      const Eigen::Index m = std::min<Eigen::Index>(bs, n - start);
      xb.resize(x.rows(), m);
      yb.resize(y.rows(), m);
      for (Eigen::Index j = 0; j < m; ++j) {
        xb.col(j) = x.col(order[start + j]);
        yb.col(j) = y.col(order[start + j]);
      }
      const double loss = net.gradient(xb, yb, gw, gb);
      if (!std::isfinite(loss)) {
        throw NumericError("train: loss diverged (lr=" + std::to_string(o.learning_rate) +
                           ", batch=" + std::to_string(bs) + ", epoch=" +
                           std::to_string(epoch) + ")");
      }
      loss_sum += loss * static_cast<double>(m);
      ++step;
      const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(step));
      for (std::size_t l = 0; l < w.size(); ++l) {
        mw[l] = o.beta1 * mw[l] + (1.0 - o.beta1) * gw[l];
        vw[l] = o.beta2 * vw[l] + (1.0 - o.beta2) * gw[l].cwiseAbs2();
        w[l].array() -= lr * (mw[l].array() / c1) / ((vw[l].array() / c2).sqrt() + o.epsilon);
        mb[l] = o.beta1 * mb[l] + (1.0 - o.beta1) * gb[l];
        vb[l] = o.beta2 * vb[l] + (1.0 - o.beta2) * gb[l].cwiseAbs2();
        b[l].array() -= lr * (mb[l].array() / c1) / ((vb[l].array() / c2).sqrt() + o.epsilon);
      }
    }
    trace.push_back(loss_sum / static_cast<double>(n));
  }
  return trace;
}

double r_squared(const Eigen::VectorXd& truth, const Eigen::VectorXd& pred) {
  const double mean = truth.mean();
  const double ss_tot = (truth.array() - mean).square().sum();
  const double ss_res = (truth - pred).squaredNorm();
  return ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
}

}  // namespace rmm
