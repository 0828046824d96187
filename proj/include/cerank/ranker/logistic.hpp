#pragma once

#include <cmath>
#include <memory>

#include <Eigen/Dense>

#include "cerank/ranker/classifier.hpp"

namespace cerank::ranker {

/// Multinomial logistic regression with an L1 penalty on the weights (intercepts are not
/// penalized). Minimizes mean cross-entropy + ||W||_1 / (C n) by accelerated proximal
/// gradient with backtracking.
class LogisticRegression final : public LocalClassifier {
 public:
  LogisticRegression() = default;
  LogisticRegression(Eigen::MatrixXd w, Eigen::VectorXd b) : w_(std::move(w)), b_(std::move(b)) {}

  static LogisticRegression fit(const Dataset& data, const RankerConfig& cfg) {
    const auto n = static_cast<double>(data.size());
    const auto d = static_cast<Eigen::Index>(data.dim());
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(data.size()), kNumClasses);
    for (std::size_t i = 0; i < data.size(); ++i) y(static_cast<Eigen::Index>(i), class_index(data.y[i])) = 1.0;
    const double lambda = 1.0 / (cfg.C * n);

    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(kNumClasses, d), w_prev = w, v_w = w;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(kNumClasses), b_prev = b, v_b = b;
    double step_scale = 1.0;  // Lipschitz estimate
    double momentum = 1.0;
    Eigen::MatrixXd grad_w;
    Eigen::VectorXd grad_b;
    for (int iter = 0; iter < cfg.max_iter; ++iter) {
      const double f_v = smooth_loss(data.x, y, v_w, v_b, &grad_w, &grad_b);
      Eigen::MatrixXd w_next;
      Eigen::VectorXd b_next;
      for (;;) {
        const double t = 1.0 / step_scale;
        w_next = soft_threshold(v_w - t * grad_w, t * lambda);
        b_next = v_b - t * grad_b;
        const double f_next = smooth_loss(data.x, y, w_next, b_next, nullptr, nullptr);
        const double lin = ((w_next - v_w).cwiseProduct(grad_w)).sum() + (b_next - v_b).dot(grad_b);
        const double quad = 0.5 * step_scale * ((w_next - v_w).squaredNorm() + (b_next - v_b).squaredNorm());
        if (f_next <= f_v + lin + quad + 1e-12 || step_scale > 1e12) break;
        step_scale *= 2.0;
      }
      const double change = std::max((w_next - w).cwiseAbs().maxCoeff(), (b_next - b).cwiseAbs().maxCoeff());
      w_prev = w;
      b_prev = b;
      w = std::move(w_next);
      b = std::move(b_next);
      if (change < cfg.tol) break;
      const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
      const double beta = (momentum - 1.0) / next_momentum;
      v_w = w + beta * (w - w_prev);
      v_b = b + beta * (b - b_prev);
      momentum = next_momentum;
    }
    return LogisticRegression(std::move(w), std::move(b));
  }

  Proba predict_proba(const Eigen::Ref<const Eigen::RowVectorXd>& x) const override {
    Eigen::VectorXd z = w_ * x.transpose() + b_;
    z.array() -= z.maxCoeff();
    z = z.array().exp();
    z /= z.sum();
    return {z(0), z(1), z(2)};
  }

  std::size_t input_dim() const override { return static_cast<std::size_t>(w_.cols()); }
  io::ArtifactKind artifact_kind() const override { return io::ArtifactKind::kLogisticRegression; }
  const Eigen::MatrixXd& weights() const { return w_; }

  void write(io::BinaryWriter& out) const override {
    out.u64(static_cast<std::uint64_t>(w_.cols()));
    out.f64s(std::vector<double>(w_.data(), w_.data() + w_.size()));
    out.f64s(std::vector<double>(b_.data(), b_.data() + b_.size()));
  }

  static std::unique_ptr<LogisticRegression> read(io::BinaryReader& in) {
    const auto d = static_cast<Eigen::Index>(in.u64());
    auto w = in.f64s();
    auto b = in.f64s();
    if (static_cast<Eigen::Index>(w.size()) != kNumClasses * d || b.size() != kNumClasses)
      throw InputError("corrupt logistic regression artifact");
    return std::make_unique<LogisticRegression>(Eigen::Map<Eigen::MatrixXd>(w.data(), kNumClasses, d),
                                                Eigen::Map<Eigen::VectorXd>(b.data(), kNumClasses));
  }

 private:
  static Eigen::MatrixXd soft_threshold(const Eigen::MatrixXd& m, double t) {
    return m.unaryExpr([t](double v) { return v > t ? v - t : (v < -t ? v + t : 0.0); });
  }

  // Mean cross-entropy; fills gradients when requested.
  static double smooth_loss(const Matrix& x, const Eigen::MatrixXd& y, const Eigen::MatrixXd& w, const Eigen::VectorXd& b,
                            Eigen::MatrixXd* grad_w, Eigen::VectorXd* grad_b) {
    const double n = static_cast<double>(x.rows());
    Eigen::MatrixXd z = x * w.transpose();
    z.rowwise() += b.transpose();
    Eigen::VectorXd max = z.rowwise().maxCoeff();
    z.colwise() -= max;
    Eigen::MatrixXd e = z.array().exp();
    Eigen::VectorXd sum = e.rowwise().sum();
    const double loss = -((z.array() * y.array()).rowwise().sum() - sum.array().log()).sum() / n;
    if (grad_w) {
      Eigen::MatrixXd p = e.array().colwise() / sum.array();
      Eigen::MatrixXd diff = (p - y) / n;
      *grad_w = diff.transpose() * x;
      *grad_b = diff.colwise().sum().transpose();
    }
    return loss;
  }

  Eigen::MatrixXd w_;  // classes x d
  Eigen::VectorXd b_;
};

}  // namespace cerank::ranker
