#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "cerank/common.hpp"
#include "cerank/ranker/classifier.hpp"

namespace cerank::ranker {

/// Fully connected ReLU network with a softmax head, trained with Adam on mean
/// cross-entropy plus 0.5 * l2 * sum ||W||^2 / batch.
///
/// All weights live in one flat vector: per layer, W (out x in, column-major) then b.
class Mlp final : public LocalClassifier {
 public:
  Mlp() = default;
  Mlp(std::vector<int> sizes, Eigen::VectorXd theta) : sizes_(std::move(sizes)), theta_(std::move(theta)) {
    if (sizes_.size() < 2 || static_cast<Eigen::Index>(param_count(sizes_)) != theta_.size())
      throw InputError("mlp parameter vector does not match layer sizes");
  }

  static std::vector<int> layer_sizes(std::size_t input_dim, const RankerConfig& cfg) {
    std::vector<int> s{static_cast<int>(input_dim)};
    for (int l = 0; l < cfg.hidden_layers; ++l) s.push_back(cfg.hidden_units);
    s.push_back(kNumClasses);
    return s;
  }

  static std::size_t param_count(const std::vector<int>& sizes) {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
      n += static_cast<std::size_t>(sizes[l + 1]) * (static_cast<std::size_t>(sizes[l]) + 1);
    return n;
  }

  /// Glorot-uniform weights, zero biases.
  static Eigen::VectorXd init_params(const std::vector<int>& sizes, Rng& rng) {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(param_count(sizes)));
    Eigen::Index off = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      const int in = sizes[l], out = sizes[l + 1];
      const double bound = std::sqrt(6.0 / (in + out));
      for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(in) * out; ++k) theta(off + k) = bound * (2.0 * uniform01(rng) - 1.0);
      off += static_cast<Eigen::Index>(in) * out + out;
    }
    return theta;
  }

  /// Loss on a batch; writes d loss / d theta into `grad` when non-null.
  static double loss_and_gradient(const std::vector<int>& sizes, const Eigen::VectorXd& theta, const Eigen::MatrixXd& x,
                                  const std::vector<int>& y, double l2, Eigen::VectorXd* grad) {
    const std::size_t layers = sizes.size() - 1;
    const auto batch = static_cast<double>(x.rows());
    std::vector<Eigen::MatrixXd> acts{x};
    double penalty = 0.0;
    Eigen::Index off = 0;
    std::vector<Eigen::Index> offsets;
    for (std::size_t l = 0; l < layers; ++l) {
      offsets.push_back(off);
      const int in = sizes[l], out = sizes[l + 1];
      Eigen::Map<const Eigen::MatrixXd> w(theta.data() + off, out, in);
      Eigen::Map<const Eigen::VectorXd> b(theta.data() + off + static_cast<Eigen::Index>(in) * out, out);
      Eigen::MatrixXd z = acts.back() * w.transpose();
      z.rowwise() += b.transpose();
      if (l + 1 < layers) z = z.cwiseMax(0.0);
      acts.push_back(std::move(z));
      penalty += w.squaredNorm();
      off += static_cast<Eigen::Index>(in) * out + out;
    }
    Eigen::MatrixXd& logits = acts.back();
    Eigen::VectorXd max = logits.rowwise().maxCoeff();
    Eigen::MatrixXd p = (logits.colwise() - max).array().exp();
    Eigen::VectorXd lse = p.rowwise().sum().array().log() + max.array();
    double loss = 0.0;
    for (Eigen::Index r = 0; r < x.rows(); ++r) loss += lse(r) - logits(r, class_index(y[static_cast<std::size_t>(r)]));
    loss = loss / batch + 0.5 * l2 * penalty / batch;
    if (!grad) return loss;

    grad->setZero(theta.size());
    p = p.array().colwise() / p.rowwise().sum().array();
    Eigen::MatrixXd delta = p;
    for (Eigen::Index r = 0; r < x.rows(); ++r) delta(r, class_index(y[static_cast<std::size_t>(r)])) -= 1.0;
    delta /= batch;
    for (std::size_t l = layers; l-- > 0;) {
      const int in = sizes[l], out = sizes[l + 1];
      const Eigen::Index o = offsets[l];
      Eigen::Map<const Eigen::MatrixXd> w(theta.data() + o, out, in);
      Eigen::Map<Eigen::MatrixXd> gw(grad->data() + o, out, in);
      Eigen::Map<Eigen::VectorXd> gb(grad->data() + o + static_cast<Eigen::Index>(in) * out, out);
      gw = delta.transpose() * acts[l] + (l2 / batch) * w;
      gb = delta.colwise().sum().transpose();
      if (l > 0) delta = ((delta * w).array() * (acts[l].array() > 0.0).cast<double>()).matrix();
    }
    return loss;
  }

  static Mlp fit(const Dataset& data, const RankerConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (data.size() == 0) throw InputError("empty training set");
    Rng rng(seed);
    const auto sizes = layer_sizes(data.dim(), cfg);
    Eigen::VectorXd theta = init_params(sizes, rng);
    Eigen::VectorXd m = Eigen::VectorXd::Zero(theta.size()), v = m, g;
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto bs = static_cast<std::size_t>(cfg.batch_size);
    double best = std::numeric_limits<double>::infinity();
    int stale = 0;
    long long step = 0;
    Eigen::MatrixXd xb;
    std::vector<int> yb;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      portable_shuffle(order.begin(), order.end(), rng);
      double epoch_loss = 0.0;
      for (std::size_t start = 0; start < order.size(); start += bs) {
        const std::size_t end = std::min(order.size(), start + bs);
        xb.resize(static_cast<Eigen::Index>(end - start), data.x.cols());
        yb.clear();
        for (std::size_t k = start; k < end; ++k) {
          xb.row(static_cast<Eigen::Index>(k - start)) = data.x.row(static_cast<Eigen::Index>(order[k]));
          yb.push_back(data.y[order[k]]);
        }
        epoch_loss += loss_and_gradient(sizes, theta, xb, yb, cfg.l2, &g) * static_cast<double>(end - start);
        ++step;
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseAbs2();
        const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
        theta.array() -= cfg.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.epsilon);
      }
      epoch_loss /= static_cast<double>(order.size());
      if (epoch_loss < best - cfg.tol) {
        best = epoch_loss;
        stale = 0;
      } else if (++stale >= cfg.patience) {
        break;
      }
    }
    return Mlp(sizes, std::move(theta));
  }

  Proba predict_proba(const Eigen::Ref<const Eigen::RowVectorXd>& x) const override {
    Eigen::VectorXd a = x.transpose();
    Eigen::Index off = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      const int in = sizes_[l], out = sizes_[l + 1];
      Eigen::Map<const Eigen::MatrixXd> w(theta_.data() + off, out, in);
      Eigen::Map<const Eigen::VectorXd> b(theta_.data() + off + static_cast<Eigen::Index>(in) * out, out);
      Eigen::VectorXd z = w * a + b;
      a = l + 2 < sizes_.size() ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
      off += static_cast<Eigen::Index>(in) * out + out;
    }
    a.array() -= a.maxCoeff();
    a = a.array().exp();
    a /= a.sum();
    return {a(0), a(1), a(2)};
  }

  std::size_t input_dim() const override { return sizes_.empty() ? 0 : static_cast<std::size_t>(sizes_.front()); }
  io::ArtifactKind artifact_kind() const override { return io::ArtifactKind::kMlp; }
  const std::vector<int>& sizes() const { return sizes_; }
  const Eigen::VectorXd& params() const { return theta_; }

  void write(io::BinaryWriter& out) const override {
    out.u64(sizes_.size());
    for (int s : sizes_) out.i32(s);
    out.f64s(std::vector<double>(theta_.data(), theta_.data() + theta_.size()));
  }

  static std::unique_ptr<Mlp> read(io::BinaryReader& in) {
    const auto n = in.u64();
    if (n < 2 || n > 64) throw InputError("corrupt mlp artifact");
    std::vector<int> sizes;
    for (std::uint64_t k = 0; k < n; ++k) {
      sizes.push_back(in.i32());
      if (sizes.back() < 1) throw InputError("corrupt mlp artifact");
    }
    auto theta = in.f64s();
    if (sizes.back() != kNumClasses) throw InputError("corrupt mlp artifact");
    return std::make_unique<Mlp>(std::move(sizes), Eigen::Map<Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size())));
  }

 private:
  std::vector<int> sizes_;
  Eigen::VectorXd theta_;
};

}  // namespace cerank::ranker
