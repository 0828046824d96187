#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cerank/common.hpp"
#include "cerank/io.hpp"
#include "cerank/ranker/dataset.hpp"

namespace cerank::ranker {

enum class ClassifierKind { kLogReg, kForest, kMlp };

inline std::string to_string(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::kLogReg: return "logreg";
    case ClassifierKind::kForest: return "forest";
    case ClassifierKind::kMlp: return "mlp";
  }
  return "?";
}

inline ClassifierKind parse_kind(const std::string& s) {
  if (s == "logreg" || s == "lr") return ClassifierKind::kLogReg;
  if (s == "forest" || s == "rf") return ClassifierKind::kForest;
  if (s == "mlp") return ClassifierKind::kMlp;
  throw InputError("unknown classifier '" + s + "' (expected logreg, forest or mlp)");
}

/// Hyperparameters for all local rankers. Each classifier reads its own group.
struct RankerConfig {
  // logistic regression: multinomial, L1 penalty with strength 1/C
  double C = 0.1;
  double tol = 1e-4;
  int max_iter = 1000;
  // random forest
  int trees = 200;
  int min_leaf = 5;
  int max_features = 0;  // 0: floor(sqrt(d))
  int max_depth = 0;     // 0: unlimited
  int max_bins = 255;
  bool bootstrap = true;
  int threads = 1;
  // multilayer perceptron
  int hidden_layers = 3;
  int hidden_units = 100;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 32;
  int epochs = 50;
  double l2 = 1e-4;
  int patience = 10;

  /// Sets one field from its textual key; used by config files and grid specs.
  void set(const std::string& key, const std::string& value) {
    auto d = [&] { return io::parse_double(value, key); };
    auto i = [&] { return static_cast<int>(io::parse_int(value, key)); };
    if (key == "C") C = d();
    else if (key == "tol") tol = d();
    else if (key == "max_iter") max_iter = i();
    else if (key == "trees") trees = i();
    else if (key == "min_leaf") min_leaf = i();
    else if (key == "max_features") max_features = i();
    else if (key == "max_depth") max_depth = i();
    else if (key == "max_bins") max_bins = i();
    else if (key == "bootstrap") bootstrap = i() != 0;
    else if (key == "threads") threads = i();
    else if (key == "hidden_layers") hidden_layers = i();
    else if (key == "hidden_units") hidden_units = i();
    else if (key == "learning_rate") learning_rate = d();
    else if (key == "beta1") beta1 = d();
    else if (key == "beta2") beta2 = d();
    else if (key == "epsilon") epsilon = d();
    else if (key == "batch_size") batch_size = i();
    else if (key == "epochs") epochs = i();
    else if (key == "l2") l2 = d();
    else if (key == "patience") patience = i();
    else throw InputError("unknown ranker hyperparameter '" + key + "'");
  }

  void validate() const {
    if (!(C > 0.0)) throw InputError("C must be > 0");
    if (trees < 1 || min_leaf < 1 || max_bins < 2 || max_bins > 255) throw InputError("invalid forest settings");
    if (hidden_layers < 0 || hidden_units < 1 || batch_size < 1 || epochs < 1) throw InputError("invalid mlp settings");
  }

  nlohmann::json to_json(ClassifierKind kind) const {
    switch (kind) {
      case ClassifierKind::kLogReg: return {{"C", C}, {"penalty", "l1"}, {"tol", tol}, {"max_iter", max_iter}};
      case ClassifierKind::kForest:
        return {{"trees", trees}, {"criterion", "gini"}, {"min_leaf", min_leaf}, {"max_features", max_features},
                {"max_depth", max_depth}, {"max_bins", max_bins}, {"bootstrap", bootstrap}};
      case ClassifierKind::kMlp:
        return {{"hidden_layers", hidden_layers}, {"hidden_units", hidden_units}, {"learning_rate", learning_rate},
                {"beta1", beta1}, {"beta2", beta2}, {"epsilon", epsilon}, {"batch_size", batch_size},
                {"epochs", epochs}, {"l2", l2}, {"patience", patience}};
    }
    return {};
  }
};

using Proba = std::array<double, kNumClasses>;

/// A fitted 3-class local ranker. Prediction is a pure function of the fitted state.
class LocalClassifier {
 public:
  virtual ~LocalClassifier() = default;
  virtual Proba predict_proba(const Eigen::Ref<const Eigen::RowVectorXd>& x) const = 0;
  virtual std::size_t input_dim() const = 0;
  virtual void write(io::BinaryWriter& w) const = 0;
  virtual io::ArtifactKind artifact_kind() const = 0;

  /// Hard label in {-1, 0, +1}; ties between class probabilities go to the lower index.
  int predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    const auto p = predict_proba(x);
    int best = 0;
    for (int k = 1; k < kNumClasses; ++k)
      if (p[k] > p[best]) best = k;
    return class_label(best);
  }

  std::vector<int> predict_all(const Matrix& x) const {
    std::vector<int> out(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index r = 0; r < x.rows(); ++r) out[static_cast<std::size_t>(r)] = predict(x.row(r));
    return out;
  }
};

}  // namespace cerank::ranker
