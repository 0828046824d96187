#pragma once

#include <memory>

#include "cerank/ranker/classifier.hpp"
#include "cerank/ranker/forest.hpp"
#include "cerank/ranker/logistic.hpp"
#include "cerank/ranker/mlp.hpp"

namespace cerank::ranker {

inline std::unique_ptr<LocalClassifier> fit_classifier(ClassifierKind kind, const Dataset& data, const RankerConfig& cfg,
                                                       std::uint64_t seed) {
  cfg.validate();
  if (distinct_labels(data.y) < 2) throw InputError("degenerate labels");
  switch (kind) {
    case ClassifierKind::kLogReg: return std::make_unique<LogisticRegression>(LogisticRegression::fit(data, cfg));
    case ClassifierKind::kForest: return std::make_unique<RandomForest>(RandomForest::fit(data, cfg, seed));
    case ClassifierKind::kMlp: return std::make_unique<Mlp>(Mlp::fit(data, cfg, seed));
  }
  throw Error("unhandled classifier kind");
}

inline ClassifierKind kind_of(io::ArtifactKind a) {
  switch (a) {
    case io::ArtifactKind::kLogisticRegression: return ClassifierKind::kLogReg;
    case io::ArtifactKind::kRandomForest: return ClassifierKind::kForest;
    case io::ArtifactKind::kMlp: return ClassifierKind::kMlp;
    default: throw InputError("artifact is not a ranker model");
  }
}

inline std::unique_ptr<LocalClassifier> read_classifier(io::BinaryReader& in) {
  switch (kind_of(in.kind())) {
    case ClassifierKind::kLogReg: return LogisticRegression::read(in);
    case ClassifierKind::kForest: return RandomForest::read(in);
    case ClassifierKind::kMlp: return Mlp::read(in);
  }
  throw Error("unhandled classifier kind");
}

}  // namespace cerank::ranker
