#pragma once

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "cerank/features/neighborhood.hpp"
#include "cerank/io.hpp"
#include "cerank/metrics.hpp"
#include "cerank/ranker/train.hpp"

namespace cerank::ranker {

/// A fitted local ranker plus everything needed to rebuild its input layout.
struct TrainedRanker {
  ClassifierKind kind = ClassifierKind::kForest;
  features::FeatureMask mask;
  double coefficient = 0.0;
  std::uint64_t seed = 0;
  RankerConfig config;
  std::unique_ptr<LocalClassifier> model;

  static TrainedRanker train(const std::vector<PairInstance>& pairs, ClassifierKind kind, const RankerConfig& cfg,
                             const features::FeatureMask& mask, double coefficient, std::uint64_t seed) {
    TrainedRanker r{kind, mask, coefficient, seed, cfg, nullptr};
    r.model = fit_classifier(kind, to_dataset(pairs), cfg, seed);
    return r;
  }

  nlohmann::json describe() const {
    return {{"kind", to_string(kind)},
            {"features", mask.to_string()},
            {"coefficient", coefficient},
            {"seed", seed},
            {"input_dim", model ? model->input_dim() : 0},
            {"config", config.to_json(kind)}};
  }

  /// Binary artifact at `path` and a JSON echo of the configuration at `path`.json.
  void save(const std::string& path) const {
    if (!model) throw Error("saving an untrained ranker");
    io::BinaryWriter w(path, model->artifact_kind());
    w.str(mask.to_string());
    w.f64(coefficient);
    w.u64(seed);
    w.str(config.to_json(kind).dump());
    model->write(w);
    w.close();
    std::ofstream js(path + ".json");
    if (!js) throw InputError("cannot write " + path + ".json");
    js << describe().dump(2) << '\n';
  }

  static TrainedRanker load(const std::string& path) {
    io::BinaryReader in(path);
    TrainedRanker r;
    r.kind = kind_of(in.kind());
    r.mask = features::FeatureMask::parse(in.str());
    r.coefficient = in.f64();
    r.seed = in.u64();
    const auto cfg = nlohmann::json::parse(in.str(), nullptr, false);
    if (cfg.is_discarded() || !cfg.is_object()) throw InputError(path + ": corrupt config block");
    for (auto& [key, value] : cfg.items()) {
      if (key == "penalty" || key == "criterion") continue;
      r.config.set(key, value.is_boolean() ? (value.get<bool>() ? "1" : "0") : value.dump());
    }
    r.model = read_classifier(in);
    return r;
  }
};

/// Global scores and the weak ordering they induce; rows follow ascending id order.
struct RankingResult {
  std::vector<std::string> ids;
  std::vector<double> scores;
  metrics::ScoreMatrix ordering;
  nlohmann::json provenance;

  std::map<std::string, double> score_map() const {
    std::map<std::string, double> m;
    for (std::size_t i = 0; i < ids.size(); ++i) m[ids[i]] = scores[i];
    return m;
  }
};

/// C(i) = sum over j != i of local(i, j); the ordering sorts C descending, equal C tied.
inline RankingResult aggregate_local_ranks(std::vector<std::string> ids,
                                           const std::function<double(const std::string&, const std::string&)>& local) {
  std::sort(ids.begin(), ids.end());
  if (ids.size() < 2) throw InputError("need at least two neighborhoods to rank");
  RankingResult r;
  r.scores.assign(ids.size(), 0.0);
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = 0; j < ids.size(); ++j)
      if (i != j) r.scores[i] += local(ids[i], ids[j]);
  r.ids = std::move(ids);
  r.ordering = metrics::weak_ordering_from_values(r.scores, 0.0);
  return r;
}

/// Local rank of every ordered pair from the model's hard label, or with `soft` set from
/// p(+1) - p(-1).
inline RankingResult rank_globally(const TrainedRanker& ranker, const std::vector<std::string>& ids,
                                   const features::FeatureSet& fs, bool soft = false) {
  if (!ranker.model) throw Error("ranking with an untrained model");
  const auto& model = *ranker.model;
  Eigen::RowVectorXd row;
  auto local = [&](const std::string& i, const std::string& j) {
    auto fi = fs.units.find(i), fj = fs.units.find(j);
    if (fi == fs.units.end() || fj == fs.units.end()) throw InputError("no features for pair (" + i + "," + j + ")");
    const auto x = features::assemble_pair_vector(fi->second, fj->second, fs.pair(i, j), ranker.mask);
    if (x.size() != model.input_dim())
      throw InputError(fmt::format("feature layout mismatch: model expects {} inputs, features give {}", model.input_dim(),
                                   x.size()));
    row = Eigen::Map<const Eigen::RowVectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    if (!soft) return static_cast<double>(model.predict(row));
    const auto p = model.predict_proba(row);
    return p[class_index(1)] - p[class_index(-1)];
  };
  auto r = aggregate_local_ranks(ids, local);
  r.provenance = {{"kind", to_string(ranker.kind)},
                  {"features", ranker.mask.to_string()},
                  {"coefficient", ranker.coefficient},
                  {"soft", soft}};
  return r;
}

/// neighborhood_id,score,rank sorted by rank then id. Tied scores share the competition
/// rank (1,2,2,4).
inline void write_ranking(const std::string& path, const std::vector<std::string>& ids, const std::vector<double>& scores) {
  std::vector<std::size_t> order(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[a] < ids[b];
  });
  io::CsvWriter out(path, {"neighborhood_id", "score", "rank"});
  std::size_t rank = 1;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k > 0 && scores[order[k]] != scores[order[k - 1]]) rank = k + 1;
    out.row({ids[order[k]], fmt::format("{}", scores[order[k]]), std::to_string(rank)});
  }
}

inline void write_ranking(const std::string& path, const RankingResult& r) { write_ranking(path, r.ids, r.scores); }

inline std::map<std::string, double> read_ranking(const std::string& path) {
  const auto table = io::read_csv(path, {"neighborhood_id", "score", "rank"});
  std::map<std::string, double> scores;
  for (auto& row : table.rows)
    if (!scores.emplace(row[0], io::parse_double(row[1], "score")).second)
      throw InputError(path + ": duplicate neighborhood " + row[0]);
  if (scores.size() < 2) throw InputError(path + ": ranking needs at least two neighborhoods");
  return scores;
}

}  // namespace cerank::ranker
