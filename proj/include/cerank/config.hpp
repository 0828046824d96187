#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "cerank/common.hpp"
#include "cerank/corpus.hpp"
#include "cerank/features/doc_embedding.hpp"
#include "cerank/features/lda.hpp"
#include "cerank/features/neighborhood.hpp"
#include "cerank/io.hpp"
#include "cerank/ranker/classifier.hpp"
#include "cerank/text.hpp"

namespace cerank::config {

inline std::vector<double> parse_doubles(const std::string& s, std::string_view what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(io::parse_double(item, what));
  return out;
}

inline std::vector<int> parse_ints(const std::string& s, std::string_view what) {
  std::vector<int> out;
  for (double v : parse_doubles(s, what)) {
    if (v != static_cast<int>(v)) throw InputError("expected integers for " + std::string(what));
    out.push_back(static_cast<int>(v));
  }
  return out;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

inline bool parse_bool(const std::string& s, std::string_view what) {
  if (s == "1" || s == "true" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "no") return false;
  throw InputError("expected a boolean for " + std::string(what) + ", got '" + s + "'");
}

/// Every setting of an experiment. Defaults follow the published setup; desk_scale()
/// shrinks the text models to corpora of a few hundred thousand tokens.
struct ExperimentConfig {
  std::uint64_t seed = 7;
  std::string data_dir = ".";

  double split_fraction = 0.9;
  double top_percent = 40.0;
  long long min_reports = 5;
  corpus::PercentRounding rounding = corpus::PercentRounding::kCeil;

  text::TokenPipelineConfig tokens;
  features::LdaConfig lda;
  features::InferenceConfig inference;
  std::vector<int> rpc_counts;  // empty: use lda.topics as given
  features::EmbedderConfig embedding;
  std::string crime_lexicon = "crime_lexicon.txt";
  std::vector<std::string> sentiment_lexicons{"sentiment_lexicon.tsv"};
  std::size_t max_terms = 100;

  ranker::ClassifierKind classifier = ranker::ClassifierKind::kForest;
  features::FeatureMask mask = features::FeatureMask::parse("doc2vec,sentiment,common-users,topics,distance");
  ranker::RankerConfig ranker;
  bool soft = false;
  std::string grid;
  int folds = 5;

  std::vector<double> coefficients{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  int random_perms = 100;
  std::vector<double> topk{20, 40, 60, 80, 100};
  std::vector<std::string> baselines{"tweets", "users", "venues", "population", "coordinates"};

  static ExperimentConfig desk_scale() {
    ExperimentConfig c;
    c.top_percent = 100.0;
    c.tokens.min_token_df = 5;
    c.tokens.bigram_min_count = 0;
    c.lda.topics = 10;
    c.lda.iterations = 100;
    c.inference = {30, 10};
    c.embedding.epochs = 10;
    c.embedding.infer_epochs = 20;
    return c;
  }

  std::string path(const std::string& file) const {
    const std::filesystem::path p(file);
    return p.is_absolute() ? file : (std::filesystem::path(data_dir) / p).string();
  }

  void set(const std::string& section, const std::string& key, const std::string& v) {
    const auto what = section.empty() ? key : section + "." + key;
    auto d = [&] { return io::parse_double(v, what); };
    auto i = [&] { return io::parse_int(v, what); };
    if (section.empty() && key == "seed") seed = static_cast<std::uint64_t>(i());
    else if (section == "data" && key == "dir") data_dir = v;
    else if (section == "corpus" && key == "split_fraction") split_fraction = d();
    else if (section == "corpus" && key == "top_percent") top_percent = d();
    else if (section == "corpus" && key == "min_reports") min_reports = i();
    else if (section == "corpus" && key == "rounding") {
      if (v == "ceil") rounding = corpus::PercentRounding::kCeil;
      else if (v == "floor") rounding = corpus::PercentRounding::kFloor;
      else throw InputError("corpus.rounding must be ceil or floor");
    } else if (section == "tokens" && key == "min_token_df") tokens.min_token_df = i();
    else if (section == "tokens" && key == "bigram_min_count") tokens.bigram_min_count = i();
    else if (section == "tokens" && key == "max_doc_fraction") tokens.max_doc_fraction = d();
    else if (section == "tokens" && key == "stopword_file") tokens.stopword_file = v.empty() ? v : path(v);
    else if (section == "tokens" && key == "lemma_file") tokens.lemma_file = v.empty() ? v : path(v);
    else if (section == "lda" && key == "topics") lda.topics = static_cast<int>(i());
    else if (section == "lda" && key == "alpha") lda.alpha = d();
    else if (section == "lda" && key == "beta") lda.beta = d();
    else if (section == "lda" && key == "iterations") lda.iterations = static_cast<int>(i());
    else if (section == "lda" && key == "burn_in") inference.burn_in = static_cast<int>(i());
    else if (section == "lda" && key == "samples") inference.samples = static_cast<int>(i());
    else if (section == "lda" && key == "rpc_counts") rpc_counts = parse_ints(v, what);
    else if (section == "embedding" && key == "dim") embedding.dim = static_cast<int>(i());
    else if (section == "embedding" && key == "epochs") embedding.epochs = static_cast<int>(i());
    else if (section == "embedding" && key == "learning_rate") embedding.learning_rate = d();
    else if (section == "embedding" && key == "negatives") embedding.negatives = static_cast<int>(i());
    else if (section == "embedding" && key == "min_count") embedding.min_count = i();
    else if (section == "embedding" && key == "infer_epochs") embedding.infer_epochs = static_cast<int>(i());
    else if (section == "features" && key == "crime_lexicon") crime_lexicon = v;
    else if (section == "features" && key == "sentiment_lexicons") sentiment_lexicons = split_list(v);
    else if (section == "features" && key == "max_terms") max_terms = static_cast<std::size_t>(i());
    else if (section == "ranker" && key == "classifier") classifier = ranker::parse_kind(v);
    else if (section == "ranker" && key == "features") mask = features::FeatureMask::parse(v);
    else if (section == "ranker" && key == "soft") soft = parse_bool(v, what);
    else if (section == "ranker" && key == "grid") grid = v;
    else if (section == "ranker" && key == "folds") folds = static_cast<int>(i());
    else if (section == "ranker") ranker.set(key, v);
    else if (section == "evaluate" && key == "coefficients") coefficients = parse_doubles(v, what);
    else if (section == "evaluate" && key == "random_perms") random_perms = static_cast<int>(i());
    else if (section == "report" && key == "topk") topk = parse_doubles(v, what);
    else if (section == "report" && key == "baselines") baselines = split_list(v);
    else throw InputError("unknown configuration key '" + what + "'");
  }

  void validate() const {
    if (!(split_fraction > 0.0 && split_fraction < 1.0)) throw InputError("split_fraction must be in (0,1)");
    if (!(top_percent > 0.0 && top_percent <= 100.0)) throw InputError("top_percent must be in (0,100]");
    tokens.validate();
    ranker.validate();
    if (coefficients.size() < 2) throw InputError("need at least two tie coefficients");
    for (std::size_t k = 0; k < coefficients.size(); ++k)
      if (coefficients[k] < 0.0 || (k > 0 && coefficients[k] <= coefficients[k - 1]))
        throw InputError("tie coefficients must be non-negative and strictly increasing");
    if (random_perms < 1) throw InputError("random_perms must be >= 1");
    if (sentiment_lexicons.empty()) throw InputError("at least one sentiment lexicon is required");
    for (double p : topk)
      if (!(p > 0.0 && p <= 100.0)) throw InputError("report.topk entries must be in (0,100]");
  }

  /// Settings that determine the feature files, for cache keys.
  std::string feature_fingerprint() const {
    std::ostringstream s;
    s.precision(17);
    s << seed << '|' << split_fraction << '|' << min_reports << '|' << tokens.stopword_file << '|' << tokens.lemma_file
      << '|' << tokens.min_token_df << '|' << tokens.bigram_min_count << '|' << tokens.max_doc_fraction << '|'
      << lda.topics << '|' << lda.alpha << '|' << lda.beta << '|' << lda.iterations << '|' << inference.burn_in << '|'
      << inference.samples << '|';
    for (int c : rpc_counts) s << c << ',';
    s << '|' << embedding.dim << '|' << embedding.epochs << '|' << embedding.learning_rate << '|'
      << embedding.negatives << '|' << embedding.min_count << '|' << embedding.infer_epochs << '|' << max_terms;
    return s.str();
  }
};

/// Loads a flat INI file: root keys plus [section] key = value lines.
inline void load_ini(const std::string& file, ExperimentConfig& cfg) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(file, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  // data.dir first, so relative paths in other keys resolve against it.
  if (auto dir = tree.get_optional<std::string>("data.dir")) {
    const std::filesystem::path p(*dir);
    cfg.data_dir = p.is_absolute() ? *dir : (std::filesystem::path(file).parent_path() / p).string();
  }
  for (auto& [name, node] : tree) {
    if (node.empty()) {
      cfg.set("", name, node.data());
      continue;
    }
    for (auto& [key, leaf] : node) {
      if (name == "data" && key == "dir") continue;
      cfg.set(name, key, leaf.data());
    }
  }
}

}  // namespace cerank::config
