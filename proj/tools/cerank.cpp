// Command-line driver: synth, ingest, ground-truth, features, train, rank, baseline,
// evaluate and report.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "cerank/config.hpp"
#include "cerank/pipeline.hpp"
#include "cerank/synth.hpp"

namespace {

namespace fs = std::filesystem;
using namespace cerank;

struct Common {
  std::string config_file;
  std::string preset = "published";
  std::optional<std::uint64_t> seed;
  std::string data_dir;
  std::vector<std::string> overrides;  // section.key=value
  std::string classifier;
  std::string features;
  std::string coefficients;
  std::optional<int> random_perms;

  config::ExperimentConfig resolve() const {
    config::ExperimentConfig cfg = preset == "desk" ? config::ExperimentConfig::desk_scale() : config::ExperimentConfig{};
    if (!config_file.empty()) config::load_ini(config_file, cfg);
    if (!data_dir.empty()) cfg.data_dir = data_dir;
    if (seed) cfg.seed = *seed;
    if (!classifier.empty()) cfg.classifier = ranker::parse_kind(classifier);
    if (!features.empty()) cfg.mask = features::FeatureMask::parse(features);
    if (!coefficients.empty()) cfg.coefficients = config::parse_doubles(coefficients, "coefficients");
    if (random_perms) cfg.random_perms = *random_perms;
    for (auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw InputError("--set expects section.key=value, got '" + o + "'");
      const auto key = o.substr(0, eq);
      const auto dot = key.find('.');
      cfg.set(dot == std::string::npos ? "" : key.substr(0, dot), dot == std::string::npos ? key : key.substr(dot + 1),
              o.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
  }
};

void add_common(CLI::App* cmd, Common& c, bool model_flags) {
  cmd->add_option("--config", c.config_file, "INI configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--preset", c.preset, "Base settings before the config file")->check(CLI::IsMember({"published", "desk"}));
  cmd->add_option("--seed", c.seed, "Master seed");
  cmd->add_option("--data", c.data_dir, "Directory holding the input files");
  cmd->add_option("--set", c.overrides, "Override a configuration key: section.key=value");
  if (model_flags) {
    cmd->add_option("--classifier", c.classifier, "logreg, forest or mlp");
    cmd->add_option("--features", c.features, "Feature families, e.g. doc2vec,sentiment,common-users,topics,distance");
    cmd->add_option("--coefficients", c.coefficients, "Tie coefficients, e.g. 0,0.2,0.4,0.6,0.8,1.0");
    cmd->add_option("--random-perms", c.random_perms, "Permutations for the random baseline");
  }
}

std::vector<std::string> read_ids(const std::string& path) {
  std::vector<std::string> ids;
  for (auto& line : io::read_lines(path))
    if (!line.empty()) ids.push_back(line);
  if (ids.size() < 2) throw InputError(path + ": need at least two neighborhood ids");
  return ids;
}

features::FeatureSet read_split(const fs::path& dir, const std::string& split) {
  return features::read_feature_set((dir / split / "features.jsonl").string(), (dir / split / "pairs.jsonl").string());
}

std::string ranking_name(double c) { return fmt::format("ranking_{}.csv", pipeline::coefficient_tag(c)); }

// --- subcommands -----------------------------------------------------------

struct SynthArgs {
  std::string out;
  synth::ScenarioConfig cfg;
};

int run_synth(const SynthArgs& a) {
  synth::write_scenario(synth::generate(a.cfg), a.out);
  std::cout << "wrote scenario to " << a.out << '\n';
  return 0;
}

int run_ingest(const std::string& tweets, const std::string& gazetteer, const std::string& out) {
  const auto gz = corpus::read_gazetteer(gazetteer);
  if (gz.empty()) throw InputError("empty gazetteer");
  const auto assoc = corpus::associate_tweets(corpus::read_tweets(tweets), gz);
  corpus::write_association(out, assoc);
  std::size_t n = 0;
  for (auto& [id, t] : assoc.tweets) n += t.size();
  std::cout << fmt::format("{} assignments over {} neighborhoods\n", n, assoc.tweets.size());
  return 0;
}

int run_ground_truth(const std::string& surveys, long long min_reports, const std::string& out) {
  const auto table = corpus::compute_ground_truth(corpus::read_surveys(surveys), min_reports);
  corpus::write_efficacy(out, table);
  std::cout << fmt::format("{} neighborhoods with at least {} reports\n", table.efficacy.size(), min_reports);
  return 0;
}

int run_features(const Common& c, const std::string& out) {
  const auto cfg = c.resolve();
  const auto in = pipeline::load_inputs(cfg);
  const auto p = pipeline::prepare(in, cfg);
  const auto ids = pipeline::select_active(p, cfg.top_percent, cfg.rounding);
  const auto feats = pipeline::compute_features(in, p, ids, cfg, false);
  const fs::path dir(out);
  for (auto [name, set] : {std::pair{"train", &feats.train}, std::pair{"test", &feats.test}}) {
    fs::create_directories(dir / name);
    features::write_feature_set((dir / name / "features.jsonl").string(), (dir / name / "pairs.jsonl").string(), *set);
  }
  std::ofstream active(dir / "active.txt");
  for (auto& id : ids) active << id << '\n';
  corpus::write_efficacy((dir / "efficacy.csv").string(), p.efficacy);
  feats.models->lda.save((dir / "lda.bin").string());
  feats.models->embedder.save((dir / "doc2vec.bin").string());
  if (feats.models->rpc) {
    io::CsvWriter w((dir / "rpc.csv").string(), {"topics", "perplexity", "rpc"});
    const auto& r = *feats.models->rpc;
    for (std::size_t k = 0; k < r.topic_counts.size(); ++k)
      w.row({std::to_string(r.topic_counts[k]), fmt::format("{:.6f}", r.perplexities[k]), k ? fmt::format("{:.6f}", r.rpc[k - 1]) : ""});
  }
  std::cout << fmt::format("features for {} neighborhoods, {} topics, {} crime terms\n", ids.size(), feats.models->lda.topics(),
                           feats.models->vocab.size());
  return 0;
}

int run_train(const Common& c, const std::string& feature_dir, const std::string& out) {
  const auto cfg = c.resolve();
  const fs::path dir(feature_dir);
  const auto ids = read_ids((dir / "active.txt").string());
  const auto efficacy = corpus::read_efficacy((dir / "efficacy.csv").string());
  const auto rankers = pipeline::train_rankers(cfg, read_split(dir, "train"), efficacy, ids);
  fs::create_directories(out);
  for (auto& r : rankers) r.save((fs::path(out) / fmt::format("model_{}.bin", pipeline::coefficient_tag(r.coefficient))).string());
  std::cout << fmt::format("trained {} {} models\n", rankers.size(), ranker::to_string(cfg.classifier));
  return 0;
}

int run_rank(const Common& c, const std::string& model, const std::string& feature_dir, const std::string& out, bool soft) {
  const fs::path dir(feature_dir);
  const auto ids = read_ids((dir / "active.txt").string());
  const auto test = read_split(dir, "test");
  std::vector<ranker::TrainedRanker> rankers;
  if (model.empty()) {
    const auto cfg = c.resolve();
    rankers = pipeline::train_rankers(cfg, read_split(dir, "train"), corpus::read_efficacy((dir / "efficacy.csv").string()), ids);
  } else if (fs::is_directory(model)) {
    std::vector<fs::path> files;
    for (auto& e : fs::directory_iterator(model))
      if (e.path().extension() == ".bin") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw InputError(model + ": no model files");
    for (auto& f : files) rankers.push_back(ranker::TrainedRanker::load(f.string()));
  } else {
    rankers.push_back(ranker::TrainedRanker::load(model));
  }
  if (rankers.size() == 1 && fs::path(out).extension() == ".csv") {
    ranker::write_ranking(out, ranker::rank_globally(rankers[0], ids, test, soft));
  } else {
    fs::create_directories(out);
    for (auto& r : rankers)
      ranker::write_ranking((fs::path(out) / ranking_name(r.coefficient)).string(), ranker::rank_globally(r, ids, test, soft));
  }
  std::cout << fmt::format("ranked {} neighborhoods with {} model(s)\n", ids.size(), rankers.size());
  return 0;
}

int run_baseline(const Common& c, const std::string& kind, const std::string& feature_dir, const std::string& out, bool ascending) {
  const auto cfg = c.resolve();
  const auto ids = read_ids((fs::path(feature_dir) / "active.txt").string());
  std::vector<double> scores(ids.size());
  if (kind == "random") {
    std::vector<std::size_t> perm(ids.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    Rng rng(derive_seed(cfg.seed, "random-baseline"));
    portable_shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t k = 0; k < perm.size(); ++k) scores[perm[k]] = static_cast<double>(perm.size() - k);
  } else {
    const auto in = pipeline::load_inputs(cfg);
    const auto p = pipeline::prepare(in, cfg);
    const auto ord = pipeline::baseline_ordering(kind, ids, in, p.test,
                                                 ascending ? baselines::Direction::kAscending : baselines::Direction::kDescending);
    // Score = number of neighborhoods ranked strictly behind, which reproduces the ordering.
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = 0; j < ids.size(); ++j)
        if (i != j && ord.at(j, i) == -1) scores[i] += 1.0;
  }
  ranker::write_ranking(out, ids, scores);
  std::cout << fmt::format("wrote {} baseline for {} neighborhoods\n", kind, ids.size());
  return 0;
}

int run_evaluate(const Common& c, const std::string& efficacy_path, const std::string& active_path,
                 const std::vector<std::string>& rankings, const std::string& out) {
  const auto cfg = c.resolve();
  const auto efficacy = corpus::read_efficacy(efficacy_path);
  std::vector<std::string> ids;
  if (!active_path.empty()) {
    ids = read_ids(active_path);
  } else {
    for (auto& [id, v] : efficacy.efficacy) ids.push_back(id);
  }
  const auto reference = pipeline::reference_values(efficacy, ids);
  auto ordering_from = [&](const std::string& path) {
    const auto scores = ranker::read_ranking(path);
    std::map<std::string, double> restricted;
    for (auto& id : ids) {
      auto it = scores.find(id);
      if (it == scores.end()) throw InputError(path + ": no score for neighborhood " + id);
      restricted[id] = it->second;
    }
    return metrics::weak_ordering_from_values(restricted, 0.0);
  };
  std::vector<pipeline::CurveResult> curves;
  for (auto& spec : rankings) {
    const auto eq = spec.find('=');
    const auto id = eq == std::string::npos ? fs::path(spec).stem().string() : spec.substr(0, eq);
    const auto path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    std::vector<metrics::ScoreMatrix> ords;
    for (double coef : cfg.coefficients)
      ords.push_back(ordering_from(fs::is_directory(path) ? (fs::path(path) / ranking_name(coef)).string() : path));
    curves.push_back(pipeline::evaluate_curve(id, reference, cfg.coefficients, [&](std::size_t k) { return ords[k]; }));
  }
  curves.push_back(pipeline::evaluate_random(reference, cfg.coefficients, cfg.random_perms, derive_seed(cfg.seed, "random")));
  pipeline::write_eval(out, curves);
  for (auto& cr : curves)
    std::cout << fmt::format("{:<60} AUC-ERC strict {:.4f} projected {:.4f}\n", cr.model_id, cr.auc_strict, cr.auc_projected);
  return 0;
}

int run_report(const Common& c, const std::string& out) {
  const auto cfg = c.resolve();
  const auto ex = pipeline::run_report(cfg, out);
  for (auto& cr : ex.curves)
    std::cout << fmt::format("{:<60} AUC-ERC strict {:.4f} projected {:.4f}\n", cr.model_id, cr.auc_strict, cr.auc_projected);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neighborhood collective-efficacy ranking from geotagged short texts"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic scenario");
  synth->add_option("--out", synth_args.out, "Output directory")->required();
  synth->add_option("--seed", synth_args.cfg.seed, "Seed");
  synth->add_option("--neighborhoods", synth_args.cfg.n_neighborhoods, "Number of neighborhoods");
  synth->add_option("--tweets-log-mean", synth_args.cfg.tweets_log_mean, "Log-mean tweets per neighborhood");
  synth->add_option("--tweets-log-sd", synth_args.cfg.tweets_log_sd, "Log-sd of tweets per neighborhood");
  synth->add_option("--spatial-corr", synth_args.cfg.efficacy_spatial_corr, "Spatial autocorrelation weight in [0,1]");
  synth->add_option("--crime-slope", synth_args.cfg.crime_rate_slope, "Crime-word logistic slope");
  synth->add_option("--sentiment-slope", synth_args.cfg.sentiment_slope, "Sentiment mean slope");
  synth->add_option("--user-pool", synth_args.cfg.user_pool, "Number of users");
  synth->add_option("--overlap-decay", synth_args.cfg.overlap_decay, "User overlap decay");
  synth->add_option("--reports", synth_args.cfg.reports_per_neighborhood, "Survey reports per neighborhood");

  std::string tweets, gazetteer, ingest_out;
  auto* ingest = app.add_subcommand("ingest", "Associate tweets with neighborhoods");
  ingest->add_option("--tweets", tweets, "tweets.jsonl")->required();
  ingest->add_option("--gazetteer", gazetteer, "gazetteer.csv")->required();
  ingest->add_option("--out", ingest_out, "assoc.jsonl")->required();

  std::string surveys, gt_out;
  long long min_reports = 5;
  auto* gt = app.add_subcommand("ground-truth", "Aggregate surveys into normalized efficacy");
  gt->add_option("--surveys", surveys, "surveys.csv")->required();
  gt->add_option("--min-reports", min_reports, "Minimum reports per neighborhood");
  gt->add_option("--out", gt_out, "efficacy.csv")->required();

  Common feat_common;
  std::string feat_out;
  auto* feat = app.add_subcommand("features", "Train text models and write train/test feature caches");
  add_common(feat, feat_common, false);
  feat->add_option("--out", feat_out, "Output directory")->required();

  Common train_common;
  std::string train_dir, train_out;
  auto* train = app.add_subcommand("train", "Train one local ranker per tie coefficient");
  add_common(train, train_common, true);
  train->add_option("--feature-dir", train_dir, "Directory written by 'features'")->required();
  train->add_option("--out", train_out, "Model directory")->required();

  Common rank_common;
  std::string rank_model, rank_dir, rank_out;
  bool soft = false;
  auto* rank = app.add_subcommand("rank", "Aggregate local ranks into global rankings");
  add_common(rank, rank_common, true);
  rank->add_option("--model", rank_model, "Model file or directory; omitted: train from --classifier/--features");
  rank->add_option("--feature-dir", rank_dir, "Directory written by 'features'")->required();
  rank->add_option("--out", rank_out, "ranking.csv for one model, else a directory")->required();
  rank->add_flag("--soft", soft, "Use p(+1) - p(-1) instead of hard labels");

  Common base_common;
  std::string base_kind, base_dir, base_out;
  bool ascending = false;
  auto* base = app.add_subcommand("baseline", "Non-learned ranking");
  add_common(base, base_common, false);
  base->add_option("--kind", base_kind, "Baseline kind")
      ->required()
      ->check(CLI::IsMember({"tweets", "users", "venues", "population", "coordinates", "random"}));
  base->add_option("--feature-dir", base_dir, "Directory written by 'features' (for the active set)")->required();
  base->add_option("--out", base_out, "ranking.csv")->required();
  base->add_flag("--ascending", ascending, "Sort ascending instead of descending");

  Common eval_common;
  std::string eval_eff, eval_active, eval_out;
  std::vector<std::string> eval_rankings;
  auto* eval = app.add_subcommand("evaluate", "Score rankings with tau_x and AUC-ERC");
  add_common(eval, eval_common, true);
  eval->add_option("--efficacy", eval_eff, "efficacy.csv")->required();
  eval->add_option("--active", eval_active, "active.txt restricting the evaluated neighborhoods");
  eval->add_option("--ranking", eval_rankings, "ID=PATH, PATH a ranking file or a directory of ranking_cX.csv files");
  eval->add_option("--out", eval_out, "eval.csv")->required();

  Common report_common;
  std::string report_out;
  auto* report = app.add_subcommand("report", "End-to-end run from a configuration");
  add_common(report, report_common, true);
  report->add_option("--out", report_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n\n";
    const CLI::App* sub = nullptr;
    for (auto* s : app.get_subcommands()) sub = s;
    std::cerr << (sub ? sub->help() : app.help());
    return 2;
  }

  try {
    if (*synth) return run_synth(synth_args);
    if (*ingest) return run_ingest(tweets, gazetteer, ingest_out);
    if (*gt) return run_ground_truth(surveys, min_reports, gt_out);
    if (*feat) return run_features(feat_common, feat_out);
    if (*train) return run_train(train_common, train_dir, train_out);
    if (*rank) return run_rank(rank_common, rank_model, rank_dir, rank_out, soft);
    if (*base) return run_baseline(base_common, base_kind, base_dir, base_out, ascending);
    if (*eval) return run_evaluate(eval_common, eval_eff, eval_active, eval_rankings, eval_out);
    if (*report) return run_report(report_common, report_out);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
