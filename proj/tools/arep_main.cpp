// Command-line front end: specialize, counterfit, evaluate, neighbors,
// grid and merge subcommands over the library. Data goes to files or
// stdout, logs to stderr. Exit codes: 0 success, 1 runtime/data error,
// 2 usage/validation error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "arep/attract_repel.hpp"
#include "arep/common.hpp"
#include "arep/constraints.hpp"
#include "arep/counterfit.hpp"
#include "arep/evaluate.hpp"
#include "arep/parallel.hpp"
#include "arep/vector_space.hpp"

namespace {

using namespace arep;

constexpr std::size_t kVspVocabularyGuard = 20000;

struct SpaceOptions {
  std::vector<std::string> vectors;
  std::vector<std::string> langs;
  bool no_normalize = false;
  std::size_t expect_dim = 0;  // 0 means unchecked
  std::size_t random_init = 0; // 0 means off; otherwise the dimension
};

void add_space_options(CLI::App* cmd, SpaceOptions& opts,
                       bool allow_random_init) {
  cmd->add_option("--vectors", opts.vectors,
                  "Input vector file (repeat with --lang to merge languages)");
  cmd->add_option("--lang", opts.langs,
                  "Language tag for the matching --vectors (repeatable)");
  cmd->add_flag("--no-normalize", opts.no_normalize,
                "Skip unit normalization of input vectors");
  cmd->add_option("--dim", opts.expect_dim,
                  "Require this dimensionality in the input files");
  if (allow_random_init) {
    cmd->add_option("--random-init", opts.random_init,
                    "Ignore --vectors and draw random vectors of this "
                    "dimension for the constraint vocabulary");
  }
}

// Words of a constraint file in first-seen order; used for --random-init.
void collect_constraint_vocab(const std::string& path,
                              std::vector<std::string>& vocab,
                              std::set<std::string>& seen) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open constraint file: " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    for (auto token : split_ws(line)) {
      std::string word(token);
      if (seen.insert(word).second) vocab.push_back(std::move(word));
    }
  }
}

VectorSpace load_space(const SpaceOptions& opts,
                       const std::vector<std::string>& constraint_files,
                       std::uint64_t seed) {
  if (opts.random_init > 0) {
    if (constraint_files.empty()) {
      throw ConfigError("--random-init needs constraint files for the vocabulary");
    }
    std::vector<std::string> vocab;
    std::set<std::string> seen;
    for (const auto& path : constraint_files) {
      collect_constraint_vocab(path, vocab, seen);
    }
    if (vocab.empty()) throw Error("constraint files name no words");
    std::cerr << "random init: " << vocab.size() << " words, dim "
              << opts.random_init << "\n";
    return init_random(vocab, opts.random_init, seed);
  }

  if (opts.vectors.empty()) {
    throw ConfigError("--vectors is required (or --random-init where supported)");
  }
  LoadOptions load_opts;
  load_opts.unit_normalize = !opts.no_normalize;
  if (opts.expect_dim > 0) load_opts.expect_dim = opts.expect_dim;

  auto report_stats = [](const std::string& path, const LoadStats& stats) {
    std::cerr << "loaded " << path << ": " << stats.rows << " rows";
    if (stats.duplicates) std::cerr << ", " << stats.duplicates << " duplicates skipped";
    if (stats.zero_rows) std::cerr << ", " << stats.zero_rows << " zero rows left unnormalized";
    std::cerr << "\n";
  };

  if (opts.langs.empty()) {
    if (opts.vectors.size() != 1) {
      throw ConfigError("multiple --vectors need one --lang tag each");
    }
    LoadStats stats;
    auto space = load_vectors(opts.vectors[0], load_opts, &stats);
    report_stats(opts.vectors[0], stats);
    return space;
  }

  if (opts.langs.size() != opts.vectors.size()) {
    throw ConfigError("--lang count must match --vectors count");
  }
  std::vector<VectorSpace> loaded;
  loaded.reserve(opts.vectors.size());
  for (const auto& path : opts.vectors) {
    LoadStats stats;
    loaded.push_back(load_vectors(path, load_opts, &stats));
    report_stats(path, stats);
  }
  std::vector<std::pair<LanguageTag, const VectorSpace*>> tagged;
  tagged.reserve(loaded.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    tagged.emplace_back(LanguageTag(opts.langs[i]), &loaded[i]);
  }
  auto merged = merge_spaces(tagged);
  std::cerr << "merged space: " << merged.size() << " words, dim "
            << merged.dim() << "\n";
  return merged;
}

struct ConstraintOptions {
  std::vector<std::string> synonyms;
  std::vector<std::string> antonyms;
};

ConstraintSet load_all_constraints(const ConstraintOptions& opts,
                                   const VectorSpace& space) {
  ConstraintSet cs;
  auto load_into = [&](const std::vector<std::string>& paths,
                       std::vector<WordPair>& dst, const char* kind) {
    for (const auto& path : paths) {
      auto result = load_constraints(path, space);
      const std::size_t cross_file_dups = append_unique(dst, result.pairs);
      std::cerr << kind << " " << path << ": "
                << result.pairs.size() - cross_file_dups << " kept, "
                << result.dropped_oov << " oov, " << result.dropped_self
                << " self, " << result.dropped_dup + cross_file_dups
                << " duplicates\n";
    }
  };
  load_into(opts.synonyms, cs.synonyms, "synonyms");
  load_into(opts.antonyms, cs.antonyms, "antonyms");
  const std::size_t conflicts = resolve_syn_ant_conflicts(cs);
  if (conflicts) {
    std::cerr << "warning: " << conflicts
              << " pairs in both sets kept as synonyms only\n";
  }
  if (cs.synonyms.empty() && cs.antonyms.empty()) {
    throw Error("no usable constraints after filtering");
  }
  return cs;
}

// Flat key=value manifest; repeated keys keep their order. Values are
// written so that replaying "<command> --key value ..." reproduces the
// run bit-identically.
class Manifest {
 public:
  explicit Manifest(std::string command) { add("command", std::move(command)); }

  void add(const std::string& key, std::string value) {
    lines_.emplace_back(key, std::move(value));
  }
  void add(const std::string& key, const char* value) {
    add(key, std::string(value));
  }
  void add(const std::string& key, double value) {
    add(key, format_roundtrip(value));
  }
  void add(const std::string& key, std::size_t value) {
    add(key, std::to_string(value));
  }
  void add(const std::string& key, bool value) {
    add(key, value ? std::string("true") : std::string("false"));
  }
  void add_all(const std::string& key, const std::vector<std::string>& values) {
    for (const auto& v : values) add(key, v);
  }

  void write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write manifest: " + path);
    for (const auto& [k, v] : lines_) out << k << '=' << v << '\n';
    if (!out) throw IoError("failed while writing manifest: " + path);
  }

 private:
  std::vector<std::pair<std::string, std::string>> lines_;
};

void add_space_manifest(Manifest& manifest, const SpaceOptions& opts) {
  manifest.add_all("vectors", opts.vectors);
  manifest.add_all("lang", opts.langs);
  manifest.add("no-normalize", opts.no_normalize);
  if (opts.expect_dim > 0) manifest.add("dim", opts.expect_dim);
  if (opts.random_init > 0) manifest.add("random-init", opts.random_init);
}

void write_training_log(const std::string& path, const TrainingReport& report) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write training log: " + path);
  for (const auto& epoch : report.epochs) {
    out << format_epoch_line(epoch) << '\n';
  }
}

std::vector<double> parse_double_list(const std::vector<std::string>& raw) {
  std::vector<double> values;
  for (const auto& item : raw) {
    std::stringstream ss(item);
    std::string field;
    while (std::getline(ss, field, ',')) {
      double v = 0.0;
      if (!parse_double(field, v)) {
        throw ConfigError("cannot parse numeric grid value '" + field + "'");
      }
      values.push_back(v);
    }
  }
  return values;
}

std::vector<std::size_t> parse_size_list(const std::vector<std::string>& raw) {
  std::vector<std::size_t> values;
  for (const auto& item : raw) {
    std::stringstream ss(item);
    std::string field;
    while (std::getline(ss, field, ',')) {
      long long v = 0;
      if (!parse_integer(field, v) || v < 0) {
        throw ConfigError("cannot parse integer grid value '" + field + "'");
      }
      values.push_back(static_cast<std::size_t>(v));
    }
  }
  return values;
}

int run(int argc, char** argv) {
  CLI::App app{"Semantic specialization of word vector spaces"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags like --threads work after a subcommand
  std::size_t threads = default_thread_count();
  app.add_option("--threads", threads, "Worker threads for parallel stages")
      ->capture_default_str();

  // ---- specialize ----
  auto* sp = app.add_subcommand(
      "specialize", "Inject synonym/antonym constraints into a vector space");
  SpaceOptions sp_space;
  ConstraintOptions sp_constraints;
  Hyperparameters sp_h;
  std::string sp_output;
  add_space_options(sp, sp_space, true);
  sp->add_option("--synonyms", sp_constraints.synonyms,
                 "Synonym constraint file (repeatable)");
  sp->add_option("--antonyms", sp_constraints.antonyms,
                 "Antonym constraint file (repeatable)");
  sp->add_option("--output", sp_output, "Output vector file")->required();
  sp->add_option("--delta-syn", sp_h.delta_syn, "Synonym margin")
      ->capture_default_str();
  sp->add_option("--delta-ant", sp_h.delta_ant, "Antonym margin")
      ->capture_default_str();
  sp->add_option("--lambda-reg", sp_h.lambda_reg, "L2 regularization constant")
      ->capture_default_str();
  sp->add_option("--k1", sp_h.k1, "Synonym pairs per mini-batch")
      ->capture_default_str();
  sp->add_option("--k2", sp_h.k2, "Antonym pairs per mini-batch")
      ->capture_default_str();
  sp->add_option("--epochs", sp_h.epochs, "Training epochs")
      ->capture_default_str();
  sp->add_option("--learning-rate", sp_h.learning_rate, "AdaGrad base step")
      ->capture_default_str();
  sp->add_option("--adagrad-epsilon", sp_h.adagrad_epsilon,
                 "AdaGrad denominator stabilizer")
      ->capture_default_str();
  sp->add_option("--seed", sp_h.seed, "Random seed")->capture_default_str();

  // ---- counterfit ----
  auto* cf = app.add_subcommand(
      "counterfit", "Counter-fitting baseline over the same constraints");
  SpaceOptions cf_space;
  ConstraintOptions cf_constraints;
  CounterfitConfig cf_cfg;
  std::string cf_output;
  bool cf_allow_large_vsp = false;
  add_space_options(cf, cf_space, true);
  cf->add_option("--synonyms", cf_constraints.synonyms,
                 "Synonym constraint file (repeatable)");
  cf->add_option("--antonyms", cf_constraints.antonyms,
                 "Antonym constraint file (repeatable)");
  cf->add_option("--output", cf_output, "Output vector file")->required();
  cf->add_option("--delta-syn", cf_cfg.delta_syn, "Minimum synonym dot product")
      ->capture_default_str();
  cf->add_option("--delta-ant", cf_cfg.delta_ant, "Maximum antonym dot product")
      ->capture_default_str();
  cf->add_option("--vsp-radius", cf_cfg.vsp_radius,
                 "Cosine-distance radius of preserved neighborhoods")
      ->capture_default_str();
  cf->add_option("--attract-weight", cf_cfg.attract_weight, "Attract term weight")
      ->capture_default_str();
  cf->add_option("--repel-weight", cf_cfg.repel_weight, "Repel term weight")
      ->capture_default_str();
  cf->add_option("--vsp-weight", cf_cfg.vsp_weight, "VSP term weight")
      ->capture_default_str();
  cf->add_option("--k1", cf_cfg.k1, "Synonym pairs per mini-batch")
      ->capture_default_str();
  cf->add_option("--k2", cf_cfg.k2, "Antonym pairs per mini-batch")
      ->capture_default_str();
  cf->add_option("--epochs", cf_cfg.epochs, "Training epochs")
      ->capture_default_str();
  cf->add_option("--learning-rate", cf_cfg.learning_rate, "AdaGrad base step")
      ->capture_default_str();
  cf->add_option("--adagrad-epsilon", cf_cfg.adagrad_epsilon,
                 "AdaGrad denominator stabilizer")
      ->capture_default_str();
  cf->add_option("--seed", cf_cfg.seed, "Random seed")->capture_default_str();
  cf->add_flag("--allow-large-vsp", cf_allow_large_vsp,
               "Permit the quadratic VSP scan on vocabularies over " +
                   std::to_string(kVspVocabularyGuard) + " words");

  // ---- evaluate ----
  auto* ev = app.add_subcommand(
      "evaluate", "Spearman correlation against scored word-pair datasets");
  SpaceOptions ev_space;
  std::vector<std::string> ev_datasets;
  add_space_options(ev, ev_space, false);
  ev->add_option("--dataset", ev_datasets,
                 "Dataset file, optionally \"TAG:PATH\" to prefix its words "
                 "(repeatable)")
      ->required();

  // ---- neighbors ----
  auto* nb = app.add_subcommand("neighbors",
                                "Nearest neighbours of a word by cosine");
  SpaceOptions nb_space;
  std::string nb_query;
  std::size_t nb_k = 10;
  std::string nb_langs;
  add_space_options(nb, nb_space, false);
  nb->add_option("--query", nb_query, "Query word")->required();
  nb->add_option("--k", nb_k, "Number of neighbours")->capture_default_str();
  nb->add_option("--langs", nb_langs,
                 "Comma-separated language tags to keep (default: all)");

  // ---- grid ----
  auto* gr = app.add_subcommand(
      "grid", "Hyperparameter grid search scored on a validation dataset");
  SpaceOptions gr_space;
  ConstraintOptions gr_constraints;
  Hyperparameters gr_h;
  std::string gr_output;
  std::string gr_validation;
  std::vector<std::string> gr_lambda, gr_delta_syn, gr_delta_ant, gr_k1, gr_k2;
  std::vector<std::string> gr_synonym_candidates;
  add_space_options(gr, gr_space, false);
  gr->add_option("--synonyms", gr_constraints.synonyms,
                 "Synonym constraint file (repeatable; combined)");
  gr->add_option("--antonyms", gr_constraints.antonyms,
                 "Antonym constraint file shared by all grid points");
  gr->add_option("--grid-synonyms", gr_synonym_candidates,
                 "Alternative synonym constraint file, one grid candidate "
                 "each (repeatable; overrides --synonyms as the grid axis)");
  gr->add_option("--validation", gr_validation,
                 "Validation dataset (optionally \"TAG:PATH\")")
      ->required();
  gr->add_option("--output", gr_output, "Output TSV of ranked grid points")
      ->required();
  gr->add_option("--grid-lambda-reg", gr_lambda,
                 "Comma-separated lambda-reg candidates");
  gr->add_option("--grid-delta-syn", gr_delta_syn,
                 "Comma-separated delta-syn candidates");
  gr->add_option("--grid-delta-ant", gr_delta_ant,
                 "Comma-separated delta-ant candidates");
  gr->add_option("--grid-k1", gr_k1, "Comma-separated k1 candidates");
  gr->add_option("--grid-k2", gr_k2, "Comma-separated k2 candidates");
  gr->add_option("--delta-syn", gr_h.delta_syn, "Base synonym margin")
      ->capture_default_str();
  gr->add_option("--delta-ant", gr_h.delta_ant, "Base antonym margin")
      ->capture_default_str();
  gr->add_option("--lambda-reg", gr_h.lambda_reg, "Base regularization")
      ->capture_default_str();
  gr->add_option("--k1", gr_h.k1, "Base k1")->capture_default_str();
  gr->add_option("--k2", gr_h.k2, "Base k2")->capture_default_str();
  gr->add_option("--epochs", gr_h.epochs, "Training epochs")
      ->capture_default_str();
  gr->add_option("--learning-rate", gr_h.learning_rate, "AdaGrad base step")
      ->capture_default_str();
  gr->add_option("--adagrad-epsilon", gr_h.adagrad_epsilon,
                 "AdaGrad denominator stabilizer")
      ->capture_default_str();
  gr->add_option("--seed", gr_h.seed, "Random seed shared by all points")
      ->capture_default_str();

  // ---- merge ----
  auto* mg = app.add_subcommand(
      "merge", "Merge per-language spaces into one prefixed space");
  SpaceOptions mg_space;
  std::string mg_output;
  add_space_options(mg, mg_space, false);
  mg->add_option("--output", mg_output, "Output vector file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  auto split_dataset_arg = [](const std::string& arg)
      -> std::pair<std::optional<LanguageTag>, std::string> {
    auto colon = arg.find(':');
    if (colon == std::string::npos || colon == 0) return {std::nullopt, arg};
    std::string tag = arg.substr(0, colon);
    if (tag.find('/') != std::string::npos ||
        tag.find('_') != std::string::npos) {
      return {std::nullopt, arg};
    }
    return {LanguageTag(tag), arg.substr(colon + 1)};
  };

  if (sp->parsed()) {
    if (sp_constraints.synonyms.empty() && sp_constraints.antonyms.empty()) {
      throw ConfigError("at least one of --synonyms/--antonyms is required");
    }
    sp_h.validate();
    std::vector<std::string> all_files = sp_constraints.synonyms;
    all_files.insert(all_files.end(), sp_constraints.antonyms.begin(),
                     sp_constraints.antonyms.end());
    VectorSpace space = load_space(sp_space, all_files, sp_h.seed);
    ConstraintSet cs = load_all_constraints(sp_constraints, space);
    if (!sp_space.langs.empty()) {
      std::cerr << "constraint counts (syn, ant) by language pair:\n"
                << constraint_report(group_by_language(space, cs));
    }

    auto report = specialize(
        space, cs, sp_h,
        [](const EpochStats& s) { std::cerr << format_epoch_line(s) << "\n"; },
        threads);
    save_vectors(space, sp_output);
    write_training_log(sp_output + ".log", report);

    Manifest manifest("specialize");
    add_space_manifest(manifest, sp_space);
    manifest.add_all("synonyms", sp_constraints.synonyms);
    manifest.add_all("antonyms", sp_constraints.antonyms);
    manifest.add("output", sp_output);
    manifest.add("delta-syn", sp_h.delta_syn);
    manifest.add("delta-ant", sp_h.delta_ant);
    manifest.add("lambda-reg", sp_h.lambda_reg);
    manifest.add("k1", sp_h.k1);
    manifest.add("k2", sp_h.k2);
    manifest.add("epochs", sp_h.epochs);
    manifest.add("learning-rate", sp_h.learning_rate);
    manifest.add("adagrad-epsilon", sp_h.adagrad_epsilon);
    manifest.add("seed", sp_h.seed);
    manifest.add("threads", threads);
    manifest.write(sp_output + ".manifest");
    std::cerr << "wrote " << sp_output << " (" << report.total_seconds
              << "s)\n";
    return 0;
  }

  if (cf->parsed()) {
    if (cf_constraints.synonyms.empty() && cf_constraints.antonyms.empty()) {
      throw ConfigError("at least one of --synonyms/--antonyms is required");
    }
    cf_cfg.threads = threads;
    cf_cfg.validate();
    std::vector<std::string> all_files = cf_constraints.synonyms;
    all_files.insert(all_files.end(), cf_constraints.antonyms.begin(),
                     cf_constraints.antonyms.end());
    VectorSpace space = load_space(cf_space, all_files, cf_cfg.seed);
    if (space.size() > kVspVocabularyGuard && cf_cfg.vsp_weight > 0.0 &&
        cf_cfg.vsp_radius > 0.0 && !cf_allow_large_vsp) {
      throw ConfigError(
          "vocabulary has " + std::to_string(space.size()) +
          " words; the VSP term scans all word pairs, which is quadratic. "
          "Pass --allow-large-vsp to accept the cost, or disable the term "
          "with --vsp-weight 0 or --vsp-radius 0");
    }
    ConstraintSet cs = load_all_constraints(cf_constraints, space);

    auto report = counterfit(space, cs, cf_cfg, [](const EpochStats& s) {
      std::cerr << format_epoch_line(s) << "\n";
    });
    save_vectors(space, cf_output);
    write_training_log(cf_output + ".log", report);

    Manifest manifest("counterfit");
    add_space_manifest(manifest, cf_space);
    manifest.add_all("synonyms", cf_constraints.synonyms);
    manifest.add_all("antonyms", cf_constraints.antonyms);
    manifest.add("output", cf_output);
    manifest.add("delta-syn", cf_cfg.delta_syn);
    manifest.add("delta-ant", cf_cfg.delta_ant);
    manifest.add("vsp-radius", cf_cfg.vsp_radius);
    manifest.add("attract-weight", cf_cfg.attract_weight);
    manifest.add("repel-weight", cf_cfg.repel_weight);
    manifest.add("vsp-weight", cf_cfg.vsp_weight);
    manifest.add("k1", cf_cfg.k1);
    manifest.add("k2", cf_cfg.k2);
    manifest.add("epochs", cf_cfg.epochs);
    manifest.add("learning-rate", cf_cfg.learning_rate);
    manifest.add("adagrad-epsilon", cf_cfg.adagrad_epsilon);
    manifest.add("seed", cf_cfg.seed);
    manifest.add("allow-large-vsp", cf_allow_large_vsp);
    manifest.add("threads", threads);
    manifest.write(cf_output + ".manifest");
    std::cerr << "wrote " << cf_output << " (" << report.total_seconds
              << "s)\n";
    return 0;
  }

  if (ev->parsed()) {
    VectorSpace space = load_space(ev_space, {}, 0);
    for (const auto& arg : ev_datasets) {
      auto [tag, path] = split_dataset_arg(arg);
      auto dataset = load_eval_dataset(path, tag);
      auto result = spearman(space, dataset);
      std::ostringstream line;
      line.setf(std::ios::fixed);
      line.precision(6);
      line << "rho=" << result.rho << " covered=" << result.pairs_covered
           << "/" << result.pairs_total << " dataset=" << path;
      std::cout << line.str() << "\n";
    }
    return 0;
  }

  if (nb->parsed()) {
    VectorSpace space = load_space(nb_space, {}, 0);
    std::optional<std::set<std::string>> filter;
    if (!nb_langs.empty()) {
      filter.emplace();
      std::stringstream ss(nb_langs);
      std::string tag;
      while (std::getline(ss, tag, ',')) {
        if (!tag.empty()) filter->insert(tag);
      }
    }
    auto neighbors = nearest_neighbors(space, nb_query, nb_k, filter, threads);
    std::cout.setf(std::ios::fixed);
    std::cout.precision(6);
    for (const auto& n : neighbors) {
      std::cout << n.word << '\t' << n.score << "\n";
    }
    return 0;
  }

  if (gr->parsed()) {
    gr_h.validate();
    GridSpec grid;
    grid.lambda_reg = gr_lambda.empty() ? std::vector<double>{gr_h.lambda_reg}
                                        : parse_double_list(gr_lambda);
    grid.delta_syn = gr_delta_syn.empty() ? std::vector<double>{gr_h.delta_syn}
                                          : parse_double_list(gr_delta_syn);
    grid.delta_ant = gr_delta_ant.empty() ? std::vector<double>{gr_h.delta_ant}
                                          : parse_double_list(gr_delta_ant);
    grid.k1 = gr_k1.empty() ? std::vector<std::size_t>{gr_h.k1}
                            : parse_size_list(gr_k1);
    grid.k2 = gr_k2.empty() ? std::vector<std::size_t>{gr_h.k2}
                            : parse_size_list(gr_k2);

    VectorSpace space = load_space(gr_space, {}, gr_h.seed);

    std::vector<std::pair<std::string, ConstraintSet>> candidates;
    if (!gr_synonym_candidates.empty()) {
      for (const auto& path : gr_synonym_candidates) {
        ConstraintOptions point;
        point.synonyms = {path};
        point.antonyms = gr_constraints.antonyms;
        candidates.emplace_back(path, load_all_constraints(point, space));
      }
    } else {
      if (gr_constraints.synonyms.empty() && gr_constraints.antonyms.empty()) {
        throw ConfigError(
            "give --synonyms/--antonyms or --grid-synonyms candidates");
      }
      std::string name;
      for (const auto& p : gr_constraints.synonyms) {
        if (!name.empty()) name += ';';
        name += p;
      }
      if (name.empty()) name = "(none)";
      candidates.emplace_back(name, load_all_constraints(gr_constraints, space));
    }
    for (const auto& [name, _] : candidates) {
      grid.constraint_paths.push_back(name);
    }

    auto [val_tag, val_path] = split_dataset_arg(gr_validation);
    auto validation = load_eval_dataset(val_path, val_tag);

    std::cerr << "grid: " << grid.size() << " points, " << threads
              << " threads\n";
    auto results = grid_search(space, candidates, grid, gr_h, validation,
                               threads);

    std::ofstream out(gr_output);
    if (!out) throw IoError("cannot write grid results: " + gr_output);
    out << "constraints\tlambda_reg\tdelta_syn\tdelta_ant\tk1\tk2\trho\t"
           "covered\ttotal\terror\n";
    for (const auto& point : results) {
      const auto& h = point.hyperparameters;
      out << point.constraints_path << '\t' << format_roundtrip(h.lambda_reg)
          << '\t' << format_roundtrip(h.delta_syn) << '\t'
          << format_roundtrip(h.delta_ant) << '\t' << h.k1 << '\t' << h.k2
          << '\t';
      if (point.eval) {
        out << format_roundtrip(point.eval->rho) << '\t'
            << point.eval->pairs_covered << '\t' << point.eval->pairs_total
            << '\t';
      } else {
        out << "NA\t0\t0\t" << point.error;
      }
      out << '\n';
    }
    if (!out) throw IoError("failed while writing grid results: " + gr_output);

    const auto& best = results.front();
    if (best.eval) {
      std::ostringstream line;
      line.setf(std::ios::fixed);
      line.precision(6);
      line << "best: constraints=" << best.constraints_path
           << " lambda-reg=" << format_roundtrip(best.hyperparameters.lambda_reg)
           << " delta-syn=" << format_roundtrip(best.hyperparameters.delta_syn)
           << " delta-ant=" << format_roundtrip(best.hyperparameters.delta_ant)
           << " k1=" << best.hyperparameters.k1
           << " k2=" << best.hyperparameters.k2 << " rho=" << best.eval->rho;
      std::cout << line.str() << "\n";
    } else {
      throw Error("every grid point failed; first error: " + best.error);
    }

    Manifest manifest("grid");
    add_space_manifest(manifest, gr_space);
    manifest.add_all("synonyms", gr_constraints.synonyms);
    manifest.add_all("antonyms", gr_constraints.antonyms);
    manifest.add_all("grid-synonyms", gr_synonym_candidates);
    manifest.add("validation", gr_validation);
    manifest.add("output", gr_output);
    manifest.add_all("grid-lambda-reg", gr_lambda);
    manifest.add_all("grid-delta-syn", gr_delta_syn);
    manifest.add_all("grid-delta-ant", gr_delta_ant);
    manifest.add_all("grid-k1", gr_k1);
    manifest.add_all("grid-k2", gr_k2);
    manifest.add("delta-syn", gr_h.delta_syn);
    manifest.add("delta-ant", gr_h.delta_ant);
    manifest.add("lambda-reg", gr_h.lambda_reg);
    manifest.add("k1", gr_h.k1);
    manifest.add("k2", gr_h.k2);
    manifest.add("epochs", gr_h.epochs);
    manifest.add("learning-rate", gr_h.learning_rate);
    manifest.add("adagrad-epsilon", gr_h.adagrad_epsilon);
    manifest.add("seed", gr_h.seed);
    manifest.add("threads", threads);
    manifest.write(gr_output + ".manifest");
    return 0;
  }

  if (mg->parsed()) {
    if (mg_space.vectors.empty() || mg_space.langs.empty()) {
      throw ConfigError("merge needs --vectors/--lang pairs");
    }
    VectorSpace space = load_space(mg_space, {}, 0);
    save_vectors(space, mg_output);
    Manifest manifest("merge");
    add_space_manifest(manifest, mg_space);
    manifest.add("output", mg_output);
    manifest.add("threads", threads);
    manifest.write(mg_output + ".manifest");
    std::cerr << "wrote " << mg_output << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const arep::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
