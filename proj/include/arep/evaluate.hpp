#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "arep/attract_repel.hpp"
#include "arep/common.hpp"
#include "arep/constraints.hpp"
#include "arep/parallel.hpp"
#include "arep/vector_space.hpp"

namespace arep {

struct EvalEntry {
  std::string word_a;
  std::string word_b;
  double gold = 0.0;
};

// Scored word pairs in the SimLex/WordSim shape.
struct EvalDataset {
  std::string name;
  std::vector<EvalEntry> entries;
};

struct EvalResult {
  double rho = 0.0;
  std::size_t pairs_covered = 0;
  std::size_t pairs_total = 0;
};

// Reads "word_a word_b score" triples (tab or space separated). A first
// line whose third token is not a number is treated as a header. With a
// prefix, words are rewritten to "<prefix>_<word>" to match merged spaces.
inline EvalDataset load_eval_dataset(
    const std::string& path,
    const std::optional<LanguageTag>& prefix = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open evaluation dataset: " + path);

  EvalDataset dataset;
  dataset.name = path;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line[0] == '#') continue;
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 3) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": expected 'word_a word_b score'");
    }
    double score = 0.0;
    if (!parse_double(tokens[2], score)) {
      if (first_content_line) {
        first_content_line = false;
        continue;  // header
      }
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": cannot parse score '" + std::string(tokens[2]) +
                       "'");
    }
    first_content_line = false;
    if (!std::isfinite(score)) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": score is not finite");
    }
    EvalEntry entry;
    entry.word_a = prefix ? prefix->code + "_" + std::string(tokens[0])
                          : std::string(tokens[0]);
    entry.word_b = prefix ? prefix->code + "_" + std::string(tokens[1])
                          : std::string(tokens[1]);
    entry.gold = score;

    std::string key = entry.word_a <= entry.word_b
                          ? entry.word_a + "\t" + entry.word_b
                          : entry.word_b + "\t" + entry.word_a;
    if (!seen.insert(std::move(key)).second) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": duplicate word pair");
    }
    dataset.entries.push_back(std::move(entry));
  }
  if (dataset.entries.empty()) throw Error("empty evaluation dataset: " + path);
  return dataset;
}

// Average ranks, with ties receiving the mean of the ranks they span.
inline std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

// Pearson correlation of two average-rank vectors; 0 when either side has
// no rank variance (all-tied scores).
inline double pearson_on_ranks(const std::vector<double>& a,
                               const std::vector<double>& b) {
  const std::size_t n = a.size();
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= n;
  mean_b /= n;
  double num = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    num += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0) return 0.0;
  return num / std::sqrt(var_a * var_b);
}

// Spearman's rank correlation between cosine scores (current vectors) and
// gold scores, over the covered pairs. Pairs with an out-of-vocabulary
// word are skipped and reported via the coverage counts.
inline EvalResult spearman(const VectorSpace& space,
                           const EvalDataset& dataset) {
  std::vector<double> model;
  std::vector<double> gold;
  for (const auto& entry : dataset.entries) {
    auto a = space.find(entry.word_a);
    auto b = space.find(entry.word_b);
    if (!a || !b) continue;
    model.push_back(cosine(space.row(*a), space.row(*b)));
    gold.push_back(entry.gold);
  }
  EvalResult result;
  result.pairs_total = dataset.entries.size();
  result.pairs_covered = model.size();
  if (result.pairs_covered < 2) {
    throw CoverageError("dataset '" + dataset.name + "' covers only " +
                        std::to_string(result.pairs_covered) +
                        " pairs; need at least 2");
  }
  // rank rounding can push the ratio an ulp past +/-1
  result.rho = std::clamp(
      pearson_on_ranks(average_ranks(model), average_ranks(gold)), -1.0, 1.0);
  return result;
}

// Candidate values per tunable axis. The constraint axis ranges over
// alternative synonym constraint files (e.g. increasingly large sets);
// antonym constraints are shared across all grid points.
struct GridSpec {
  std::vector<double> lambda_reg;
  std::vector<double> delta_syn;
  std::vector<double> delta_ant;
  std::vector<std::size_t> k1;
  std::vector<std::size_t> k2;
  std::vector<std::string> constraint_paths;

  void validate() const {
    if (lambda_reg.empty() || delta_syn.empty() || delta_ant.empty() ||
        k1.empty() || k2.empty() || constraint_paths.empty()) {
      throw ConfigError("every grid axis needs at least one candidate value");
    }
  }

  std::size_t size() const {
    return lambda_reg.size() * delta_syn.size() * delta_ant.size() *
           k1.size() * k2.size() * constraint_paths.size();
  }
};

struct GridPointResult {
  std::size_t grid_index = 0;
  std::string constraints_path;
  Hyperparameters hyperparameters;
  std::optional<EvalResult> eval;  // empty if the point failed
  std::string error;
};

// Evaluates every grid point: clone the base space, specialize with the
// point's hyperparameters and constraint set, and score against the
// validation dataset. All points share the base seed so runs differ only
// in the tuned values. Points run in parallel when threads > 1 and are
// returned sorted by rho (descending), ties by grid order; failed points
// sort last and carry their error message.
inline std::vector<GridPointResult> grid_search(
    const VectorSpace& base,
    const std::vector<std::pair<std::string, ConstraintSet>>&
        constraint_candidates,
    const GridSpec& grid, const Hyperparameters& base_hyperparameters,
    const EvalDataset& validation, std::size_t threads = 1) {
  grid.validate();
  if (constraint_candidates.size() != grid.constraint_paths.size()) {
    throw ConfigError("constraint candidates do not match the grid axis");
  }

  std::vector<GridPointResult> points;
  points.reserve(grid.size());
  for (std::size_t c = 0; c < constraint_candidates.size(); ++c) {
    for (double lambda : grid.lambda_reg) {
      for (double ds : grid.delta_syn) {
        for (double da : grid.delta_ant) {
          for (std::size_t k1 : grid.k1) {
            for (std::size_t k2 : grid.k2) {
              GridPointResult point;
              point.grid_index = points.size();
              point.constraints_path = constraint_candidates[c].first;
              point.hyperparameters = base_hyperparameters;
              point.hyperparameters.lambda_reg = lambda;
              point.hyperparameters.delta_syn = ds;
              point.hyperparameters.delta_ant = da;
              point.hyperparameters.k1 = k1;
              point.hyperparameters.k2 = k2;
              points.push_back(std::move(point));
            }
          }
        }
      }
    }
  }

  const std::size_t per_candidate = points.size() / constraint_candidates.size();
  parallel_for(points.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      GridPointResult& point = points[i];
      const ConstraintSet& constraints =
          constraint_candidates[i / per_candidate].second;
      try {
        VectorSpace clone = base;
        specialize(clone, constraints, point.hyperparameters);
        point.eval = spearman(clone, validation);
      } catch (const std::exception& e) {
        point.error = e.what();
      }
    }
  });

  std::sort(points.begin(), points.end(),
            [](const GridPointResult& a, const GridPointResult& b) {
              const double ra = a.eval ? a.eval->rho
                                       : -std::numeric_limits<double>::infinity();
              const double rb = b.eval ? b.eval->rho
                                       : -std::numeric_limits<double>::infinity();
              if (ra != rb) return ra > rb;
              return a.grid_index < b.grid_index;
            });
  return points;
}

}  // namespace arep
