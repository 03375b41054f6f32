#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "arep/common.hpp"
#include "arep/parallel.hpp"
#include "arep/vector_space.hpp"

namespace arep {

// A constraint pair as vocabulary indices (left, right).
struct WordPair {
  std::uint32_t l = 0;
  std::uint32_t r = 0;
  bool operator==(const WordPair&) const = default;
};

// Canonical key treating (a,b) and (b,a) as the same pair.
inline std::uint64_t pair_key(const WordPair& p) {
  std::uint64_t lo = std::min(p.l, p.r);
  std::uint64_t hi = std::max(p.l, p.r);
  return (hi << 32) | lo;
}

// Synonym pairs S and antonym pairs A, resolved against one vector space.
struct ConstraintSet {
  std::vector<WordPair> synonyms;
  std::vector<WordPair> antonyms;
};

struct ConstraintLoadResult {
  std::vector<WordPair> pairs;
  std::size_t dropped_oov = 0;
  std::size_t dropped_self = 0;
  std::size_t dropped_dup = 0;
  std::size_t total_lines = 0;  // constraint lines (comments/blanks excluded)
};

// Reads one pair per line ("word_a word_b"), keeping only pairs whose words
// are both in the space. Self-pairs are dropped, as are duplicates under
// symmetric equality. Lines starting with '#' are comments.
inline ConstraintLoadResult load_constraints(const std::string& path,
                                             const VectorSpace& space) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open constraint file: " + path);

  ConstraintLoadResult result;
  std::unordered_set<std::uint64_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line[0] == '#') continue;
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 2) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": expected exactly two word tokens, found " +
                       std::to_string(tokens.size()));
    }
    ++result.total_lines;
    auto a = space.find(tokens[0]);
    auto b = space.find(tokens[1]);
    if (!a || !b) {
      ++result.dropped_oov;
      continue;
    }
    if (*a == *b) {
      ++result.dropped_self;
      continue;
    }
    WordPair p{static_cast<std::uint32_t>(*a), static_cast<std::uint32_t>(*b)};
    if (!seen.insert(pair_key(p)).second) {
      ++result.dropped_dup;
      continue;
    }
    result.pairs.push_back(p);
  }
  return result;
}

// Appends pairs into an existing list, dropping symmetric duplicates.
// Returns the number of duplicates dropped.
inline std::size_t append_unique(std::vector<WordPair>& dst,
                                 std::span<const WordPair> src) {
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(dst.size() + src.size());
  for (const auto& p : dst) seen.insert(pair_key(p));
  std::size_t dropped = 0;
  for (const auto& p : src) {
    if (seen.insert(pair_key(p)).second) {
      dst.push_back(p);
    } else {
      ++dropped;
    }
  }
  return dropped;
}

// Pairs listed as both synonyms and antonyms are resource noise; synonymy
// wins and the pair leaves A. Returns the number of dropped antonym pairs.
inline std::size_t resolve_syn_ant_conflicts(ConstraintSet& constraints) {
  std::unordered_set<std::uint64_t> syn_keys;
  syn_keys.reserve(constraints.synonyms.size());
  for (const auto& p : constraints.synonyms) syn_keys.insert(pair_key(p));
  auto& ant = constraints.antonyms;
  const std::size_t before = ant.size();
  std::erase_if(ant, [&](const WordPair& p) {
    return syn_keys.contains(pair_key(p));
  });
  return before - ant.size();
}

using LangPairKey = std::pair<std::string, std::string>;

// Buckets constraints by the canonically ordered language pair of their
// words (unprefixed words fall under the empty tag).
inline std::map<LangPairKey, ConstraintSet> group_by_language(
    const VectorSpace& space, const ConstraintSet& constraints) {
  std::map<LangPairKey, ConstraintSet> groups;
  auto key_of = [&](const WordPair& p) {
    std::string a(tag_of(space.word(p.l)));
    std::string b(tag_of(space.word(p.r)));
    if (b < a) std::swap(a, b);
    return LangPairKey{a, b};
  };
  for (const auto& p : constraints.synonyms) {
    groups[key_of(p)].synonyms.push_back(p);
  }
  for (const auto& p : constraints.antonyms) {
    groups[key_of(p)].antonyms.push_back(p);
  }
  return groups;
}

// Renders a per-language-pair count table with "syn, ant" cells. Each
// unordered pair appears once, in the row of its lexicographically first
// language; monolingual counts sit on the diagonal.
inline std::string constraint_report(
    const std::map<LangPairKey, ConstraintSet>& groups) {
  if (groups.empty()) return "";
  std::set<std::string> langs;
  for (const auto& [key, _] : groups) {
    langs.insert(key.first);
    langs.insert(key.second);
  }
  std::vector<std::string> order(langs.begin(), langs.end());
  auto cell = [&](const std::string& a, const std::string& b) -> std::string {
    auto it = groups.find({a, b});
    if (it == groups.end()) return "-";
    return std::to_string(it->second.synonyms.size()) + ", " +
           std::to_string(it->second.antonyms.size());
  };

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{""};
  for (const auto& l : order) header.push_back(l.empty() ? "(none)" : l);
  rows.push_back(header);
  for (std::size_t i = 0; i < order.size(); ++i) {
    std::vector<std::string> row{order[i].empty() ? "(none)" : order[i]};
    for (std::size_t j = 0; j < order.size(); ++j) {
      row.push_back(j < i ? "-" : cell(order[i], order[j]));
    }
    rows.push_back(row);
  }

  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      widths[c] = std::max(widths[c], row[c].size());
    }
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << "  ";
      out << row[c] << std::string(widths[c] - row[c].size(), ' ');
    }
    out << '\n';
  }
  return out.str();
}

// One batch worth of raw constraint slices (before negative selection).
struct BatchSlices {
  std::vector<WordPair> synonyms;
  std::vector<WordPair> antonyms;
};

// Splits both constraint lists into batches for one epoch. Lists are
// shuffled independently with a (seed, epoch)-derived generator. The batch
// count is ceil(max(|S|/k1, |A|/k2)); the list that determines it is cut
// into consecutive slices (last one short), while a shorter list cycles
// modulo its length so its pairs keep appearing in full-size slices.
inline std::vector<BatchSlices> make_batches(const ConstraintSet& constraints,
                                             std::size_t k1, std::size_t k2,
                                             std::uint64_t seed,
                                             std::size_t epoch) {
  const std::size_t ns = constraints.synonyms.size();
  const std::size_t na = constraints.antonyms.size();
  if (k1 == 0 && k2 == 0) throw ConfigError("batch sizes k1 and k2 are both 0");
  if (ns == 0 && na == 0) throw ConfigError("no constraints to batch");

  const std::size_t nb_s = (ns == 0 || k1 == 0) ? 0 : (ns + k1 - 1) / k1;
  const std::size_t nb_a = (na == 0 || k2 == 0) ? 0 : (na + k2 - 1) / k2;
  const std::size_t num_batches = std::max(nb_s, nb_a);
  if (num_batches == 0) {
    throw ConfigError("batch sizes exclude every available constraint");
  }

  std::vector<WordPair> syn = constraints.synonyms;
  std::vector<WordPair> ant = constraints.antonyms;
  Rng syn_rng(derive_seed(seed, epoch, 0));
  Rng ant_rng(derive_seed(seed, epoch, 1));
  syn_rng.shuffle(syn);
  ant_rng.shuffle(ant);

  auto slice = [num_batches](const std::vector<WordPair>& list, std::size_t k,
                             std::size_t nb_list, std::size_t i) {
    std::vector<WordPair> out;
    if (list.empty() || k == 0) return out;
    if (nb_list == num_batches) {
      const std::size_t lo = i * k;
      const std::size_t hi = std::min(lo + k, list.size());
      out.assign(list.begin() + lo, list.begin() + hi);
    } else {
      out.reserve(k);
      for (std::size_t j = 0; j < k; ++j) {
        out.push_back(list[(i * k + j) % list.size()]);
      }
    }
    return out;
  };

  std::vector<BatchSlices> batches(num_batches);
  for (std::size_t i = 0; i < num_batches; ++i) {
    batches[i].synonyms = slice(syn, k1, nb_s, i);
    batches[i].antonyms = slice(ant, k2, nb_a, i);
  }
  return batches;
}

// A batch with negative examples attached: for each pair, the in-batch
// word closest to (synonyms) or furthest from (antonyms) each member.
// A pair whose candidate pool is empty carries no negatives and
// contributes no hinge terms.
struct MiniBatch {
  std::vector<WordPair> syn_pairs;
  std::vector<WordPair> ant_pairs;
  std::vector<std::optional<WordPair>> syn_negatives;
  std::vector<std::optional<WordPair>> ant_negatives;

  // All distinct words occurring in the batch's pairs, ascending.
  std::vector<std::uint32_t> words;
};

namespace detail {

enum class NegativeKind { Closest, Furthest };

// Argmax/argmin over one row of the pool cosine table, skipping both pair
// members. Candidates are scanned in ascending vocabulary order and only
// strict improvements replace the incumbent, so ties go to the lower index.
inline std::optional<std::uint32_t> pick_negative(
    std::span<const std::uint32_t> pool, std::span<const double> cosine_row,
    const WordPair& pair, NegativeKind kind) {
  std::optional<std::uint32_t> best;
  double best_score = 0.0;
  for (std::size_t c = 0; c < pool.size(); ++c) {
    const std::uint32_t w = pool[c];
    if (w == pair.l || w == pair.r) continue;
    const double score = cosine_row[c];
    if (!best || (kind == NegativeKind::Closest ? score > best_score
                                                : score < best_score)) {
      best = w;
      best_score = score;
    }
  }
  return best;
}

}  // namespace detail

// Attaches negative examples to a batch. Candidates are the distinct words
// of the batch's own pairs; similarities are cosines over current vectors.
// The pool's pairwise cosine table is built once per batch from a
// contiguous copy of its rows (the table rows parallelize across threads
// with identical results), and each selection is then a table scan.
inline MiniBatch select_negatives(const BatchSlices& slices,
                                  const VectorSpace& space,
                                  std::size_t threads = 1) {
  MiniBatch batch;
  batch.syn_pairs = slices.synonyms;
  batch.ant_pairs = slices.antonyms;
  if (batch.syn_pairs.empty() && batch.ant_pairs.empty()) {
    throw ConfigError("cannot select negatives for an empty batch");
  }

  auto& pool = batch.words;
  for (const auto& p : batch.syn_pairs) {
    pool.push_back(p.l);
    pool.push_back(p.r);
  }
  for (const auto& p : batch.ant_pairs) {
    pool.push_back(p.l);
    pool.push_back(p.r);
  }
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

  const std::size_t m = pool.size();
  const std::size_t dim = space.dim();
  std::vector<double> rows(m * dim);
  std::vector<double> norms(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto r = space.row(pool[i]);
    std::copy(r.begin(), r.end(), rows.begin() + i * dim);
    norms[i] = norm(r);
  }
  std::vector<double> cosines(m * m);
  parallel_for(m, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const std::span<const double> a(rows.data() + i * dim, dim);
      for (std::size_t j = 0; j < m; ++j) {
        double score = 0.0;
        if (norms[i] != 0.0 && norms[j] != 0.0) {
          score = dot(a, {rows.data() + j * dim, dim}) / (norms[i] * norms[j]);
        }
        cosines[i * m + j] = score;
      }
    }
  });

  std::unordered_map<std::uint32_t, std::size_t> position;
  position.reserve(m);
  for (std::size_t i = 0; i < m; ++i) position.emplace(pool[i], i);

  auto attach = [&](const std::vector<WordPair>& pairs,
                    std::vector<std::optional<WordPair>>& negatives,
                    detail::NegativeKind kind) {
    negatives.assign(pairs.size(), std::nullopt);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto& p = pairs[i];
      const std::span<const double> row_l(cosines.data() + position.at(p.l) * m,
                                          m);
      const std::span<const double> row_r(cosines.data() + position.at(p.r) * m,
                                          m);
      auto tl = detail::pick_negative(pool, row_l, p, kind);
      auto tr = detail::pick_negative(pool, row_r, p, kind);
      if (tl && tr) negatives[i] = WordPair{*tl, *tr};
    }
  };
  attach(batch.syn_pairs, batch.syn_negatives, detail::NegativeKind::Closest);
  attach(batch.ant_pairs, batch.ant_negatives, detail::NegativeKind::Furthest);
  return batch;
}

}  // namespace arep
