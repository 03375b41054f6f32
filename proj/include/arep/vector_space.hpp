#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "arep/common.hpp"
#include "arep/parallel.hpp"

namespace arep {

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const {
    return std::hash<std::string_view>{}(s);
  }
};

struct StringEq {
  using is_transparent = void;
  bool operator()(std::string_view a, std::string_view b) const {
    return a == b;
  }
};

// Language code used to prefix words when merging spaces ("en" -> "en_word").
struct LanguageTag {
  std::string code;

  explicit LanguageTag(std::string c) : code(std::move(c)) {
    if (code.empty()) throw ConfigError("language tag must be non-empty");
    if (code.find('_') != std::string::npos) {
      throw ConfigError("language tag must not contain '_': " + code);
    }
  }
};

// Prefix before the first underscore, or empty for unprefixed words.
inline std::string_view tag_of(std::string_view word) {
  auto pos = word.find('_');
  return pos == std::string_view::npos ? std::string_view{}
                                       : word.substr(0, pos);
}

// Four independent accumulators so the loop vectorizes under strict FP.
inline double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

inline double norm(std::span<const double> a) {
  return std::sqrt(dot(a, a));
}

// Cosine similarity; zero vectors get similarity 0 by convention.
inline double cosine(std::span<const double> a, std::span<const double> b) {
  double na = norm(a);
  double nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

// A vocabulary with two aligned |V| x d matrices: the trainable vectors
// ("current") and the frozen distributional snapshot ("original") that the
// training regularizer anchors to.
class VectorSpace {
 public:
  VectorSpace() = default;

  explicit VectorSpace(std::size_t dim) : dim_(dim) {}

  std::size_t size() const { return vocab_.size(); }
  std::size_t dim() const { return dim_; }
  bool empty() const { return vocab_.empty(); }

  const std::vector<std::string>& vocab() const { return vocab_; }
  const std::string& word(std::size_t i) const { return vocab_[i]; }

  std::optional<std::size_t> find(std::string_view w) const {
    auto it = index_.find(w);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool contains(std::string_view w) const { return index_.contains(w); }

  std::span<double> row(std::size_t i) {
    return {current_.data() + i * dim_, dim_};
  }
  std::span<const double> row(std::size_t i) const {
    return {current_.data() + i * dim_, dim_};
  }
  std::span<const double> original_row(std::size_t i) const {
    return {original_.data() + i * dim_, dim_};
  }

  const std::vector<double>& current() const { return current_; }
  std::vector<double>& current() { return current_; }
  const std::vector<double>& original() const { return original_; }

  // Re-capture the frozen snapshot from the current vectors.
  void snapshot_original() { original_ = current_; }

  // Appends a word; returns false (and changes nothing) on a duplicate.
  bool push_word(std::string word, std::span<const double> values) {
    if (dim_ == 0) dim_ = values.size();
    if (index_.contains(word)) return false;
    index_.emplace(word, vocab_.size());
    vocab_.push_back(std::move(word));
    current_.insert(current_.end(), values.begin(), values.end());
    return true;
  }

 private:
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::size_t, StringHash, StringEq> index_;
  std::size_t dim_ = 0;
  std::vector<double> current_;
  std::vector<double> original_;
};

// Normalizes every nonzero row of the current vectors to unit L2 norm.
// Zero rows are left alone; returns how many there were.
inline std::size_t unit_normalize(VectorSpace& space) {
  std::size_t zero_rows = 0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    auto r = space.row(i);
    double n = norm(r);
    if (n == 0.0) {
      ++zero_rows;
      continue;
    }
    for (double& v : r) v /= n;
  }
  return zero_rows;
}

struct LoadOptions {
  std::optional<std::size_t> expect_dim;
  bool unit_normalize = true;
};

struct LoadStats {
  std::size_t rows = 0;
  std::size_t duplicates = 0;
  std::size_t zero_rows = 0;
  bool had_header = false;
};

// Reads the word2vec-style text format: an optional "<count> <dim>" header
// (detected as a first line of exactly two integer tokens), then one
// "<word> <f1> ... <fd>" row per line. Duplicate words keep the first
// occurrence. By default rows are unit-normalized and then snapshotted as
// the original vectors.
inline VectorSpace load_vectors(const std::string& path,
                                const LoadOptions& options = {},
                                LoadStats* stats = nullptr) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vector file: " + path);

  VectorSpace space;
  LoadStats local;
  std::optional<std::size_t> dim;
  if (options.expect_dim) {
    if (*options.expect_dim == 0) throw ConfigError("expected dim must be >= 1");
  }

  std::string line;
  std::size_t line_no = 0;
  bool first_content_line = true;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;

    if (first_content_line && tokens.size() == 2) {
      long long a = 0, b = 0;
      if (parse_integer(tokens[0], a) && parse_integer(tokens[1], b)) {
        // Header "<count> <dim>": consume it and pin the dimensionality.
        if (b <= 0) {
          throw ParseError(path + ":" + std::to_string(line_no) +
                           ": header declares non-positive dimension");
        }
        dim = static_cast<std::size_t>(b);
        local.had_header = true;
        first_content_line = false;
        continue;
      }
    }
    first_content_line = false;

    if (tokens.size() < 2) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": expected a word and at least one coordinate");
    }
    const std::size_t row_dim = tokens.size() - 1;
    if (!dim) {
      dim = row_dim;
    } else if (row_dim != *dim) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": dimension mismatch: expected " +
                       std::to_string(*dim) + " coordinates, found " +
                       std::to_string(row_dim));
    }
    values.clear();
    values.reserve(row_dim);
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      double v = 0.0;
      if (!parse_double(tokens[i], v)) {
        throw ParseError(path + ":" + std::to_string(line_no) +
                         ": cannot parse coordinate '" +
                         std::string(tokens[i]) + "'");
      }
      values.push_back(v);
    }
    ++local.rows;
    if (!space.push_word(std::string(tokens[0]), values)) ++local.duplicates;
  }

  if (space.empty()) throw Error("empty vector file: " + path);
  if (options.expect_dim && space.dim() != *options.expect_dim) {
    throw ParseError(path + ": expected dimension " +
                     std::to_string(*options.expect_dim) + ", file has " +
                     std::to_string(space.dim()));
  }
  if (options.unit_normalize) local.zero_rows = unit_normalize(space);
  space.snapshot_original();
  if (stats) *stats = local;
  return space;
}

// Writes the same text format load_vectors reads, with a header line and
// coordinates at 6 significant digits.
inline void save_vectors(const VectorSpace& space, const std::string& path) {
  if (space.empty()) throw Error("refusing to save an empty vector space");
  for (std::size_t i = 0; i < space.size(); ++i) {
    const std::string& w = space.word(i);
    if (w.find_first_of(" \t\r\n\v\f") != std::string::npos) {
      throw Error("word contains whitespace and cannot be serialized: '" + w +
                  "'");
    }
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open output vector file: " + path);
  out << space.size() << ' ' << space.dim() << '\n';
  for (std::size_t i = 0; i < space.size(); ++i) {
    out << space.word(i);
    for (double v : space.row(i)) out << ' ' << format_sig6(v);
    out << '\n';
  }
  if (!out) throw IoError("failed while writing vector file: " + path);
}

// Joins per-language spaces into one space over "<tag>_<word>" vocabularies.
// Tags carry no underscores, so prefixed words cannot collide across inputs.
inline VectorSpace merge_spaces(
    const std::vector<std::pair<LanguageTag, const VectorSpace*>>& spaces) {
  if (spaces.empty()) throw ConfigError("merge requires at least one space");
  std::set<std::string> seen_tags;
  const std::size_t dim = spaces.front().second->dim();
  for (const auto& [tag, space] : spaces) {
    if (!seen_tags.insert(tag.code).second) {
      throw ConfigError("duplicate language tag: " + tag.code);
    }
    if (space->dim() != dim) {
      throw Error("dimension mismatch for language '" + tag.code + "': " +
                  std::to_string(space->dim()) + " vs " + std::to_string(dim));
    }
  }
  VectorSpace merged(dim);
  for (const auto& [tag, space] : spaces) {
    for (std::size_t i = 0; i < space->size(); ++i) {
      merged.push_word(tag.code + "_" + space->word(i), space->row(i));
    }
  }
  merged.snapshot_original();
  return merged;
}

// Xavier-style random space: coordinates i.i.d. uniform over
// [-sqrt(6)/sqrt(d), +sqrt(6)/sqrt(d)], deterministic in the seed.
inline VectorSpace init_random(const std::vector<std::string>& vocab,
                               std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw ConfigError("vector dimension must be >= 1");
  VectorSpace space(dim);
  const double bound = std::sqrt(6.0) / std::sqrt(static_cast<double>(dim));
  Rng rng(seed);
  std::vector<double> values(dim);
  for (const auto& w : vocab) {
    for (double& v : values) v = rng.uniform(-bound, bound);
    if (!space.push_word(w, values)) {
      throw ConfigError("duplicate word in vocabulary: " + w);
    }
  }
  space.snapshot_original();
  return space;
}

struct Neighbor {
  std::string word;
  double score;
};

// Top-k words by cosine to the query's current vector, excluding the query.
// Ties break toward the lower vocabulary index. The optional filter keeps
// only words whose "<tag>_" prefix is in the given set.
inline std::vector<Neighbor> nearest_neighbors(
    const VectorSpace& space, std::string_view query, std::size_t k,
    const std::optional<std::set<std::string>>& language_filter = std::nullopt,
    std::size_t threads = 1) {
  auto qi = space.find(query);
  if (!qi) throw NotFoundError("word not in vocabulary: " + std::string(query));
  const auto q = space.row(*qi);
  const double qnorm = norm(q);

  std::vector<double> scores(space.size());
  parallel_for(space.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto r = space.row(i);
      const double rn = norm(r);
      scores[i] = (qnorm == 0.0 || rn == 0.0) ? 0.0 : dot(q, r) / (qnorm * rn);
    }
  });

  std::vector<std::size_t> candidates;
  candidates.reserve(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (i == *qi) continue;
    if (language_filter &&
        !language_filter->contains(std::string(tag_of(space.word(i))))) {
      continue;
    }
    candidates.push_back(i);
  }
  k = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + k,
                    candidates.end(), [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  std::vector<Neighbor> result;
  result.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    result.push_back({space.word(candidates[i]), scores[candidates[i]]});
  }
  return result;
}

}  // namespace arep
