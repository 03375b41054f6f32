#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "arep/vector_space.hpp"
#include "test_helpers.hpp"

using namespace arep;
using helpers::TempDir;
using helpers::write_file;

TEST_CASE("load_vectors reads plain rows") {
  TempDir dir;
  auto path = dir.file("v.txt");
  write_file(path, "a 1 0\nb 0 1\n");
  auto space = load_vectors(path, {.unit_normalize = false});
  REQUIRE(space.size() == 2);
  REQUIRE(space.dim() == 2);
  REQUIRE(space.word(0) == "a");
  REQUIRE(space.word(1) == "b");
  REQUIRE(space.row(0)[0] == 1.0);
  REQUIRE(space.row(1)[1] == 1.0);
  // current == original at load
  REQUIRE(space.current() == space.original());
}

TEST_CASE("load_vectors consumes a count/dim header") {
  TempDir dir;
  auto path = dir.file("v.txt");
  write_file(path, "2 3\na 1 0 0\nb 0 1 0\n");
  LoadStats stats;
  auto space = load_vectors(path, {.unit_normalize = false}, &stats);
  REQUIRE(space.dim() == 3);
  REQUIRE(space.size() == 2);
  REQUIRE(stats.had_header);
  REQUIRE_FALSE(space.contains("2"));
}

TEST_CASE("load_vectors keeps the first duplicate and counts skips") {
  TempDir dir;
  auto path = dir.file("v.txt");
  write_file(path, "a 1 0\na 0 1\n");
  LoadStats stats;
  auto space = load_vectors(path, {.unit_normalize = false}, &stats);
  REQUIRE(space.size() == 1);
  REQUIRE(stats.duplicates == 1);
  REQUIRE(space.row(0)[0] == 1.0);
}

TEST_CASE("load_vectors error cases") {
  TempDir dir;
  auto path = dir.file("v.txt");

  SECTION("malformed line names the line number") {
    write_file(path, "a 1 0\nb\n");
    try {
      load_vectors(path);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      REQUIRE(std::string(e.what()).find(":2") != std::string::npos);
    }
  }
  SECTION("inconsistent dimensionality") {
    write_file(path, "a 1 0\nb 1 2 3\n");
    REQUIRE_THROWS_AS(load_vectors(path), ParseError);
  }
  SECTION("empty file") {
    write_file(path, "");
    REQUIRE_THROWS_AS(load_vectors(path), Error);
  }
  SECTION("expect_dim mismatch") {
    write_file(path, "a 1 0\n");
    REQUIRE_THROWS_AS(load_vectors(path, {.expect_dim = 5}), ParseError);
    REQUIRE_NOTHROW(load_vectors(path, {.expect_dim = 2}));
  }
  SECTION("missing file") {
    REQUIRE_THROWS_AS(load_vectors(dir.file("nope.txt")), IoError);
  }
}

TEST_CASE("unit normalization at load") {
  TempDir dir;
  auto path = dir.file("v.txt");
  write_file(path, "a 3 4\nb 0 0\n");
  LoadStats stats;
  auto space = load_vectors(path, {}, &stats);
  REQUIRE(space.row(0)[0] == Catch::Approx(0.6));
  REQUIRE(space.row(0)[1] == Catch::Approx(0.8));
  REQUIRE(stats.zero_rows == 1);
  REQUIRE(space.row(1)[0] == 0.0);
  // originals are normalized too (snapshot after normalization)
  REQUIRE(std::abs(norm(space.original_row(0)) - 1.0) < 1e-6);
}

TEST_CASE("unit_normalize is idempotent") {
  auto space = helpers::random_space(20, 7, 99, false);
  unit_normalize(space);
  for (std::size_t i = 0; i < space.size(); ++i) {
    REQUIRE(std::abs(norm(space.row(i)) - 1.0) < 1e-9);
  }
  std::vector<double> once = space.current();
  unit_normalize(space);
  for (std::size_t i = 0; i < once.size(); ++i) {
    REQUIRE(std::abs(space.current()[i] - once[i]) < 1e-12);
  }
}

TEST_CASE("save/load round-trip") {
  TempDir dir;
  auto space = helpers::random_space(3, 4, 7);
  auto path = dir.file("out.txt");
  save_vectors(space, path);
  auto back = load_vectors(path, {.unit_normalize = false});
  REQUIRE(back.vocab() == space.vocab());
  for (std::size_t i = 0; i < space.size(); ++i) {
    for (std::size_t j = 0; j < space.dim(); ++j) {
      REQUIRE(std::abs(back.row(i)[j] - space.row(i)[j]) <= 1e-6);
    }
  }
}

TEST_CASE("save_vectors error cases") {
  auto space = helpers::random_space(2, 2, 1);
  SECTION("empty path") { REQUIRE_THROWS_AS(save_vectors(space, ""), IoError); }
  SECTION("word with whitespace") {
    VectorSpace bad(2);
    const double v[2] = {1.0, 0.0};
    bad.push_word("a b", v);
    REQUIRE_THROWS_AS(save_vectors(bad, "/tmp/never.txt"), Error);
  }
}

TEST_CASE("merge_spaces prefixes and validates") {
  auto en = helpers::random_space(1, 5, 1);
  auto it = helpers::random_space(1, 5, 2);

  SECTION("basic merge") {
    auto merged = merge_spaces(
        {{LanguageTag("en"), &en}, {LanguageTag("it"), &it}});
    REQUIRE(merged.vocab() ==
            std::vector<std::string>{"en_w0", "it_w0"});
    REQUIRE(merged.dim() == 5);
    for (std::size_t j = 0; j < 5; ++j) {
      REQUIRE(merged.row(0)[j] == en.row(0)[j]);
      REQUIRE(merged.row(1)[j] == it.row(0)[j]);
    }
    REQUIRE(merged.current() == merged.original());
  }
  SECTION("dimension mismatch names the tag") {
    auto d10 = helpers::random_space(1, 10, 3);
    try {
      merge_spaces({{LanguageTag("en"), &en}, {LanguageTag("de"), &d10}});
      FAIL("expected Error");
    } catch (const Error& e) {
      REQUIRE(std::string(e.what()).find("de") != std::string::npos);
    }
  }
  SECTION("duplicate tag") {
    REQUIRE_THROWS_AS(
        merge_spaces({{LanguageTag("en"), &en}, {LanguageTag("en"), &it}}),
        ConfigError);
  }
  SECTION("merged size is the sum of input sizes") {
    auto a = helpers::random_space(17, 4, 4);
    auto b = helpers::random_space(9, 4, 5);
    auto merged =
        merge_spaces({{LanguageTag("aa"), &a}, {LanguageTag("bb"), &b}});
    REQUIRE(merged.size() == a.size() + b.size());
  }
}

TEST_CASE("language tag validation") {
  REQUIRE_THROWS_AS(LanguageTag(""), ConfigError);
  REQUIRE_THROWS_AS(LanguageTag("e_n"), ConfigError);
  REQUIRE(LanguageTag("en").code == "en");
}

TEST_CASE("init_random") {
  std::vector<std::string> vocab{"a", "b", "c"};

  SECTION("d=6 keeps coordinates within [-1, 1]") {
    auto space = init_random(vocab, 6, 42);
    for (std::size_t i = 0; i < space.size(); ++i) {
      for (double v : space.row(i)) {
        REQUIRE(v >= -1.0);
        REQUIRE(v <= 1.0);
      }
    }
    REQUIRE(space.current() == space.original());
  }
  SECTION("same seed is bit-identical, different seeds differ") {
    auto a = init_random(vocab, 8, 7);
    auto b = init_random(vocab, 8, 7);
    REQUIRE(a.current() == b.current());
    auto c = init_random(vocab, 8, 8);
    REQUIRE(a.current() != c.current());
  }
  SECTION("d=24 samples stay within +/-0.5 with near-zero mean") {
    std::vector<std::string> big;
    for (int i = 0; i < 10000; ++i) big.push_back("w" + std::to_string(i));
    auto space = init_random(big, 24, 1234);
    double sum = 0.0, mn = 1.0, mx = -1.0;
    for (double v : space.current()) {
      sum += v;
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    REQUIRE(mn >= -0.5);
    REQUIRE(mx <= 0.5);
    REQUIRE(std::abs(sum / space.current().size()) < 0.02);
  }
  SECTION("dim 0 is rejected") {
    REQUIRE_THROWS_AS(init_random(vocab, 0, 1), ConfigError);
  }
  SECTION("duplicate vocabulary word is rejected") {
    REQUIRE_THROWS_AS(init_random({"a", "a"}, 4, 1), ConfigError);
  }
}

TEST_CASE("nearest_neighbors on a toy space") {
  VectorSpace space(2);
  const double a[2] = {1, 0};
  const double b[2] = {1, 0};
  const double c[2] = {0, 1};
  space.push_word("a", a);
  space.push_word("b", b);
  space.push_word("c", c);
  space.snapshot_original();

  auto result = nearest_neighbors(space, "a", 2);
  REQUIRE(result.size() == 2);
  REQUIRE(result[0].word == "b");
  REQUIRE(result[0].score == Catch::Approx(1.0));
  REQUIRE(result[1].word == "c");
  REQUIRE(result[1].score == Catch::Approx(0.0));

  SECTION("k larger than vocab is truncated") {
    REQUIRE(nearest_neighbors(space, "a", 100).size() == 2);
  }
  SECTION("unknown query") {
    REQUIRE_THROWS_AS(nearest_neighbors(space, "zzz", 1), NotFoundError);
  }
}

TEST_CASE("nearest_neighbors matches a brute-force scan") {
  auto space = helpers::random_space(1000, 12, 31337);
  for (const auto& query : {"w0", "w123", "w999"}) {
    auto fast = nearest_neighbors(space, query, 10, std::nullopt, 4);

    // plain full scan with the same tie-break
    auto qi = *space.find(query);
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < space.size(); ++i) {
      if (i == qi) continue;
      all.push_back({cosine(space.row(qi), space.row(i)), i});
    }
    std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
      if (x.first != y.first) return x.first > y.first;
      return x.second < y.second;
    });
    REQUIRE(fast.size() == 10);
    for (std::size_t i = 0; i < fast.size(); ++i) {
      REQUIRE(fast[i].word == space.word(all[i].second));
      REQUIRE(fast[i].score == Catch::Approx(all[i].first));
    }
  }
}

TEST_CASE("nearest_neighbors language filter") {
  auto en = helpers::random_space(5, 4, 1);
  auto de = helpers::random_space(5, 4, 2);
  auto sv = helpers::random_space(5, 4, 3);
  auto merged = merge_spaces({{LanguageTag("en"), &en},
                              {LanguageTag("de"), &de},
                              {LanguageTag("sv"), &sv}});
  auto result = nearest_neighbors(merged, "en_w0", 20,
                                  std::set<std::string>{"de", "sv"});
  REQUIRE(result.size() == 10);
  for (const auto& n : result) {
    auto tag = tag_of(n.word);
    REQUIRE((tag == "de" || tag == "sv"));
  }
}

TEST_CASE("round-trip preserves larger spaces") {
  TempDir dir;
  auto space = helpers::random_space(1000, 16, 555);
  auto path = dir.file("big.txt");
  save_vectors(space, path);
  auto back = load_vectors(path, {.unit_normalize = false});
  REQUIRE(back.vocab() == space.vocab());
  double max_err = 0.0;
  for (std::size_t i = 0; i < space.current().size(); ++i) {
    max_err = std::max(max_err,
                       std::abs(back.current()[i] - space.current()[i]));
  }
  REQUIRE(max_err <= 1e-6);
}
