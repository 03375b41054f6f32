// Drives the built CLI binary end to end through a shell.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "test_helpers.hpp"

using helpers::TempDir;
using helpers::write_file;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout only
};

RunResult run(const std::string& args, bool keep_stderr = false) {
  std::string cmd = std::string(AREP_CLI_PATH) + " " + args +
                    (keep_stderr ? " 2>&1" : " 2>/dev/null");
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  char buffer[4096];
  while (std::size_t n = fread(buffer, 1, sizeof(buffer), pipe)) {
    result.output.append(buffer, n);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

// Toy inputs shared by several cases: 6 words in 3-d, two synonym pairs
// and one antonym pair.
void write_toy_inputs(const TempDir& dir) {
  write_file(dir.file("vec.txt"),
             "red 1 0 0\n"
             "crimson 0.8 0.6 0\n"
             "blue 0 1 0\n"
             "azure 0 0.8 0.6\n"
             "hot 0 0 1\n"
             "cold 0.6 0 0.8\n");
  write_file(dir.file("syn.txt"), "red crimson\nblue azure\n");
  write_file(dir.file("ant.txt"), "hot cold\n");
}

std::string manifest_to_args(const std::string& manifest_text) {
  std::string command;
  std::string args;
  for (const auto& line : lines_of(manifest_text)) {
    auto eq = line.find('=');
    REQUIRE(eq != std::string::npos);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "command") {
      command = value;
    } else if (value == "true") {
      args += " --" + key;
    } else if (value != "false") {
      args += " --" + key + " " + value;
    }
  }
  REQUIRE_FALSE(command.empty());
  return command + args;
}

}  // namespace

TEST_CASE("specialize runs end to end with defaults") {
  TempDir dir;
  write_toy_inputs(dir);
  auto out = dir.file("out.txt");
  auto result = run("specialize --vectors " + dir.file("vec.txt") +
                    " --synonyms " + dir.file("syn.txt") + " --antonyms " +
                    dir.file("ant.txt") + " --output " + out);
  REQUIRE(result.exit_code == 0);

  auto manifest = read_file(out + ".manifest");
  REQUIRE(manifest.find("command=specialize\n") != std::string::npos);
  REQUIRE(manifest.find("delta-syn=0.6\n") != std::string::npos);
  REQUIRE(manifest.find("delta-ant=0\n") != std::string::npos);
  REQUIRE(manifest.find("lambda-reg=1e-09\n") != std::string::npos);
  REQUIRE(manifest.find("k1=50\n") != std::string::npos);
  REQUIRE(manifest.find("k2=50\n") != std::string::npos);
  REQUIRE(manifest.find("epochs=5\n") != std::string::npos);

  auto log = read_file(out + ".log");
  REQUIRE(lines_of(log).size() == 5);
  REQUIRE(log.find("epoch=0 attract=") != std::string::npos);

  auto vectors = read_file(out);
  REQUIRE(vectors.find("red ") != std::string::npos);
}

TEST_CASE("specialize usage errors exit with 2") {
  TempDir dir;
  write_toy_inputs(dir);

  SECTION("no constraint files") {
    auto result = run("specialize --vectors " + dir.file("vec.txt") +
                      " --output " + dir.file("o.txt"));
    REQUIRE(result.exit_code == 2);
  }
  SECTION("zero epochs") {
    auto result = run("specialize --vectors " + dir.file("vec.txt") +
                      " --synonyms " + dir.file("syn.txt") + " --output " +
                      dir.file("o.txt") + " --epochs 0");
    REQUIRE(result.exit_code == 2);
  }
  SECTION("missing required --output") {
    auto result = run("specialize --vectors " + dir.file("vec.txt") +
                      " --synonyms " + dir.file("syn.txt"));
    REQUIRE(result.exit_code == 2);
  }
}

TEST_CASE("specialize data errors exit with 1") {
  TempDir dir;
  write_toy_inputs(dir);
  auto result = run("specialize --vectors " + dir.file("missing.txt") +
                    " --synonyms " + dir.file("syn.txt") + " --output " +
                    dir.file("o.txt"));
  REQUIRE(result.exit_code == 1);
}

TEST_CASE("manifest replay reproduces the output bit for bit") {
  TempDir dir;
  write_toy_inputs(dir);
  auto out = dir.file("out.txt");
  auto result = run("specialize --vectors " + dir.file("vec.txt") +
                    " --synonyms " + dir.file("syn.txt") + " --antonyms " +
                    dir.file("ant.txt") + " --output " + out +
                    " --seed 7 --epochs 6");
  REQUIRE(result.exit_code == 0);
  const std::string reference = read_file(out);
  REQUIRE_FALSE(reference.empty());

  auto replay_args = manifest_to_args(read_file(out + ".manifest"));
  auto replay = run(replay_args);
  REQUIRE(replay.exit_code == 0);
  REQUIRE(read_file(out) == reference);
}

TEST_CASE("counterfit with a zero radius logs vsp=0 throughout") {
  TempDir dir;
  write_toy_inputs(dir);
  auto out = dir.file("cf.txt");
  auto result = run("counterfit --vectors " + dir.file("vec.txt") +
                    " --synonyms " + dir.file("syn.txt") + " --antonyms " +
                    dir.file("ant.txt") + " --output " + out +
                    " --vsp-radius 0");
  REQUIRE(result.exit_code == 0);
  auto log_lines = lines_of(read_file(out + ".log"));
  REQUIRE(log_lines.size() == 5);
  for (const auto& line : log_lines) {
    REQUIRE(line.find("vsp=0.000000") != std::string::npos);
  }
}

TEST_CASE("counterfit refuses huge VSP scans without the override") {
  TempDir dir;
  std::ostringstream big;
  for (int i = 0; i < 20001; ++i) {
    big << "w" << i << " 1 " << i << "\n";
  }
  write_file(dir.file("big.txt"), big.str());
  write_file(dir.file("syn.txt"), "w0 w1\n");
  auto result = run("counterfit --vectors " + dir.file("big.txt") +
                        " --synonyms " + dir.file("syn.txt") + " --output " +
                        dir.file("o.txt"),
                    true);
  REQUIRE(result.exit_code == 2);
  REQUIRE(result.output.find("--allow-large-vsp") != std::string::npos);
}

TEST_CASE("counterfit is reproducible across runs") {
  TempDir dir;
  write_toy_inputs(dir);
  auto out1 = dir.file("cf1.txt");
  auto out2 = dir.file("cf2.txt");
  std::string common = "counterfit --vectors " + dir.file("vec.txt") +
                       " --synonyms " + dir.file("syn.txt") + " --antonyms " +
                       dir.file("ant.txt") + " --seed 9 --output ";
  REQUIRE(run(common + out1).exit_code == 0);
  REQUIRE(run(common + out2).exit_code == 0);
  REQUIRE(read_file(out1) == read_file(out2));
}

TEST_CASE("evaluate prints one rho line per dataset in order") {
  TempDir dir;
  // cosines to "anchor" rise word by word; golds agree -> rho = 1
  write_file(dir.file("vec.txt"),
             "anchor 1 0\n"
             "far 0 1\n"
             "mid 0.7071 0.7071\n"
             "near 0.9 0.43589\n");
  write_file(dir.file("d1.txt"),
             "anchor far 1\nanchor mid 2\nanchor near 3\n");
  write_file(dir.file("d2.txt"),
             "anchor far 3\nanchor mid 2\nanchor near 1\n");

  auto result = run("evaluate --vectors " + dir.file("vec.txt") +
                    " --dataset " + dir.file("d1.txt") + " --dataset " +
                    dir.file("d2.txt"));
  REQUIRE(result.exit_code == 0);
  auto lines = lines_of(result.output);
  REQUIRE(lines.size() == 2);
  REQUIRE(lines[0].find("rho=1.000000 covered=3/3") == 0);
  REQUIRE(lines[0].find("d1.txt") != std::string::npos);
  REQUIRE(lines[1].find("rho=-1.000000 covered=3/3") == 0);
}

TEST_CASE("evaluate applies TAG:PATH dataset prefixes") {
  TempDir dir;
  write_file(dir.file("en.txt"),
             "anchor 1 0\nfar 0 1\nmid 0.7071 0.7071\nnear 0.9 0.43589\n");
  write_file(dir.file("de.txt"), "wort 1 0\n");
  write_file(dir.file("d.txt"), "anchor far 1\nanchor mid 2\nanchor near 3\n");
  auto result = run("evaluate --vectors " + dir.file("en.txt") +
                    " --lang en --vectors " + dir.file("de.txt") +
                    " --lang de --dataset en:" + dir.file("d.txt"));
  REQUIRE(result.exit_code == 0);
  REQUIRE(result.output.find("rho=1.000000 covered=3/3") == 0);
}

TEST_CASE("evaluate fails on insufficient coverage") {
  TempDir dir;
  write_file(dir.file("vec.txt"), "a 1 0\nb 0 1\n");
  write_file(dir.file("d.txt"), "a b 1\nmissing words 2\n");
  auto result = run("evaluate --vectors " + dir.file("vec.txt") +
                    " --dataset " + dir.file("d.txt"));
  REQUIRE(result.exit_code == 1);
}

TEST_CASE("neighbors prints word/cosine lines") {
  TempDir dir;
  write_toy_inputs(dir);

  SECTION("top k") {
    auto result = run("neighbors --vectors " + dir.file("vec.txt") +
                      " --query red --k 3");
    REQUIRE(result.exit_code == 0);
    auto lines = lines_of(result.output);
    REQUIRE(lines.size() == 3);
    REQUIRE(lines[0].find("crimson\t0.8") == 0);
  }
  SECTION("unknown query exits 1") {
    auto result = run("neighbors --vectors " + dir.file("vec.txt") +
                      " --query nope");
    REQUIRE(result.exit_code == 1);
  }
  SECTION("language filter") {
    write_file(dir.file("en.txt"), "sun 1 0\nmoon 0 1\n");
    write_file(dir.file("de.txt"), "sonne 0.9 0.1\nmond 0.1 0.9\n");
    write_file(dir.file("sv.txt"), "sol 0.95 0.05\n");
    auto result = run("neighbors --vectors " + dir.file("en.txt") +
                      " --lang en --vectors " + dir.file("de.txt") +
                      " --lang de --vectors " + dir.file("sv.txt") +
                      " --lang sv --query en_sun --k 4 --langs de,sv");
    REQUIRE(result.exit_code == 0);
    auto lines = lines_of(result.output);
    REQUIRE(lines.size() == 3);
    for (const auto& line : lines) {
      REQUIRE((line.rfind("de_", 0) == 0 || line.rfind("sv_", 0) == 0));
    }
  }
}

TEST_CASE("grid writes ranked TSV and prints the best row") {
  TempDir dir;
  write_toy_inputs(dir);
  write_file(dir.file("val.txt"), "red crimson 10\nblue azure 9\nhot cold 1\n");
  auto tsv = dir.file("grid.tsv");

  SECTION("2x2 grid yields four rows") {
    auto result = run("grid --vectors " + dir.file("vec.txt") + " --synonyms " +
                      dir.file("syn.txt") + " --validation " +
                      dir.file("val.txt") + " --output " + tsv +
                      " --grid-lambda-reg 1e-9,1e-3 --grid-delta-syn 0.4,0.6");
    REQUIRE(result.exit_code == 0);
    REQUIRE(result.output.find("best: ") == 0);
    auto rows = lines_of(read_file(tsv));
    REQUIRE(rows.size() == 5);  // header + 4 points
    REQUIRE(rows[0].find("constraints\tlambda_reg") == 0);
  }
  SECTION("malformed grid value exits 2") {
    auto result = run("grid --vectors " + dir.file("vec.txt") + " --synonyms " +
                      dir.file("syn.txt") + " --validation " +
                      dir.file("val.txt") + " --output " + tsv +
                      " --grid-lambda-reg banana");
    REQUIRE(result.exit_code == 2);
  }
  SECTION("single-point grid matches specialize + evaluate") {
    auto result = run("grid --vectors " + dir.file("vec.txt") + " --synonyms " +
                      dir.file("syn.txt") + " --antonyms " + dir.file("ant.txt") +
                      " --validation " + dir.file("val.txt") + " --output " +
                      tsv + " --seed 5");
    REQUIRE(result.exit_code == 0);

    auto out = dir.file("direct.txt");
    REQUIRE(run("specialize --vectors " + dir.file("vec.txt") + " --synonyms " +
                dir.file("syn.txt") + " --antonyms " + dir.file("ant.txt") +
                " --output " + out + " --seed 5")
                .exit_code == 0);
    auto eval = run("evaluate --vectors " + out + " --no-normalize --dataset " +
                    dir.file("val.txt"));
    REQUIRE(eval.exit_code == 0);

    // same rho up to the 6-digit output format of both paths
    auto grid_rho_pos = result.output.find("rho=");
    REQUIRE(grid_rho_pos != std::string::npos);
    auto grid_rho = result.output.substr(grid_rho_pos + 4, 8);
    REQUIRE(eval.output.find("rho=" + grid_rho.substr(0, 8)) !=
            std::string::npos);
  }
}

TEST_CASE("merge writes a prefixed space") {
  TempDir dir;
  write_file(dir.file("en.txt"), "cheap 1 0 0 0 0\n");
  write_file(dir.file("it.txt"), "economico 0 1 0 0 0\n");
  auto out = dir.file("merged.txt");
  auto result = run("merge --vectors " + dir.file("en.txt") +
                    " --lang en --vectors " + dir.file("it.txt") +
                    " --lang it --output " + out);
  REQUIRE(result.exit_code == 0);
  auto content = read_file(out);
  REQUIRE(content.find("en_cheap") != std::string::npos);
  REQUIRE(content.find("it_economico") != std::string::npos);
  REQUIRE(read_file(out + ".manifest").find("command=merge") !=
          std::string::npos);

  SECTION("dimension mismatch fails with exit 1") {
    write_file(dir.file("bad.txt"), "x 1 2\n");
    auto bad = run("merge --vectors " + dir.file("en.txt") +
                   " --lang en --vectors " + dir.file("bad.txt") +
                   " --lang xx --output " + dir.file("m2.txt"));
    REQUIRE(bad.exit_code == 1);
  }
}
