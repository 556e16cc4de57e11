#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "support.hpp"

namespace {

struct Run {
  int code;
  std::string out;
};

// Runs the CLI with stdout and stderr captured to a file in `dir`.
Run run(const testing::TempDir& dir, const std::string& args, const std::string& input = {}) {
  const auto log = dir / "log.txt";
  std::string cmd = std::string("\"") + DIFFAL_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  if (!input.empty()) {
    std::ofstream(dir / "stdin.txt") << input;
    cmd += " < \"" + (dir / "stdin.txt").string() + "\"";
  }
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::ostringstream s;
  s << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, s.str()};
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

std::size_t line_count(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

}  // namespace

TEST_CASE("cli: generate, cluster, and label a small dataset") {
  testing::TempDir dir("cli");
  const std::string data = (dir / "data").string();
  auto r = run(dir, "gen-data --dataset gaussian --set sizes=40,40 --set \"means=0,0;4,0\" --out \"" + data + "\"");
  REQUIRE(r.code == 0);
  CHECK(line_count(dir / "data" / "points.csv") == 80);
  CHECK(line_count(dir / "data" / "truth.csv") == 80);

  const std::string file = "--dataset file --points \"" + data + "/points.csv\" --truth \"" + data + "/truth.csv\"";
  r = run(dir, "lund " + file + " --t 10 --out \"" + (dir / "lund").string() + "\"");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "khat=2"));
  CHECK(line_count(dir / "lund" / "labels.csv") == 80);

  r = run(dir, "land " + file + " --t 10 --budget 2 --out \"" + (dir / "land").string() + "\"");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "OA=1"));
  CHECK(std::filesystem::exists(dir / "land" / "queries.csv"));

  r = run(dir, "scan-t " + file + " --out \"" + (dir / "scan").string() + "\"");
  CHECK(r.code == 0);
  CHECK(line_count(dir / "scan" / "scan_t.csv") == 18);

  r = run(dir, "purity " + file + " --t 10 --max-clusters 4 --out \"" + (dir / "purity").string() + "\"");
  CHECK(r.code == 0);
  CHECK(line_count(dir / "purity" / "purity.csv") == 1 + 3 * 4);

  r = run(dir, "experiment " + file + " --t 10 --budget 2 --method land,cbal --seed 3 --out \"" +
                   (dir / "exp").string() + "\"");
  CHECK(r.code == 0);
  CHECK(std::filesystem::exists(dir / "exp" / "results.csv"));
  CHECK(std::filesystem::exists(dir / "exp" / "manifest.txt"));
}

TEST_CASE("cli: interactive oracle reads labels from stdin") {
  testing::TempDir dir("cli-ia");
  const std::string data = (dir / "data").string();
  REQUIRE(run(dir, "gen-data --dataset gaussian --set sizes=30,30 --set \"means=0,0;4,0\" --out \"" + data + "\"")
              .code == 0);
  const auto r = run(dir, "land --interactive --dataset file --points \"" + data + "/points.csv\" --t 10 --budget 2",
                     "1\n2\n");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "QUERY "));
  CHECK(contains(r.out, "queries=2"));
}

TEST_CASE("cli: exit codes") {
  testing::TempDir dir("cli-err");
  CHECK(run(dir, "--help").code == 0);
  CHECK(run(dir, "lund --no-such-flag").code == 2);
  CHECK(run(dir, "lund --set unknown_key=1").code == 2);
  CHECK(run(dir, "lund --dataset file --points \"" + (dir / "missing.csv").string() + "\"").code == 3);
  std::ofstream(dir / "bad.csv") << "1,2\n3\n";
  CHECK(run(dir, "lund --dataset file --points \"" + (dir / "bad.csv").string() + "\"").code == 3);
}

TEST_CASE("cli: shipped configs parse") {
  testing::TempDir dir("cli-cfg");
  for (const auto& e : std::filesystem::directory_iterator(DIFFAL_CONFIGS)) {
    if (e.path().extension() != ".cfg") continue;
    CAPTURE(e.path().string());
    const auto r = run(dir, "gen-data --config \"" + e.path().string() + "\" --out \"" + (dir / "d").string() + "\"");
    CHECK(r.code == 0);
  }
}
