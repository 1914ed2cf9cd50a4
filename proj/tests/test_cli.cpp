#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result cli(const std::string& args) {
  std::string cmd = std::string(QHTT_CLI) + " " + args + " 2>/dev/null";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string corpus(const char* f) { return qtest::corpusDir() + "/" + f; }

std::vector<std::string> filesIn(const std::string& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("check exit codes") {
  CHECK(cli("check " + corpus("hqw.qh") + " " + corpus("bell.qh")).code == 0);
  CHECK(cli("check " + corpus("teleport.qh")).code == 0);
  CHECK(cli("check --strict " + corpus("teleport.qh")).code == 1);
  CHECK(cli("check --literal-measurement " + corpus("testbell.qh")).code == 0);
  CHECK(cli("check --literal-measurement --strict " + corpus("testbell.qh")).code == 1);
  for (const auto& f : filesIn(qtest::negativeDir() + "/refuted")) {
    CAPTURE(f);
    CHECK(cli("check " + f).code == 1);
  }
  for (const auto& f : filesIn(qtest::negativeDir() + "/invalid")) {
    CAPTURE(f);
    CHECK(cli("check " + f).code == 2);
  }
  CHECK(cli("check /no/such/file.qh").code == 2);
  CHECK(cli("frobnicate").code == 2);
}

TEST_CASE("check text output") {
  Result r = cli("check " + corpus("hqw.qh"));
  CHECK(r.out.find("hqw: verified (2 proved, 0 refuted, 0 unknown)") != std::string::npos);
  r = cli("check " + qtest::negativeDir() + "/refuted/hqw_true.qh");
  CHECK(r.out.find("postconditionVC refuted") != std::string::npos);
  CHECK(r.out.find("emp; r = false") != std::string::npos);
}

TEST_CASE("check json output") {
  Result r = cli("check --format json " + corpus("teleport.qh"));
  json j = json::parse(r.out);
  REQUIRE(j["files"].size() == 1);
  const json& f = j["files"][0];
  CHECK(f["status"] == "conditional");
  bool sawTeleport = false;
  for (const auto& d : f["declarations"]) {
    CHECK(d.contains("proved"));
    CHECK(d.contains("obligations"));
    if (d["name"] == "teleport") {
      sawTeleport = true;
      CHECK(d["status"] == "conditional");
      CHECK(d["unknown"].get<int>() > 0);
    }
  }
  CHECK(sawTeleport);
}

TEST_CASE("vcs json") {
  fs::path empty = fs::temp_directory_path() / "qhtt_empty.qh";
  std::ofstream(empty).close();
  Result r = cli("vcs --format json " + empty.string());
  CHECK(r.code == 0);
  CHECK(json::parse(r.out) == json::parse(R"({"obligations": []})"));

  r = cli("vcs --format json " + corpus("hqw.qh"));
  json j = json::parse(r.out);
  REQUIRE(j["obligations"].size() == 2);
  for (const auto& ob : j["obligations"]) {
    CHECK(ob["decl"] == "hqw");
    CHECK(ob["verdict"] == "proved");
    CHECK(ob["residual"].is_null());
    CHECK(ob["span"]["line"].get<int>() >= 1);
  }
  CHECK(j["obligations"][0]["span"]["line"] <= j["obligations"][1]["span"]["line"]);
}

TEST_CASE("trace output") {
  Result r = cli("trace " + corpus("testbell.qh") + " testBell");
  CHECK(r.code == 0);
  for (const char* p : {"-- P0: emp", "-- P1: ", "-- P2: ", "-- P3: ", "-- P4: ", "-- P5: "})
    CHECK(r.out.find(p) != std::string::npos);
  CHECK(cli("trace " + corpus("testbell.qh") + " nope").code == 2);
}

TEST_CASE("run") {
  Result r = cli("run --format json --seed 3 --shots 200 " + corpus("rnd.qh") + " rnd");
  CHECK(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["decl"] == "rnd");
  CHECK(j["seed"] == 3);
  CHECK(j["shots"] == 200);
  int total = 0;
  for (const auto& o : j["outcomes"]) total += o["count"].get<int>();
  CHECK(total == 200);
  CHECK(j["errors"] == 0);

  CHECK(cli("run " + corpus("teleport.qh") + " teleport").code == 2);
  CHECK(cli("run " + qtest::negativeDir() + "/refuted/hqw_true.qh hqw").code == 1);
  Result forced = cli("run --force --shots 10 --format json " + qtest::negativeDir() + "/refuted/hqw_true.qh hqw");
  CHECK(forced.code == 1);
  bool failing = false;
  json fj = json::parse(forced.out);
  for (const auto& a : fj["assertions"]) failing |= a["fail"].get<int>() > 0;
  CHECK(failing);
}

TEST_CASE("same seed, same output") {
  std::string args = "run --seed 11 --shots 300 " + corpus("testbell.qh") + " testBell";
  CHECK(cli(args).out == cli(args).out);
}
