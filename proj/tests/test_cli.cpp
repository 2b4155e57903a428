// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <fmt/format.h>
#include <json.hpp>

#include "ipact/calendar.hpp"
#include "ipact/cli.hpp"
#include "ipact/io.hpp"

namespace fs = std::filesystem;
using ipact::read_file;
using ipact::cli::run;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const char* name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const char* rel) const { return (path / rel).string(); }
};

void write_text(const std::string& path, const std::string& body) { std::ofstream(path) << body; }

const char* kScenario = R"({
  "seed": 11, "start": "2015-01-05", "days": 56,
  "blocks": [
    {"block": "10.0.0.0", "regime": {"type": "static_sparse", "subscribers": 29, "p_weekend": 0.1}},
    {"block": "10.0.1.0", "regime": {"type": "dynamic_24h_lease", "subscribers": 192}},
    {"block": "10.0.2.0", "regime": {"type": "gateway"}},
    {"block": "10.0.3.0", "regime": {"type": "bot"}}
  ],
  "delegations": [{"registry": "lacnic", "cc": "BR", "prefix": "10.0.0.0/16"}]
})";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit 2") {
  CHECK(run(std::vector<std::string>{}) == ipact::cli::kExitUsageError);
  CHECK(run({"frobnicate"}) == 2);
  CHECK(run({"churn", "--no-such-flag"}) == 2);
  CHECK(run({"churn", "--windows", "0"}) == 2);
  CHECK(run({"churn", "--as-mapping", "sometimes"}) == 2);
  TempDir t("ipact_cli_usage");
  CHECK(run({"blocks", "-o", t / "o"}) == 2);  // no input at all
  CHECK(run({"compare", "--a", "x", "-o", t / "o"}) == 2);
}

TEST_CASE("help exits 0") { CHECK(run({"--help"}) == 0); }

TEST_CASE("missing or bad input exits 1") {
  TempDir t("ipact_cli_missing");
  CHECK(run({"ingest", "--activity", t / "nope.csv", "-o", t / "o"}) == ipact::cli::kExitDataError);
  write_text(t / "bad.csv", "2015-01-05,10.0.0.1,5\n2015-01-05,10.0.0.1\n");
  CHECK(run({"ingest", "--activity", t / "bad.csv", "-o", t / "o"}) == 1);
  CHECK(run({"ingest", "--activity", t / "bad.csv", "--tolerant", "-o", t / "o"}) == 0);
  const auto summary = nlohmann::json::parse(read_file(t / "o/ingest_summary.json"));
  CHECK(summary["skipped_lines"] == 1);
}

TEST_CASE("ingest, churn and the config echo") {
  TempDir t("ipact_cli_churn");
  std::string body;
  const auto first = ipact::parse_iso_date("2015-01-05").value();
  for (int d = 0; d < 28; ++d)
    for (int a = 0; a < 20; ++a)
      if ((a + d) % 3) body += fmt::format("{},10.0.0.{},3\n", ipact::to_iso(first + d), a);
  write_text(t / "a.csv", body);
  REQUIRE(run({"ingest", "--activity", t / "a.csv", "-o", t / "ing"}) == 0);
  CHECK(fs::exists(t / "ing/store.ipact"));

  REQUIRE(run({"churn", "--store", t / "ing/store.ipact", "--windows", "1,2,4,7,14,28", "-o", t / "ch"}) == 1);
  // a 28-day window leaves a single window: no boundary, a data error
  REQUIRE(run({"churn", "--store", t / "ing/store.ipact", "--windows", "1,2,4,7,14", "--long-term-window", "7", "-o",
               t / "ch"}) == 0);
  const auto summary = nlohmann::json::parse(read_file(t / "ch/churn_summary.json"));
  CHECK(summary["window_sizes"].size() == 5);
  for (const auto& w : summary["window_sizes"]) CHECK(w["flow_identity"] == true);
  const auto echo = nlohmann::json::parse(read_file(t / "ch/config.json"));
  CHECK(echo["subcommand"] == "churn");
  CHECK(echo["options"]["mask-floor"] == "8");
  CHECK(echo["options"]["windows"] == "1,2,4,7,14");
  CHECK_FALSE(echo["options"].contains("out"));
}

TEST_CASE("config file, flags win, environment output directory") {
  TempDir t("ipact_cli_config");
  write_text(t / "a.csv", "2015-01-05,10.0.0.1,5\n2015-01-06,10.0.0.2,5\n2015-01-07,10.0.0.1,5\n2015-01-08,10.0.0.2,5\n");
  write_text(t / "cfg.toml", "[churn]\nmask-floor = 16\nwindows = [1, 2]\n");
  REQUIRE(run({"churn", "--activity", t / "a.csv", "--config", t / "cfg.toml", "--long-term-window", "1", "-o", t / "c1"}) == 0);
  auto echo = nlohmann::json::parse(read_file(t / "c1/config.json"));
  CHECK(echo["options"]["mask-floor"] == "16");
  CHECK(echo["options"]["windows"] == "1,2");
  REQUIRE(run({"churn", "--activity", t / "a.csv", "--config", t / "cfg.toml", "--mask-floor", "20", "--long-term-window",
               "1", "-o", t / "c2"}) == 0);
  echo = nlohmann::json::parse(read_file(t / "c2/config.json"));
  CHECK(echo["options"]["mask-floor"] == "20");

  ::setenv("IPACT_OUT", (t / "from_env").c_str(), 1);
  const int rc = run({"ingest", "--activity", t / "a.csv"});
  ::unsetenv("IPACT_OUT");
  CHECK(rc == 0);
  CHECK(fs::exists(t / "from_env/store.ipact"));
}

TEST_CASE("simulate twice gives identical bundles; report validates") {
  TempDir t("ipact_cli_sim");
  write_text(t / "s.json", kScenario);
  REQUIRE(run({"simulate", "--spec", t / "s.json", "--seed", "7", "-o", t / "b1"}) == 0);
  REQUIRE(run({"simulate", "--spec", t / "s.json", "--seed", "7", "-o", t / "b2"}) == 0);
  for (const auto& e : fs::recursive_directory_iterator(t.path / "b1")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), t.path / "b1");
    CHECK(read_file(e.path()) == read_file(t.path / "b2" / rel));
  }
  REQUIRE(run({"simulate", "--spec", t / "s.json", "--seed", "8", "-o", t / "b3"}) == 0);
  CHECK(read_file(t / "b1/activity.csv") != read_file(t / "b3/activity.csv"));
  CHECK(nlohmann::json::parse(read_file(t / "b1/manifest.json"))["seed"] == 7);

  REQUIRE(run({"report", "--bundle", t / "b1", "-o", t / "r"}) == 0);
  const auto index = nlohmann::json::parse(read_file(t / "r/index.json"));
  CHECK(index["validation"]["failed"] == 0);
  for (const auto& a : index["artifacts"]) CHECK(fs::exists(t.path / "r" / a["path"].get<std::string>()));

  // a tampered result fails validation with exit 1
  auto metrics = read_file(t / "r/blocks/block_metrics.csv");
  const auto row = metrics.find("10.0.1.0/24,");
  REQUIRE(row != std::string::npos);
  const auto tag = metrics.find(",dynamic", row);
  metrics.replace(tag, 8, ",static");
  write_text(t / "r/blocks/block_metrics.csv", metrics);
  CHECK(run({"validate", "--truth", t / "b1/ground_truth.json", "--results", t / "r", "-o", t / "v"}) == 1);
  CHECK(read_file(t / "v/validation.csv").find(",fail") != std::string::npos);
}

TEST_CASE("compare over address lists") {
  TempDir t("ipact_cli_cmp");
  write_text(t / "a.txt", "10.0.0.1\n10.0.0.2\n");
  write_text(t / "b.txt", "10.0.0.2\n10.0.1.9\n");
  REQUIRE(run({"compare", "--a", t / "a.txt", "--b", t / "b.txt", "--granularity", "ip", "-o", t / "o"}) == 0);
  const auto csv = read_file(t / "o/visibility.csv");
  CHECK(csv.find("\nip,1,1,1,0,0\n") != std::string::npos);
  CHECK(run({"compare", "--a", t / "a.txt", "--b", t / "b.txt", "--granularity", "as", "-o", t / "o"}) == 2);
}

}  // TEST_SUITE
