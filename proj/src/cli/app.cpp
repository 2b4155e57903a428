// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "commands.hpp"
#include "ipact/cli.hpp"
#include "ipact/error.hpp"

namespace ipact::cli {
namespace {

constexpr const char* kDefaultOut = "ipact-out";

void add_store_input(CLI::App* sub, StoreInput& in) {
  sub->add_option("--store", in.store, "sealed store written by `ingest` [activity_core]");
  sub->add_option("--activity", in.activity, "activity CSV, optionally gzip-compressed [activity_core]");
  sub->add_option("--first-day", in.first_day, "first day YYYY-MM-DD (default: earliest record) [activity_core]");
  sub->add_option("--days", in.days, "day count (default: through the latest record) [activity_core]");
  sub->add_flag("--tolerant", in.tolerant, "skip and count malformed lines instead of failing [activity_core]");
}

CLI::Option* add_out(CLI::App* sub, std::string& out) {
  return sub->add_option("-o,--out", out, "output directory (env IPACT_OUT)")
      ->envname("IPACT_OUT")
      ->capture_default_str();
}

/// Resolved options of one subcommand, without the output location.
std::string config_echo(const CLI::App& sub) {
  nlohmann::ordered_json j;
  j["subcommand"] = sub.get_name();
  nlohmann::ordered_json opts = nlohmann::ordered_json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const auto name = opt->get_single_name();
    if (name == "help" || name == "out" || name == "config") continue;
    std::string value;
    if (opt->count() > 0) {
      const auto& r = opt->results();
      for (std::size_t i = 0; i < r.size(); ++i) value += (i ? "," : "") + r[i];
    } else {
      value = opt->get_default_str();
    }
    opts[name] = value;
  }
  j["options"] = opts;
  return j.dump(2) + "\n";
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"ipact: IPv4 address-activity analysis toolkit", "ipact"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a TOML/INI file; command-line flags win");
  // lets --config follow the subcommand name
  app.fallthrough();
  app.get_formatter()->column_width(44);

  std::string out = kDefaultOut;

  IngestArgs ingest;
  auto* s_ingest = app.add_subcommand("ingest", "parse an activity CSV into a sealed store");
  add_store_input(s_ingest, ingest.input);
  add_out(s_ingest, out);

  ChurnArgs churn;
  auto* s_churn = app.add_subcommand("churn", "up/down events, mask tagging, long-term and per-AS churn");
  add_store_input(s_churn, churn.input);
  s_churn->add_option("--windows", churn.windows, "window sizes in days [churn_analysis]")
      ->delimiter(',')
      ->check(CLI::Range(1, 36500))
      ->capture_default_str();
  s_churn->add_option("--mask-floor", churn.mask_floor, "shortest prefix mask for event tagging [churn_analysis]")
      ->check(CLI::Range(0, 32))
      ->capture_default_str();
  s_churn->add_option("--routing", churn.routing, "directory of daily routing snapshots named by ISO date [churn_analysis]");
  s_churn->add_option("--min-actives", churn.min_actives, "per-AS analysis keeps ASes above this many actives [churn_analysis]")
      ->capture_default_str();
  s_churn->add_option("--as-mapping", churn.as_mapping, "IP-to-AS vote per window or over the period [churn_analysis]")
      ->check(CLI::IsMember({"per-window", "period"}))
      ->capture_default_str();
  s_churn->add_option("--long-term-window", churn.long_term_window, "window size of the long-term comparison [churn_analysis]")
      ->check(CLI::Range(1, 36500))
      ->capture_default_str();
  s_churn->add_flag("--no-events", churn.no_events, "do not write events.csv");
  add_out(s_churn, out);

  BlocksArgs blocks;
  auto* s_blocks = app.add_subcommand("blocks", "filling degree, utilization, change and assignment per /24");
  add_store_input(s_blocks, blocks.input);
  s_blocks->add_option("--ptr", blocks.ptr, "PTR file `<address>,<name>` [block_metrics]");
  s_blocks->add_option("--change-threshold", blocks.change_threshold, "major change when |max delta STU| exceeds this [block_metrics]")
      ->capture_default_str();
  s_blocks->add_option("--month-days", blocks.month_days, "month length in days [block_metrics]")
      ->check(CLI::Range(1, 36500))
      ->capture_default_str();
  s_blocks->add_option("--tag-share", blocks.tag_share, "share of classified names a tag must cover [block_metrics]")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  s_blocks->add_option("--tag-min", blocks.tag_min, "classified names needed to tag a block [block_metrics]")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  s_blocks->add_option("--fd-floor", blocks.fd_floor, "utilization histogram keeps blocks with FD above this [block_metrics]")
      ->check(CLI::Range(0, 256))
      ->capture_default_str();
  add_out(s_blocks, out);

  TrafficArgs traffic;
  auto* s_traffic = app.add_subcommand("traffic", "activity vs traffic, top-decile trend, host density");
  add_store_input(s_traffic, traffic.input);
  s_traffic->add_option("--ua", traffic.ua, "User-Agent sample CSV [traffic_hosts]");
  s_traffic->add_option("--trend-window", traffic.trend_window, "window size of the top-decile trend [traffic_hosts]")
      ->check(CLI::Range(1, 36500))
      ->capture_default_str();
  s_traffic->add_option("--daily-stat", traffic.daily_stat, "per-address daily hits statistic [traffic_hosts]")
      ->check(CLI::IsMember({"median", "mean"}))
      ->capture_default_str();
  add_out(s_traffic, out);

  DemographicsArgs demo;
  auto* s_demo = app.add_subcommand("demographics", "normalized features, the 10x10x10 cube, registry breakdown");
  add_store_input(s_demo, demo.input);
  s_demo->add_option("--ua", demo.ua, "User-Agent sample CSV; hosts are 0 without it [demographics]");
  s_demo->add_option("--delegations", demo.delegations, "registry delegated-extended file [demographics]");
  add_out(s_demo, out);

  CompareArgs cmp;
  auto* s_cmp = app.add_subcommand("compare", "three-way visibility of two address sources");
  s_cmp->add_option("--a", cmp.a, "source A: sealed store or address list [demographics]");
  s_cmp->add_option("--b", cmp.b, "source B: sealed store or address list [demographics]");
  s_cmp->add_option("--granularity", cmp.granularity, "ip, slash24, as or all [demographics]")
      ->check(CLI::IsMember({"ip", "slash24", "as", "all"}))
      ->capture_default_str();
  s_cmp->add_option("--routing", cmp.routing, "routing snapshot directory, needed for as [churn_analysis]");
  s_cmp->add_option("--first-day", cmp.first_day, "day 0 of the routing snapshots when no input is a store");
  s_cmp->add_option("--delegations", cmp.delegations, "registry delegated-extended file [demographics]");
  add_out(s_cmp, out);

  SimulateArgs sim;
  std::uint64_t seed = 0;
  auto* s_sim = app.add_subcommand("simulate", "generate a synthetic bundle with ground truth");
  s_sim->add_option("--spec", sim.spec, "scenario file (JSON, comments allowed) [synth]");
  auto* seed_opt = s_sim->add_option("--seed", seed, "override the scenario seed [synth]");
  add_out(s_sim, out);

  ValidateArgs val;
  auto* s_val = app.add_subcommand("validate", "check analysis outputs against a bundle's ground truth");
  s_val->add_option("--truth", val.truth, "ground_truth.json of a bundle [synth]");
  s_val->add_option("--results", val.results, "directory holding block_metrics.csv, host_density.csv, block_churn.csv");
  add_out(s_val, out);

  ReportArgs rep;
  auto* s_rep = app.add_subcommand("report", "run every analysis over a bundle and index the artifacts");
  s_rep->add_option("--bundle", rep.bundle, "bundle directory written by `simulate`");
  add_out(s_rep, out);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsageError;
  }
  if (seed_opt->count() > 0) sim.seed = seed;

  try {
    CLI::App* used = app.get_subcommands().front();
    OutputDir dir(out);
    int code = kExitOk;
    const auto& name = used->get_name();
    if (name == "ingest") cmd_ingest(ingest, dir);
    else if (name == "churn") cmd_churn(churn, dir);
    else if (name == "blocks") cmd_blocks(blocks, dir);
    else if (name == "traffic") cmd_traffic(traffic, dir);
    else if (name == "demographics") cmd_demographics(demo, dir);
    else if (name == "compare") cmd_compare(cmp, dir);
    else if (name == "simulate") cmd_simulate(sim, dir);
    else if (name == "validate") code = cmd_validate(val, dir) ? kExitDataError : kExitOk;
    else if (name == "report") code = cmd_report(rep, dir) ? kExitDataError : kExitOk;
    dir.write("config.json", config_echo(*used));
    if (code != kExitOk) fmt::print(stderr, "ipact {}: ground-truth assertions failed (see validation.csv)\n", name);
    return code;
  } catch (const UsageError& e) {
    fmt::print(stderr, "ipact: {}\nRun with --help for more information.\n", e.what());
    return kExitUsageError;
  } catch (const std::exception& e) {
    fmt::print(stderr, "ipact: error: {}\n", e.what());
    return kExitDataError;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace ipact::cli
