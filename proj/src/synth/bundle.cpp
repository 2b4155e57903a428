// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <array>
#include <tuple>

#include <fmt/format.h>
#include <json.hpp>

#include "ipact/error.hpp"
#include "ipact/io.hpp"
#include "ipact/synth.hpp"

namespace ipact::synth {

using nlohmann::ordered_json;

namespace {

std::string block_label(std::uint32_t block) { return block_to_string(block); }

std::uint32_t parse_block_label(const std::string& s, const std::string& source) {
  auto p = parse_prefix(s);
  if (!p || p->length != 24) throw ParseError(source, 0, "bad block " + s);
  return p->network;
}

void append_address(fmt::memory_buffer& out, std::uint32_t a) {
  fmt::format_to(std::back_inserter(out), "{}.{}.{}.{}", a >> 24, (a >> 16) & 255, (a >> 8) & 255, a & 255);
}

std::vector<std::string> iso_days(CivilDay start, int days) {
  std::vector<std::string> out;
  out.reserve(std::size_t(days));
  for (int d = 0; d < days; ++d) out.push_back(to_iso(start + d));
  return out;
}

std::string compact_date(CivilDay d) {
  auto s = to_iso(d);
  s.erase(std::remove(s.begin(), s.end(), '-'), s.end());
  return s;
}

std::vector<RoutePlan> effective_routes(const ScenarioSpec& spec) {
  if (!spec.routes.empty()) return spec.routes;
  std::vector<RoutePlan> out;
  for (const auto& b : spec.blocks) {
    const bool realloc = b.event && b.event->kind == RenumberEvent::Kind::reallocation;
    out.push_back({Prefix{b.block, 24}, spec.default_asn, 0, realloc ? b.event->day : -1});
    if (realloc) out.push_back({Prefix{b.event->target, 24}, spec.default_asn, b.event->day, -1});
  }
  return out;
}

}  // namespace

std::string GroundTruth::to_json() const {
  ordered_json j;
  j["generator"] = {{"name", kGeneratorName}, {"version", kGeneratorVersion}};
  j["seed"] = seed;
  j["start"] = to_iso(start);
  j["days"] = days;
  if (drift) j["traffic_drift"] = {{"from", drift->from}, {"to", drift->to}};
  j["events"] = ordered_json::array();
  for (const auto& e : events) {
    ordered_json ev{{"kind", e.kind}, {"day", e.day}, {"block", block_label(e.block)}};
    if (e.target) ev["target"] = block_label(*e.target);
    j["events"].push_back(std::move(ev));
  }
  j["blocks"] = ordered_json::array();
  for (const auto& b : blocks) {
    ordered_json o{{"block", block_label(b.block)},
                   {"regime", b.regime},
                   {"role", b.role},
                   {"expected_stu", b.expected_stu},
                   {"stu_sigma", b.stu_sigma},
                   {"fd_min", b.fd_min},
                   {"fd_max", b.fd_max},
                   {"expected_monthly_stu", b.expected_monthly_stu},
                   {"expected_max_delta", b.expected_max_delta}};
    if (!b.expected_change_class.empty()) o["expected_change_class"] = b.expected_change_class;
    o["expected_tag"] = b.expected_tag;
    if (b.expected_host_region) o["expected_host_region"] = *b.expected_host_region;
    o["expected_daily_up"] = b.expected_daily_up;
    o["daily_up_sigma"] = b.daily_up_sigma;
    o["params"] = b.params;
    j["blocks"].push_back(std::move(o));
  }
  j["assertions"] = ordered_json::array();
  for (const auto& a : assertions) {
    ordered_json o{{"id", a.id}, {"block", block_label(a.block)}, {"metric", a.metric}};
    if (a.metric == "fd") {
      o["expected_min"] = a.expected_min;
      o["expected_max"] = a.expected_max;
    } else if (!a.expected_label.empty()) {
      o["expected"] = a.expected_label;
    } else {
      o["expected"] = a.expected;
      o["tolerance"] = a.tolerance;
    }
    j["assertions"].push_back(std::move(o));
  }
  return j.dump(2) + "\n";
}

GroundTruth GroundTruth::from_json(std::string_view text, const std::string& source) {
  GroundTruth g;
  try {
    const auto j = ordered_json::parse(text);
    g.seed = j.at("seed").get<std::uint64_t>();
    const auto start = parse_iso_date(j.at("start").get<std::string>());
    if (!start) throw ParseError(source, 0, "bad start date");
    g.start = *start;
    g.days = j.at("days").get<int>();
    if (j.contains("traffic_drift"))
      g.drift = TrafficDrift{j["traffic_drift"].at("from").get<double>(), j["traffic_drift"].at("to").get<double>()};
    for (const auto& e : j.at("events")) {
      InjectedEvent ev{e.at("kind").get<std::string>(), e.at("day").get<int>(),
                       parse_block_label(e.at("block").get<std::string>(), source), std::nullopt};
      if (e.contains("target")) ev.target = parse_block_label(e["target"].get<std::string>(), source);
      g.events.push_back(std::move(ev));
    }
    for (const auto& o : j.at("blocks")) {
      BlockTruth b;
      b.block = parse_block_label(o.at("block").get<std::string>(), source);
      b.regime = o.at("regime").get<std::string>();
      b.role = o.at("role").get<std::string>();
      b.expected_stu = o.at("expected_stu").get<double>();
      b.stu_sigma = o.at("stu_sigma").get<double>();
      b.fd_min = o.at("fd_min").get<int>();
      b.fd_max = o.at("fd_max").get<int>();
      b.expected_monthly_stu = o.at("expected_monthly_stu").get<std::vector<double>>();
      b.expected_max_delta = o.at("expected_max_delta").get<double>();
      b.expected_change_class = o.value("expected_change_class", "");
      b.expected_tag = o.at("expected_tag").get<std::string>();
      if (o.contains("expected_host_region")) b.expected_host_region = o["expected_host_region"].get<std::string>();
      b.expected_daily_up = o.at("expected_daily_up").get<double>();
      b.daily_up_sigma = o.at("daily_up_sigma").get<double>();
      b.params = o.at("params").get<std::map<std::string, double>>();
      g.blocks.push_back(std::move(b));
    }
    for (const auto& o : j.at("assertions")) {
      Assertion a;
      a.id = o.at("id").get<std::string>();
      a.block = parse_block_label(o.at("block").get<std::string>(), source);
      a.metric = o.at("metric").get<std::string>();
      if (a.metric == "fd") {
        a.expected_min = o.at("expected_min").get<double>();
        a.expected_max = o.at("expected_max").get<double>();
      } else if (o.at("expected").is_string()) {
        a.expected_label = o["expected"].get<std::string>();
      } else {
        a.expected = o["expected"].get<double>();
        a.tolerance = o.at("tolerance").get<double>();
      }
      g.assertions.push_back(std::move(a));
    }
  } catch (const ordered_json::exception& e) {
    throw ParseError(source, 0, e.what());
  }
  return g;
}

ActivityStore to_store(const Dataset& data, const ScenarioSpec& spec) {
  StoreBuilder b(spec.start, spec.days);
  for (const auto& r : data.activity) b.add(AddressId{r.address}, r.day, r.hits);
  return std::move(b).seal();
}

UASampleSet to_samples(const Dataset& data, const ScenarioSpec& spec) {
  const auto days = iso_days(spec.start, spec.days);
  std::vector<std::string> lines;
  lines.reserve(data.ua.size());
  for (const auto& u : data.ua)
    lines.push_back(days[std::size_t(u.day)] + "," + to_string(AddressId{u.address}) + "," +
                    csv_quote(data.ua_strings[u.ua]));
  IngestOptions opt;
  opt.first_day = spec.start;
  opt.days = spec.days;
  return ingest_ua_samples(lines, opt);
}

PtrRecordSet to_ptr_records(const Dataset& data) {
  PtrRecordSet set;
  for (const auto& [a, name] : data.ptr) set.add(AddressId{a}, name);
  return set;
}

std::vector<std::string> write_bundle(const Dataset& data, const ScenarioSpec& spec, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::string> written;
  auto emit = [&](const std::string& rel, std::string_view body) {
    const auto path = dir / rel;
    fs::create_directories(path.parent_path());
    write_file_atomic(path, body);
    written.push_back(rel);
  };
  const auto days = iso_days(spec.start, spec.days);

  {
    fmt::memory_buffer out;
    out.reserve(data.activity.size() * 32);
    for (const auto& r : data.activity) {
      const auto& d = days[std::size_t(r.day)];
      out.append(d.data(), d.data() + d.size());
      out.push_back(',');
      append_address(out, r.address);
      fmt::format_to(std::back_inserter(out), ",{}\n", r.hits);
    }
    emit("activity.csv", std::string_view(out.data(), out.size()));
  }
  {
    std::vector<std::string> quoted(data.ua_strings.size());
    for (std::size_t i = 0; i < quoted.size(); ++i) quoted[i] = csv_quote(data.ua_strings[i]);
    fmt::memory_buffer out;
    for (const auto& u : data.ua) {
      const auto& d = days[std::size_t(u.day)];
      out.append(d.data(), d.data() + d.size());
      out.push_back(',');
      append_address(out, u.address);
      out.push_back(',');
      out.append(quoted[u.ua].data(), quoted[u.ua].data() + quoted[u.ua].size());
      out.push_back('\n');
    }
    emit("ua.csv", std::string_view(out.data(), out.size()));
  }
  {
    auto routes = effective_routes(spec);
    std::sort(routes.begin(), routes.end(), [](const RoutePlan& a, const RoutePlan& b) {
      return std::tie(a.prefix.network, a.prefix.length, a.from, a.asn) <
             std::tie(b.prefix.network, b.prefix.length, b.from, b.asn);
    });
    for (int d = 0; d < spec.days; ++d) {
      fmt::memory_buffer out;
      for (const auto& r : routes) {
        if (d < r.from || (r.until >= 0 && d >= r.until)) continue;
        append_address(out, r.prefix.network);
        fmt::format_to(std::back_inserter(out), "/{},{}\n", r.prefix.length, r.asn);
      }
      emit("routing/" + days[std::size_t(d)] + "/routes.csv", std::string_view(out.data(), out.size()));
    }
  }
  {
    fmt::memory_buffer out;
    for (const auto& [a, name] : data.ptr) {
      append_address(out, a);
      fmt::format_to(std::back_inserter(out), ",{}\n", name);
    }
    emit("ptr.csv", std::string_view(out.data(), out.size()));
  }
  {
    const auto first = compact_date(spec.start);
    const auto last = compact_date(spec.start + (spec.days - 1));
    auto dels = spec.delegations;
    std::sort(dels.begin(), dels.end(),
              [](const DelegationPlan& a, const DelegationPlan& b) { return a.prefix.network < b.prefix.network; });
    std::string out = fmt::format("2|nro|{}|{}|{}|{}|+0000\n", last, dels.size(), first, last);
    out += fmt::format("nro|*|ipv4|*|{}|summary\n", dels.size());
    for (const auto& d : dels)
      out += fmt::format("{}|{}|ipv4|{}|{}|{}|allocated|\n", d.registry, d.country, to_string(AddressId{d.prefix.network}),
                         std::uint64_t{1} << (32 - d.prefix.length), first);
    emit("delegations.txt", out);
  }
  {
    fmt::memory_buffer out;
    for (auto a : data.probe) {
      append_address(out, a);
      out.push_back('\n');
    }
    emit("probe.txt", std::string_view(out.data(), out.size()));
  }
  emit("ground_truth.json", data.truth.to_json());

  ordered_json manifest;
  manifest["generator"] = {{"name", kGeneratorName}, {"version", kGeneratorVersion}};
  manifest["seed"] = spec.seed;
  manifest["start"] = to_iso(spec.start);
  manifest["days"] = spec.days;
  manifest["records"] = data.activity.size();
  manifest["ua_samples"] = data.ua.size();
  manifest["files"] = written;
  emit("manifest.json", manifest.dump(2) + "\n");
  return written;
}

}  // namespace ipact::synth
