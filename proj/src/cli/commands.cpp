// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "ipact/demographics.hpp"
#include "ipact/error.hpp"
#include "ipact/io.hpp"
#include "ipact/routing.hpp"
#include "ipact/synth.hpp"
#include "ipact/traffic_hosts.hpp"
#include "ipact/ua_samples.hpp"

namespace ipact::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

using Buffer = fmt::memory_buffer;

template <typename... Args>
void row(Buffer& b, fmt::format_string<Args...> f, Args&&... args) {
  fmt::format_to(std::back_inserter(b), f, std::forward<Args>(args)...);
  b.push_back('\n');
}

std::string_view view(const Buffer& b) { return {b.data(), b.size()}; }

std::string num(double v) { return fmt::format("{}", v); }

ordered_json summary_json(const Summary& s) { return {{"min", s.min}, {"median", s.median}, {"max", s.max}}; }

CivilDay parse_day_option(const std::string& text, const char* flag) {
  auto d = parse_iso_date(text);
  if (!d) throw UsageError(fmt::format("{}: expected YYYY-MM-DD, got `{}`", flag, text));
  return *d;
}

std::vector<RoutingSnapshot> load_routing(const std::string& dir, CivilDay first_day) {
  if (dir.empty()) return {};
  auto snaps = load_routing_snapshots(dir, first_day);
  if (snaps.empty()) throw Error("no routing snapshots in " + dir);
  return snaps;
}

UASampleSet load_ua(const std::string& path, const ActivityStore& store, bool tolerant) {
  auto lines = LineReader::open(path);
  ipact::IngestOptions opt;
  opt.first_day = store.first_day();
  opt.days = store.days();
  opt.mode = tolerant ? ParseMode::tolerant : ParseMode::strict;
  return ingest_ua_samples(lines, opt);
}

bool is_store_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  char magic[8] = {};
  in.read(magic, sizeof magic);
  return in.gcount() == 8 && std::memcmp(magic, "IPACTSTO", 8) == 0;
}

const char* bgp_label(const std::optional<BgpClass>& c) { return c ? to_string(*c) : "-"; }

constexpr BgpClass kBgpClasses[] = {BgpClass::no_change, BgpClass::origin_change, BgpClass::announce,
                                    BgpClass::withdraw, BgpClass::unmapped};

}  // namespace

// ---------------------------------------------------------------------------

OutputDir::OutputDir(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

void OutputDir::write(const std::string& rel, std::string_view content) {
  const auto path = root_ / rel;
  fs::create_directories(path.parent_path());
  write_file_atomic(path, content);
  if (std::find(files_.begin(), files_.end(), rel) == files_.end()) files_.push_back(rel);
}

void OutputDir::adopt(const std::string& rel) {
  if (std::find(files_.begin(), files_.end(), rel) == files_.end()) files_.push_back(rel);
}

void OutputDir::write_csv(const std::string& rel, const std::vector<std::string>& comments, const std::string& columns,
                          std::string_view rows) {
  std::string out;
  out.reserve(rows.size() + 256);
  for (const auto& c : comments) out += "# " + c + "\n";
  out += columns + "\n";
  out.append(rows);
  write(rel, out);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) throw Error("sha256 failed");
  std::string hex;
  for (unsigned i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

ActivityStore load_store(const StoreInput& in) {
  if (in.store.empty() == in.activity.empty()) throw UsageError("give exactly one of --store or --activity");
  if (!in.store.empty()) {
    if (!fs::exists(in.store)) throw Error("store file not found: " + in.store);
    return ActivityStore::load(in.store);
  }
  ipact::IngestOptions opt;
  if (!in.first_day.empty()) opt.first_day = parse_day_option(in.first_day, "--first-day");
  if (in.days > 0) opt.days = in.days;
  opt.mode = in.tolerant ? ParseMode::tolerant : ParseMode::strict;
  auto lines = LineReader::open(in.activity);
  return ingest_activity(lines, opt);
}

// ---------------------------------------------------------------------------

void cmd_ingest(const IngestArgs& o, OutputDir& out) {
  if (o.input.activity.empty()) throw UsageError("ingest needs --activity");
  const auto store = load_store(o.input);
  out.write("store.ipact", store.serialize());
  std::uint64_t addresses = 0, cells = 0;
  for (const auto& m : store.blocks()) {
    addresses += m.active_addresses(store.day_range()).count();
    cells += m.active_cells();
  }
  const auto& q = store.quality();
  ordered_json j{{"first_day", to_iso(store.first_day())},
                 {"days", store.days()},
                 {"blocks", store.blocks().size()},
                 {"active_addresses", addresses},
                 {"active_cells", cells},
                 {"total_hits", store.total_hits()},
                 {"records", q.records},
                 {"skipped_lines", q.skipped_lines},
                 {"saturated_cells", q.saturated_cells}};
  out.write("ingest_summary.json", j.dump(2) + "\n");
}

void cmd_churn(const ChurnArgs& o, OutputDir& out) {
  if (o.as_mapping != "per-window" && o.as_mapping != "period")
    throw UsageError("--as-mapping must be per-window or period");
  const auto store = load_store(o.input);
  const auto snaps = load_routing(o.routing, store.first_day());
  auto sizes = o.windows;
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());

  Buffer events, boundaries, hist, blocks, corr;
  ordered_json summary{{"first_day", to_iso(store.first_day())},
                       {"days", store.days()},
                       {"mask_floor", o.mask_floor},
                       {"routing", !snaps.empty()},
                       {"window_sizes", ordered_json::array()}};
  for (int w : sizes) {
    const WindowedActivity wa(store, make_windows(store.days(), w));
    auto res = detect_events(wa);
    tag_events(res.events, wa, o.mask_floor);
    if (!snaps.empty()) annotate_bgp(res.events, wa, snaps);

    bool flow = true;
    for (const auto& b : res.stats.boundaries) {
      flow &= std::int64_t(b.size_after) - std::int64_t(b.size_before) ==
              std::int64_t(b.up_count) - std::int64_t(b.down_count);
      row(boundaries, "{},{},{},{},{},{},{},{},{}", w, b.boundary, wa.spec().windows[std::size_t(b.boundary)].first,
          b.size_before, b.size_after, b.up_count, b.down_count, num(b.up_pct), num(b.down_pct));
    }
    std::uint64_t ups = 0;
    if (!o.no_events)
      for (const auto& e : res.events)
        row(events, "{},{},{},{},{},{}", w, to_string(e.address), to_string(e.kind), e.boundary, e.tagged_mask,
            bgp_label(e.bgp));
    for (const auto& e : res.events) ups += e.kind == EventKind::up;

    for (auto kind : {EventKind::up, EventKind::down}) {
      std::vector<UpDownEvent> subset;
      for (const auto& e : res.events)
        if (e.kind == kind) subset.push_back(e);
      const auto h = mask_histogram(subset, o.mask_floor);
      for (const auto& [bucket, fraction] : h.buckets)
        row(hist, "{},{},{},{}", w, to_string(kind), bucket, num(fraction));
    }
    for (const auto& c : block_churn(wa)) row(blocks, "{},{},{},{}", w, block_to_string(c.block), c.up, c.down);
    if (!snaps.empty()) {
      const auto c = bgp_correlation(wa, snaps);
      row(corr, "{},{},{},{},{},{},{}", w, c.up_total, c.up_changed, c.down_total, c.down_changed, c.steady_total,
          c.steady_changed);
    }
    summary["window_sizes"].push_back({{"window_size", w},
                                       {"windows", wa.spec().count()},
                                       {"boundaries", wa.spec().boundaries()},
                                       {"up_events", ups},
                                       {"down_events", res.events.size() - ups},
                                       {"up_pct", summary_json(res.stats.up)},
                                       {"down_pct", summary_json(res.stats.down)},
                                       {"flow_identity", flow}});
  }

  if (!o.no_events)
    out.write_csv("events.csv",
                  {"up/down events per window size; boundary i lies between windows i and i+1",
                   "mask: smallest tagged prefix length; bgp_class '-' when no routing was given"},
                  "window_size,address,kind,boundary,mask,bgp_class", view(events));
  out.write_csv("churn_boundaries.csv",
                {"per-boundary churn; up_pct = 100*up/|W_i+1|, down_pct = 100*down/|W_i|, 0 for an empty window"},
                "window_size,boundary,window_start_day,size_before,size_after,up,down,up_pct,down_pct",
                view(boundaries));
  out.write_csv("mask_histogram.csv", {"size distribution of up and down events by tagged prefix mask"},
                "window_size,kind,bucket,fraction", view(hist));
  out.write_csv("block_churn.csv", {"up and down events per /24 summed over all boundaries"},
                "window_size,block,up,down", view(blocks));
  out.write("churn_summary.json", summary.dump(2) + "\n");

  {
    const WindowedActivity wa(store, make_windows(store.days(), o.long_term_window));
    Buffer lt;
    std::string columns = "window,window_start_day,appear,disappear,appear_entire_block,disappear_entire_block";
    if (!snaps.empty())
      for (const char* side : {"appear", "disappear"})
        for (auto c : kBgpClasses) columns += fmt::format(",{}_{}", side, to_string(c));
    for (const auto& r : long_term_diff(wa, snaps)) {
      fmt::format_to(std::back_inserter(lt), "{},{},{},{},{},{}", r.window, wa.spec().windows[std::size_t(r.window)].first,
                     r.appear, r.disappear, r.appear_entire_block, r.disappear_entire_block);
      if (!snaps.empty())
        for (const auto* m : {&r.appear_bgp, &r.disappear_bgp})
          for (auto c : kBgpClasses) {
            auto it = m->find(c);
            fmt::format_to(std::back_inserter(lt), ",{}", it == m->end() ? 0 : it->second);
          }
      lt.push_back('\n');
    }
    out.write_csv("long_term.csv",
                  {fmt::format("addresses appearing / disappearing against window 0; window size {} days",
                               o.long_term_window),
                   "entire_block: the address's /24 was dark in the other window"},
                  columns, view(lt));
  }

  if (!snaps.empty()) {
    out.write_csv("bgp_correlation.csv", {"events and steady addresses that coincide with a BGP change"},
                  "window_size,up_total,up_changed,down_total,down_changed,steady_total,steady_changed",
                  view(corr));
    const int w = sizes.front();
    const WindowedActivity wa(store, make_windows(store.days(), w));
    const auto pa = per_as_churn(wa, snaps, o.min_actives,
                                 o.as_mapping == "period" ? OriginMapping::period : OriginMapping::per_window);
    Buffer as, cdf;
    for (const auto& a : pa.ases)
      row(as, "{},{},{},{},{}", a.asn, a.active_addresses, num(a.median_up_pct), num(a.median_down_pct),
          a.boundaries_used);
    for (const auto& [v, f] : pa.up_cdf) row(cdf, "up,{},{}", num(v), num(f));
    for (const auto& [v, f] : pa.down_cdf) row(cdf, "down,{},{}", num(v), num(f));
    const auto comment = fmt::format("per-AS median churn at window size {}; ASes with more than {} active "
                                     "addresses ({} excluded); mapping {}",
                                     w, o.min_actives, pa.excluded, o.as_mapping);
    out.write_csv("per_as_churn.csv", {comment}, "asn,active_addresses,median_up_pct,median_down_pct,boundaries",
                  view(as));
    out.write_csv("per_as_cdf.csv", {comment}, "kind,median_pct,cumulative_fraction", view(cdf));
  }
}

void cmd_blocks(const BlocksArgs& o, OutputDir& out) {
  const auto store = load_store(o.input);
  std::optional<PtrRecordSet> ptrs;
  if (!o.ptr.empty()) {
    auto lines = LineReader::open(o.ptr);
    ptrs = load_ptr_records(lines);
  }
  BlockMetricsConfig cfg;
  cfg.change.threshold = o.change_threshold;
  cfg.change.month_days = o.month_days;
  cfg.assignment.consistency = o.tag_share;
  cfg.assignment.min_classified = o.tag_min;
  if (!(cfg.change.threshold > 0 && cfg.change.threshold < 1)) throw UsageError("--change-threshold must be in (0, 1)");
  const auto metrics = compute_block_metrics(store, ptrs ? &*ptrs : nullptr, cfg);

  Buffer b;
  for (const auto& m : metrics) {
    std::string monthly;
    for (std::size_t i = 0; i < m.monthly_stu.size(); ++i) monthly += (i ? ";" : "") + num(m.monthly_stu[i]);
    row(b, "{},{},{},{},{},{},{},{}", block_to_string(m.block), m.fd, m.active_cells, num(m.stu),
        monthly.empty() ? "-" : monthly, m.max_delta_stu ? num(*m.max_delta_stu) : "-",
        m.max_delta_stu ? to_string(m.change_class) : "-", ptrs ? to_string(m.assignment) : "-");
  }
  out.write_csv("block_metrics.csv",
                {fmt::format("per-/24 filling degree and spatio-temporal utilization over {} days", store.days()),
                 fmt::format("months of {} days; a month without activity counts as STU 0; change threshold {}",
                             o.month_days, o.change_threshold),
                 ptrs ? "tag from PTR names" : "tag '-': no PTR file given"},
                "block,fd,active_cells,stu,monthly_stu,max_delta,change_class,tag", view(b));

  Buffer cdf;
  for (auto [subset, name] : {std::pair{TagSubset::all, "all"}, std::pair{TagSubset::static_only, "static"},
                              std::pair{TagSubset::dynamic_only, "dynamic"}}) {
    const auto d = fd_distribution(metrics, subset);
    for (const auto& [fd, f] : d.cdf) row(cdf, "{},{},{}", name, fd, num(f));
  }
  out.write_csv("fd_distribution.csv", {"CDF of filling degree over /24 blocks, by assignment tag"},
                "subset,fd,cumulative_fraction", view(cdf));

  const auto h = utilization_histogram(metrics, o.fd_floor);
  Buffer hb;
  for (std::size_t k = 0; k < h.counts.size(); ++k)
    row(hb, "{},{},{}", num(double(k) / 20.0), num(double(k + 1) / 20.0), h.counts[k]);
  out.write_csv("stu_histogram.csv",
                {fmt::format("STU of /24 blocks with filling degree above {}; bins are (low, high]", o.fd_floor)},
                "stu_low,stu_high,blocks", view(hb));

  const auto all = fd_distribution(metrics, TagSubset::all);
  const auto p = potential_utilization_report(metrics);
  auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
  ordered_json j{{"blocks", p.blocks},
                 {"share_fd_below_64", p.share_fd_below_64},
                 {"share_fd_above_250", all.share_above_250},
                 {"static_blocks", p.static_blocks},
                 {"static_fd_below_64", opt(p.static_fd_below_64)},
                 {"dynamic_blocks", p.dynamic_blocks},
                 {"dynamic_stu_above_80", opt(p.dynamic_stu_above_80)},
                 {"dynamic_stu_below_60", opt(p.dynamic_stu_below_60)},
                 {"dynamic_stu_below_20", opt(p.dynamic_stu_below_20)},
                 {"dark_months_included", true}};
  out.write("potential_utilization.json", j.dump(2) + "\n");
}

void cmd_traffic(const TrafficArgs& o, OutputDir& out) {
  if (o.daily_stat != "median" && o.daily_stat != "mean") throw UsageError("--daily-stat must be median or mean");
  const auto store = load_store(o.input);
  const auto bins = bin_by_days_active(store, o.daily_stat == "mean" ? DailyHitsStat::mean : DailyHitsStat::median);
  Buffer b;
  for (const auto& x : bins.bins)
    row(b, "{},{},{},{},{},{},{},{}", x.days, x.addresses, x.total_hits, num(x.p5), num(x.p25), num(x.p50),
        num(x.p75), num(x.p95));
  out.write_csv("days_active_bins.csv",
                {fmt::format("addresses binned by number of active days; percentiles (nearest rank) of the "
                             "per-address {} daily hits over active days",
                             o.daily_stat)},
                "days,addresses,total_hits,p5,p25,p50,p75,p95", view(b));

  Buffer c;
  for (const auto& s : cumulative_shares(bins)) row(c, "{},{},{}", s.days, num(s.address_fraction), num(s.traffic_fraction));
  out.write_csv("cumulative_shares.csv", {"cumulative share of addresses and of hits by active-day bin"},
                "days,address_fraction,traffic_fraction", view(c));

  const auto spec = make_windows(store.days(), o.trend_window);
  const auto shares = top_decile_share(store, spec.windows);
  const auto fit = linear_trend(shares);
  Buffer t;
  for (std::size_t i = 0; i < shares.size(); ++i)
    row(t, "{},{},{},{},{}", i, spec.windows[i].first, spec.windows[i].last, num(shares[i]),
        num(fit.intercept + fit.slope * double(i)));
  out.write_csv("top_decile_trend.csv",
                {fmt::format("hit share of the top 10% of addresses per {}-day window, with the least-squares line",
                             o.trend_window)},
                "window,first_day,last_day,share,fitted", view(t));
  const double n1 = double(shares.size() - 1);
  ordered_json j{{"windows", shares.size()},
                 {"window_days", o.trend_window},
                 {"slope", fit.slope},
                 {"intercept", fit.intercept},
                 {"fitted_change", fit.slope * n1},
                 {"observed_change", shares.back() - shares.front()},
                 {"total_hits", bins.total_hits()},
                 {"total_addresses", bins.total_addresses()}};
  out.write("traffic_summary.json", j.dump(2) + "\n");

  if (!o.ua.empty()) {
    const auto samples = load_ua(o.ua, store, o.input.tolerant);
    Buffer h;
    const HostRegionRule rule;
    for (const auto& r : host_density(store, samples, store.day_range()))
      row(h, "{},{},{},{},{}", block_to_string(r.block), r.sample_count, r.distinct_ua,
          num(r.sample_count ? double(r.distinct_ua) / double(r.sample_count) : 0.0),
          to_string(classify_host_region(r, rule)));
    out.write_csv("host_density.csv",
                  {"sampled User-Agent strings per /24: total samples and distinct strings",
                   fmt::format("region: bulk below {} samples, automated when distinct/samples <= {}, else gateway",
                               rule.heavy_samples, rule.automated_max_ratio)},
                  "block,samples,distinct_ua,ratio,region", view(h));
  }
}

void cmd_demographics(const DemographicsArgs& o, OutputDir& out) {
  const auto store = load_store(o.input);
  const auto metrics = compute_block_metrics(store);
  const auto traffic = block_traffic(store);
  std::vector<HostDensityRecord> hosts;
  if (!o.ua.empty()) hosts = host_density(store, load_ua(o.ua, store, o.input.tolerant), store.day_range());
  const auto features = normalize_features(metrics, traffic, hosts);
  const auto cube = build_cube(features);

  Buffer f;
  for (const auto& x : features)
    row(f, "{},{},{},{},{},{},{}", block_to_string(x.block), num(x.stu), num(x.traffic_norm), num(x.hosts_norm),
        feature_bin(x.stu), feature_bin(x.traffic_norm), feature_bin(x.hosts_norm));
  out.write_csv("features.csv",
                {"normalized per-/24 features: log(1+x)/log(1+max) for traffic and hosts; bins k = ((k-1)/10, k/10]",
                 o.ua.empty() ? "hosts_norm is 0: no User-Agent samples given" : "hosts from distinct User-Agent strings"},
                "block,stu,traffic_norm,hosts_norm,stu_bin,traffic_bin,hosts_bin", view(f));
  ordered_json j{{"bins", DemographicsCube::kBins},
                 {"axes", {"stu", "traffic", "hosts"}},
                 {"index", "(stu_bin-1)*100 + (traffic_bin-1)*10 + (hosts_bin-1)"},
                 {"blocks", features.size()},
                 {"total", cube.total()},
                 {"cells", cube.cells()}};
  out.write("cube.json", j.dump() + "\n");

  if (!o.delegations.empty()) {
    auto lines = LineReader::open(o.delegations);
    const auto table = load_delegations(lines);
    Buffer r, c;
    for (const auto& [registry, g] : group_by_registry(features, table)) {
      for (int s = 1; s <= 10; ++s)
        for (int t = 1; t <= 10; ++t) {
          const auto n = g.counts[std::size_t((s - 1) * 10 + (t - 1))];
          if (n) row(r, "{},{},{},{},{}", registry, s, t, n, num(g.mean_hosts(s, t)));
        }
      for (const auto& [cc, n] : g.countries) row(c, "{},{},{}", registry, cc, n);
    }
    out.write_csv("per_rir.csv",
                  {"per-registry projection onto the (STU, traffic) plane with mean normalized host count",
                   "blocks outside every delegation are listed as unassigned"},
                  "registry,stu_bin,traffic_bin,blocks,mean_hosts_norm", view(r));
    out.write_csv("per_country.csv", {"/24 blocks per registry and country of registration"},
                  "registry,country,blocks", view(c));
  }
}

void cmd_compare(const CompareArgs& o, OutputDir& out) {
  if (o.a.empty() || o.b.empty()) throw UsageError("compare needs --a and --b");
  static const std::vector<std::string> kGran{"ip", "slash24", "as", "all"};
  if (std::find(kGran.begin(), kGran.end(), o.granularity) == kGran.end())
    throw UsageError("--granularity must be ip, slash24, as or all");
  if (o.granularity == "as" && o.routing.empty()) throw UsageError("--granularity as needs --routing");

  std::optional<CivilDay> first_day;
  std::optional<DayRange> window;
  auto load_set = [&](const std::string& path) {
    if (!fs::exists(path)) throw Error("input not found: " + path);
    if (is_store_file(path)) {
      const auto store = ActivityStore::load(path);
      first_day = store.first_day();
      window = store.day_range();
      return active_set(store, store.day_range());
    }
    auto lines = LineReader::open(path);
    return load_address_set(lines);
  };
  const auto a = load_set(o.a);
  const auto b = load_set(o.b);
  if (!o.first_day.empty()) first_day = parse_day_option(o.first_day, "--first-day");

  std::vector<RoutingSnapshot> snaps;
  if (!o.routing.empty()) {
    if (!first_day) throw UsageError("--routing needs --first-day unless an input is a store");
    snaps = load_routing(o.routing, *first_day);
    if (!window) window = DayRange{snaps.front().day(), snaps.back().day()};
  }

  Buffer v;
  for (auto g : {Granularity::ip, Granularity::slash24, Granularity::as}) {
    if (o.granularity != "all" && o.granularity != to_string(g)) continue;
    if (g == Granularity::as && snaps.empty()) continue;
    const auto r = compare_sources(a, b, g, snaps, window.value_or(DayRange{}));
    row(v, "{},{},{},{},{},{}", to_string(g), r.only_a, r.both, r.only_b, r.unrouted_a, r.unrouted_b);
  }
  out.write_csv("visibility.csv",
                {"three-way partition of two address sources; a /24 or AS counts as seen when any of its addresses is",
                 "unrouted_*: addresses without an origin AS, excluded from the as row"},
                "granularity,only_a,both,only_b,unrouted_a,unrouted_b", view(v));

  if (!o.delegations.empty()) {
    auto lines = LineReader::open(o.delegations);
    const auto table = load_delegations(lines);
    Buffer r;
    for (const auto& [registry, x] : visibility_by_registry(a, b, table))
      row(r, "{},{},{},{}", registry, x.only_a, x.both, x.only_b);
    out.write_csv("visibility_by_rir.csv", {"address-level three-way partition per registry"},
                  "registry,only_a,both,only_b", view(r));
  }
}

void cmd_simulate(const SimulateArgs& o, OutputDir& out) {
  if (o.spec.empty()) throw UsageError("simulate needs --spec");
  if (!fs::exists(o.spec)) throw Error("scenario file not found: " + o.spec);
  auto spec = synth::load_scenario(o.spec);
  if (o.seed) spec.seed = *o.seed;
  const auto data = synth::generate(spec);
  for (const auto& rel : synth::write_bundle(data, spec, out.root())) out.adopt(rel);
}

// ---------------------------------------------------------------------------

namespace {

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::size_t col(const std::string& name, const std::string& source) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw Error(source + ": missing column " + name);
    return std::size_t(it - columns.begin());
  }
};

CsvTable read_csv(const fs::path& path) {
  CsvTable t;
  auto lines = LineReader::open(path);
  std::string_view line;
  std::vector<std::string> fields;
  bool header = true;
  while (lines.next(line)) {
    if (line.empty() || line.front() == '#') continue;
    if (!split_csv_record(line, fields)) throw ParseError(path.string(), lines.line_number(), "bad CSV record");
    if (header) {
      t.columns = fields;
      header = false;
    } else {
      if (fields.size() != t.columns.size())
        throw ParseError(path.string(), lines.line_number(), "wrong number of fields");
      t.rows.push_back(fields);
    }
  }
  return t;
}

std::optional<fs::path> find_output(const fs::path& dir, const std::string& name) {
  if (fs::exists(dir / name)) return dir / name;
  std::vector<fs::path> subdirs;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory()) subdirs.push_back(e.path());
  std::sort(subdirs.begin(), subdirs.end());
  for (const auto& s : subdirs)
    if (fs::exists(s / name)) return s / name;
  return std::nullopt;
}

std::uint32_t block_of(const std::string& s, const std::string& source) {
  auto p = parse_prefix(s);
  if (!p || p->length != 24) throw Error(source + ": bad block " + s);
  return p->network;
}

double to_double(const std::string& s, const std::string& source) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(source + ": bad number " + s);
  }
}

}  // namespace

std::size_t cmd_validate(const ValidateArgs& o, OutputDir& out) {
  if (o.truth.empty() || o.results.empty()) throw UsageError("validate needs --truth and --results");
  if (!fs::exists(o.truth)) throw Error("ground truth not found: " + o.truth);
  if (!fs::is_directory(o.results)) throw Error("results directory not found: " + o.results);
  const auto truth = synth::GroundTruth::from_json(read_file(o.truth), o.truth);

  synth::AnalysisResults results;
  if (auto p = find_output(o.results, "block_metrics.csv")) {
    const auto t = read_csv(*p);
    const auto src = p->string();
    const auto cb = t.col("block", src), cf = t.col("fd", src), cs = t.col("stu", src), cc = t.col("change_class", src),
               ct = t.col("tag", src);
    results.has_block_metrics = true;
    results.has_assignment_tags = !t.rows.empty();
    for (const auto& r : t.rows) {
      auto& obs = results.blocks[block_of(r[cb], src)];
      obs.fd = static_cast<int>(to_double(r[cf], src));
      obs.stu = to_double(r[cs], src);
      if (r[cc] != "-") obs.change_class = r[cc];
      if (r[ct] != "-")
        obs.assignment_tag = r[ct];
      else
        results.has_assignment_tags = false;
    }
  }
  if (auto p = find_output(o.results, "host_density.csv")) {
    const auto t = read_csv(*p);
    const auto src = p->string();
    const auto cb = t.col("block", src), cr = t.col("region", src);
    results.has_host_density = true;
    for (const auto& r : t.rows) results.blocks[block_of(r[cb], src)].host_region = r[cr];
  }
  if (auto p = find_output(o.results, "block_churn.csv")) {
    const auto t = read_csv(*p);
    const auto src = p->string();
    const auto cw = t.col("window_size", src), cb = t.col("block", src), cu = t.col("up", src);
    for (const auto& r : t.rows) {
      if (r[cw] != "1") continue;
      results.has_daily_churn = true;
      results.blocks[block_of(r[cb], src)].daily_up = static_cast<std::uint64_t>(to_double(r[cu], src));
    }
  }

  const auto report = synth::validate(truth, results);
  Buffer b;
  for (const auto& r : report.results) {
    const auto& a = r.assertion;
    std::string expected, tolerance = "-";
    if (a.metric == "fd") {
      expected = fmt::format("[{},{}]", a.expected_min, a.expected_max);
    } else if (!a.expected_label.empty()) {
      expected = a.expected_label;
    } else {
      expected = num(a.expected);
      tolerance = num(a.tolerance);
    }
    row(b, "{},{},{},{},{},{},{}", a.id, block_to_string(a.block), a.metric, expected, tolerance, r.measured,
        r.pass ? "pass" : "fail");
  }
  out.write_csv("validation.csv", {"ground-truth assertions against analysis outputs"},
                "id,block,metric,expected,tolerance,measured,result", view(b));
  ordered_json j{{"assertions", report.results.size()},
                 {"passed", report.results.size() - report.failures()},
                 {"failed", report.failures()}};
  out.write("validation_summary.json", j.dump(2) + "\n");
  return report.failures();
}

std::size_t cmd_report(const ReportArgs& o, OutputDir& out) {
  if (o.bundle.empty()) throw UsageError("report needs --bundle");
  const fs::path bundle = o.bundle;
  if (!fs::exists(bundle / "manifest.json")) throw Error("not a bundle (no manifest.json): " + o.bundle);
  const auto manifest = ordered_json::parse(read_file(bundle / "manifest.json"));

  const auto sub = [&](const std::string& name) { return OutputDir(out.root() / name); };
  struct Step {
    std::string name;
    OutputDir dir;
  };
  std::vector<Step> steps;

  StoreInput raw;
  raw.activity = (bundle / "activity.csv").string();
  raw.first_day = manifest.at("start").get<std::string>();
  raw.days = manifest.at("days").get<int>();
  auto ingest_dir = sub("ingest");
  cmd_ingest({raw}, ingest_dir);
  steps.push_back({"ingest", std::move(ingest_dir)});

  StoreInput in;
  in.store = (out.root() / "ingest" / "store.ipact").string();

  ChurnArgs churn;
  churn.input = in;
  churn.routing = (bundle / "routing").string();
  auto churn_dir = sub("churn");
  cmd_churn(churn, churn_dir);
  steps.push_back({"churn", std::move(churn_dir)});

  BlocksArgs blocks;
  blocks.input = in;
  blocks.ptr = (bundle / "ptr.csv").string();
  auto blocks_dir = sub("blocks");
  cmd_blocks(blocks, blocks_dir);
  steps.push_back({"blocks", std::move(blocks_dir)});

  TrafficArgs traffic;
  traffic.input = in;
  traffic.ua = (bundle / "ua.csv").string();
  auto traffic_dir = sub("traffic");
  cmd_traffic(traffic, traffic_dir);
  steps.push_back({"traffic", std::move(traffic_dir)});

  DemographicsArgs demo;
  demo.input = in;
  demo.ua = traffic.ua;
  demo.delegations = (bundle / "delegations.txt").string();
  auto demo_dir = sub("demographics");
  cmd_demographics(demo, demo_dir);
  steps.push_back({"demographics", std::move(demo_dir)});

  CompareArgs cmp;
  cmp.a = in.store;
  cmp.b = (bundle / "probe.txt").string();
  cmp.routing = churn.routing;
  cmp.delegations = demo.delegations;
  auto cmp_dir = sub("compare");
  cmd_compare(cmp, cmp_dir);
  steps.push_back({"compare", std::move(cmp_dir)});

  auto val_dir = sub("validate");
  const auto failures = cmd_validate({(bundle / "ground_truth.json").string(), out.root().string()}, val_dir);
  steps.push_back({"validate", std::move(val_dir)});

  ordered_json index;
  index["tool"] = "ipact";
  index["bundle"] = {{"seed", manifest.at("seed")}, {"start", manifest.at("start")}, {"days", manifest.at("days")}};
  index["artifacts"] = ordered_json::array();
  for (const auto& s : steps)
    for (const auto& rel : s.dir.files()) {
      const auto path = fs::path(s.name) / rel;
      const auto bytes = read_file(out.root() / path);
      const auto ext = path.extension().string();
      index["artifacts"].push_back({{"path", path.generic_string()},
                                    {"step", s.name},
                                    {"format", ext == ".csv" ? "csv" : ext == ".json" ? "json" : "binary"},
                                    {"bytes", bytes.size()},
                                    {"sha256", sha256_hex(bytes)}});
    }
  index["validation"] = {{"failed", failures}, {"passed", failures == 0}};
  out.write("index.json", index.dump(2) + "\n");
  return failures;
}

}  // namespace ipact::cli
