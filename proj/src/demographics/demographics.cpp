// SPDX-License-Identifier: Apache-2.0
#include "ipact/demographics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "ipact/error.hpp"

namespace ipact {

std::vector<std::pair<std::uint32_t, std::uint64_t>> block_traffic(const ActivityStore& store) {
  std::vector<std::pair<std::uint32_t, std::uint64_t>> out;
  out.reserve(store.blocks().size());
  for (const auto& m : store.blocks()) out.emplace_back(m.block(), m.total_hits());
  return out;
}

std::vector<BlockFeatures> normalize_features(const std::vector<BlockMetrics>& metrics,
                                              std::span<const std::pair<std::uint32_t, std::uint64_t>> traffic,
                                              std::span<const HostDensityRecord> hosts) {
  auto traffic_of = [&](std::uint32_t block) -> std::uint64_t {
    auto it = std::lower_bound(traffic.begin(), traffic.end(), block,
                               [](const auto& e, std::uint32_t b) { return e.first < b; });
    if (it == traffic.end() || it->first != block) throw Error("no traffic total for " + block_to_string(block));
    return it->second;
  };
  auto hosts_of = [&](std::uint32_t block) -> std::uint64_t {
    auto it = std::lower_bound(hosts.begin(), hosts.end(), block,
                               [](const HostDensityRecord& r, std::uint32_t b) { return r.block < b; });
    return it == hosts.end() || it->block != block ? 0 : it->distinct_ua;
  };

  std::vector<std::uint64_t> t, h;
  t.reserve(metrics.size());
  h.reserve(metrics.size());
  std::uint64_t max_t = 0, max_h = 0;
  for (const auto& m : metrics) {
    t.push_back(traffic_of(m.block));
    h.push_back(hosts_of(m.block));
    max_t = std::max(max_t, t.back());
    max_h = std::max(max_h, h.back());
  }
  if (!metrics.empty() && max_t == 0) throw Error("all blocks have zero traffic; normalization undefined");
  const double lt = std::log1p(double(max_t));
  const double lh = std::log1p(double(max_h));
  std::vector<BlockFeatures> out;
  out.reserve(metrics.size());
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    BlockFeatures f;
    f.block = metrics[i].block;
    f.stu = metrics[i].stu;
    f.traffic_norm = t[i] == max_t ? 1.0 : std::log1p(double(t[i])) / lt;
    f.hosts_norm = max_h == 0 ? 0.0 : (h[i] == max_h ? 1.0 : std::log1p(double(h[i])) / lh);
    out.push_back(f);
  }
  return out;
}

int feature_bin(double value) {
  if (!(value >= 0.0 && value <= 1.0)) throw Error("feature value outside [0, 1]");
  return upper_inclusive_bin(value, DemographicsCube::kBins);
}

std::uint64_t DemographicsCube::total() const noexcept {
  std::uint64_t n = 0;
  for (auto c : counts_) n += c;
  return n;
}

std::uint64_t DemographicsCube::stu_slab(int lo, int hi) const noexcept {
  std::uint64_t n = 0;
  for (int s = lo; s <= hi; ++s)
    for (int t = 1; t <= kBins; ++t)
      for (int h = 1; h <= kBins; ++h) n += at(s, t, h);
  return n;
}

DemographicsCube build_cube(std::span<const BlockFeatures> features) {
  DemographicsCube cube;
  for (const auto& f : features) cube.add(feature_bin(f.stu), feature_bin(f.traffic_norm), feature_bin(f.hosts_norm));
  return cube;
}

// ---------------------------------------------------------------------------

DelegationTable::DelegationTable(std::vector<Entry> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) { return a.start < b.start; });
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.count == 0 || std::uint64_t{e.start} + e.count > (std::uint64_t{1} << 32))
      throw Error("delegation range out of bounds at " + to_string(AddressId{e.start}));
    if (i > 0 && std::uint64_t{entries_[i - 1].start} + entries_[i - 1].count > e.start)
      throw Error("overlapping delegations at " + to_string(AddressId{e.start}));
  }
}

const DelegationTable::Entry* DelegationTable::lookup(AddressId a) const noexcept {
  auto it = std::upper_bound(entries_.begin(), entries_.end(), a.value,
                             [](std::uint32_t v, const Entry& e) { return v < e.start; });
  if (it == entries_.begin()) return nullptr;
  --it;
  return a.value <= it->last() ? &*it : nullptr;
}

DelegationTable load_delegations(LineReader& lines) {
  std::vector<DelegationTable::Entry> entries;
  std::vector<std::string_view> f;
  std::string_view line;
  while (lines.next(line)) {
    if (line.empty() || line.front() == '#') continue;
    f.clear();
    std::size_t pos = 0;
    for (;;) {
      const auto bar = line.find('|', pos);
      f.push_back(line.substr(pos, bar == std::string_view::npos ? std::string_view::npos : bar - pos));
      if (bar == std::string_view::npos) break;
      pos = bar + 1;
    }
    if (f.size() < 7 || f[2] != "ipv4" || f[3] == "*") continue;  // version / summary / other families
    auto start = parse_address(f[3]);
    std::uint64_t count = 0;
    auto [p, ec] = std::from_chars(f[4].data(), f[4].data() + f[4].size(), count);
    if (!start || ec != std::errc{} || p != f[4].data() + f[4].size())
      throw ParseError(lines.name(), lines.line_number(), "bad ipv4 delegation record");
    entries.push_back({std::string(f[0]), std::string(f[1]), start->value, count, std::string(f[6])});
  }
  return DelegationTable(std::move(entries));
}

double RegistryGroup::mean_hosts(int stu_bin, int traffic_bin) const noexcept {
  const auto i = static_cast<std::size_t>((stu_bin - 1) * 10 + (traffic_bin - 1));
  return counts[i] == 0 ? 0.0 : hosts_sum[i] / double(counts[i]);
}

std::map<std::string, RegistryGroup> group_by_registry(std::span<const BlockFeatures> features,
                                                       const DelegationTable& table) {
  std::map<std::string, RegistryGroup> out;
  for (const auto& f : features) {
    const auto* e = table.lookup(AddressId{f.block});
    auto& g = out[e ? e->registry : kUnassigned];
    ++g.blocks;
    const auto i = static_cast<std::size_t>((feature_bin(f.stu) - 1) * 10 + (feature_bin(f.traffic_norm) - 1));
    ++g.counts[i];
    g.hosts_sum[i] += f.hosts_norm;
    ++g.countries[e ? (e->country.empty() ? std::string("--") : e->country) : std::string("--")];
  }
  return out;
}

// ---------------------------------------------------------------------------

const char* to_string(Granularity g) noexcept {
  switch (g) {
    case Granularity::slash24: return "slash24";
    case Granularity::as: return "as";
    case Granularity::ip: break;
  }
  return "ip";
}

namespace {

template <typename Key>
Visibility partition(const std::set<Key>& a, const std::set<Key>& b) {
  Visibility v;
  for (const auto& k : a) (b.count(k) ? v.both : v.only_a) += 1;
  for (const auto& k : b)
    if (!a.count(k)) ++v.only_b;
  return v;
}

std::set<Asn> origins_of(const AddressSet& s, std::span<const RoutingSnapshot> snaps, DayRange window,
                         std::uint64_t& unrouted) {
  std::set<Asn> out;
  for (const auto& [block, bits] : s.entries()) {
    const auto origins = block_origins(block, snaps, window);
    for (unsigned off = 0; off < 256; ++off) {
      if (!bits.test(off)) continue;
      if (origins[off] == kUnrouted)
        ++unrouted;
      else
        out.insert(origins[off]);
    }
  }
  return out;
}

}  // namespace

Visibility compare_sources(const AddressSet& a, const AddressSet& b, Granularity g,
                           std::span<const RoutingSnapshot> snapshots, DayRange window) {
  switch (g) {
    case Granularity::ip: {
      Visibility v;
      v.both = set_intersection(a, b).size();
      v.only_a = a.size() - v.both;
      v.only_b = b.size() - v.both;
      return v;
    }
    case Granularity::slash24: {
      Visibility v;
      const auto& ea = a.entries();
      const auto& eb = b.entries();
      std::size_t i = 0, j = 0;
      while (i < ea.size() || j < eb.size()) {
        if (j == eb.size() || (i < ea.size() && ea[i].first < eb[j].first)) {
          ++v.only_a;
          ++i;
        } else if (i == ea.size() || eb[j].first < ea[i].first) {
          ++v.only_b;
          ++j;
        } else {
          ++v.both;
          ++i;
          ++j;
        }
      }
      return v;
    }
    case Granularity::as: {
      if (snapshots.empty()) throw Error("AS granularity requires routing snapshots");
      std::uint64_t ua = 0, ub = 0;
      const auto sa = origins_of(a, snapshots, window, ua);
      const auto sb = origins_of(b, snapshots, window, ub);
      Visibility v = partition(sa, sb);
      v.unrouted_a = ua;
      v.unrouted_b = ub;
      return v;
    }
  }
  return {};
}

std::map<std::string, Visibility> visibility_by_registry(const AddressSet& a, const AddressSet& b,
                                                         const DelegationTable& table) {
  std::map<std::string, Visibility> out;
  const auto all = set_union(a, b);
  for (const auto& [block, bits] : all.entries()) {
    const Bits256 ba = a.block_bits(block), bb = b.block_bits(block);
    for (unsigned off = 0; off < 256; ++off) {
      if (!bits.test(off)) continue;
      const auto* e = table.lookup(AddressId{block | off});
      auto& v = out[e ? e->registry : kUnassigned];
      const bool in_a = ba.test(off), in_b = bb.test(off);
      if (in_a && in_b)
        ++v.both;
      else if (in_a)
        ++v.only_a;
      else
        ++v.only_b;
    }
  }
  return out;
}

AddressSet load_address_set(LineReader& lines) {
  std::vector<AddressId> addrs;
  std::string_view line;
  while (lines.next(line)) {
    if (line.empty() || line.front() == '#') continue;
    auto a = parse_address(line);
    if (!a) throw ParseError(lines.name(), lines.line_number(), "bad address");
    addrs.push_back(*a);
  }
  return AddressSet::from_addresses(std::move(addrs));
}

}  // namespace ipact
