// SPDX-License-Identifier: Apache-2.0
#include "ipact/routing.hpp"

#include <algorithm>
#include <charconv>

#include "ipact/error.hpp"

namespace ipact {

RoutingSnapshot::RoutingSnapshot(int day, std::vector<Route> routes) : day_(day) {
  std::sort(routes.begin(), routes.end());
  for (std::size_t i = 0; i < routes.size();) {
    std::size_t j = i;
    bool conflict = false;
    while (j < routes.size() && routes[j].prefix == routes[i].prefix) {
      conflict |= routes[j].origin != routes[i].origin;
      ++j;
    }
    // routes are sorted by (prefix, origin), so routes[i] carries the smallest origin
    const Route& r = routes[i];
    if (conflict) ++conflicts_;
    if (r.origin != kUnrouted) {
      by_length_[static_cast<std::size_t>(r.prefix.length)].emplace(r.prefix.network, r.origin);
      if (r.prefix.length > 24) long_routes_[r.prefix.network & 0xFFFFFF00u].push_back(r);
      ++routes_;
    }
    i = j;
  }
  for (int len = 32; len >= 0; --len)
    if (!by_length_[static_cast<std::size_t>(len)].empty()) lengths_desc_.push_back(len);
  for (auto& [_, v] : long_routes_)
    std::sort(v.begin(), v.end(), [](const Route& a, const Route& b) {
      return a.prefix.length != b.prefix.length ? a.prefix.length > b.prefix.length : a.prefix < b.prefix;
    });
}

Asn RoutingSnapshot::lookup_upto(std::uint32_t addr, int max_len) const noexcept {
  for (int len : lengths_desc_) {
    if (len > max_len) continue;
    const auto& m = by_length_[static_cast<std::size_t>(len)];
    auto it = m.find(addr & mask_bits(len));
    if (it != m.end()) return it->second;
  }
  return kUnrouted;
}

Asn RoutingSnapshot::lookup(AddressId a) const noexcept { return lookup_upto(a.value, 32); }

RoutingSnapshot::BlockView RoutingSnapshot::view(std::uint32_t block) const noexcept {
  BlockView v;
  v.covering = lookup_upto(block, 24);
  auto it = long_routes_.find(block);
  if (it != long_routes_.end()) v.more_specific = it->second;
  return v;
}

Asn RoutingSnapshot::BlockView::resolve(unsigned offset, std::uint32_t block) const noexcept {
  const AddressId a{block | offset};
  for (const auto& r : more_specific)
    if (r.prefix.contains(a)) return r.origin;
  return covering;
}

std::vector<Route> parse_routes(LineReader& lines) {
  std::vector<Route> out;
  std::string_view line;
  while (lines.next(line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) throw ParseError(lines.name(), lines.line_number(), "expected <prefix>/<len>,<asn>");
    auto prefix = parse_prefix(line.substr(0, comma));
    if (!prefix) throw ParseError(lines.name(), lines.line_number(), "bad prefix");
    auto asn_text = line.substr(comma + 1);
    if (asn_text.size() > 2 && (asn_text.substr(0, 2) == "AS" || asn_text.substr(0, 2) == "as"))
      asn_text.remove_prefix(2);
    Asn asn = 0;
    auto [p, ec] = std::from_chars(asn_text.data(), asn_text.data() + asn_text.size(), asn);
    if (ec != std::errc{} || p != asn_text.data() + asn_text.size())
      throw ParseError(lines.name(), lines.line_number(), "bad AS number");
    out.push_back({*prefix, asn});
  }
  return out;
}

std::vector<RoutingSnapshot> load_routing_snapshots(const std::filesystem::path& dir, CivilDay first_day) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error("routing directory not found: " + dir.string());
  std::vector<fs::path> entries;
  for (const auto& e : fs::directory_iterator(dir)) entries.push_back(e.path());
  std::sort(entries.begin(), entries.end());

  std::vector<RoutingSnapshot> out;
  for (const auto& p : entries) {
    const std::string name = p.filename().string();
    auto day = parse_iso_date(std::string_view(name).substr(0, 10));
    if (!day || (name.size() > 10 && name[10] != '.')) continue;
    std::vector<Route> routes;
    std::vector<fs::path> files;
    if (fs::is_directory(p)) {
      for (const auto& f : fs::directory_iterator(p))
        if (f.is_regular_file()) files.push_back(f.path());
      std::sort(files.begin(), files.end());
    } else {
      files.push_back(p);
    }
    for (const auto& f : files) {
      auto reader = LineReader::open(f);
      auto part = parse_routes(reader);
      routes.insert(routes.end(), part.begin(), part.end());
    }
    out.emplace_back(*day - first_day, std::move(routes));
  }
  std::stable_sort(out.begin(), out.end(), [](const RoutingSnapshot& a, const RoutingSnapshot& b) {
    return a.day() < b.day();
  });
  return out;
}

std::span<const RoutingSnapshot> snapshots_in(std::span<const RoutingSnapshot> snapshots, DayRange window) {
  auto lo = std::lower_bound(snapshots.begin(), snapshots.end(), window.first,
                             [](const RoutingSnapshot& s, int d) { return s.day() < d; });
  auto hi = std::upper_bound(lo, snapshots.end(), window.last,
                             [](int d, const RoutingSnapshot& s) { return d < s.day(); });
  return {lo, hi};
}

namespace {

class Ballot {
public:
  void cast(Asn asn, int day) {
    for (auto& v : votes_) {
      if (v.asn == asn) {
        ++v.count;
        v.last_day = day;
        return;
      }
    }
    votes_.push_back({asn, 1, day});
  }
  Asn winner() const noexcept {
    const Vote* best = nullptr;
    for (const auto& v : votes_)
      if (!best || v.count > best->count || (v.count == best->count && v.last_day > best->last_day)) best = &v;
    return best ? best->asn : kUnrouted;
  }

private:
  struct Vote {
    Asn asn;
    int count;
    int last_day;
  };
  std::vector<Vote> votes_;
};

}  // namespace

Asn ip_to_as(AddressId ip, std::span<const RoutingSnapshot> snapshots, DayRange window) {
  auto in = snapshots_in(snapshots, window);
  if (in.empty()) throw Error("no routing snapshot inside day window");
  Ballot ballot;
  for (const auto& s : in) ballot.cast(s.lookup(ip), s.day());
  return ballot.winner();
}

std::array<Asn, 256> block_origins(std::uint32_t block, std::span<const RoutingSnapshot> snapshots,
                                   DayRange window) {
  auto in = snapshots_in(snapshots, window);
  if (in.empty()) throw Error("no routing snapshot inside day window");
  std::vector<RoutingSnapshot::BlockView> views;
  views.reserve(in.size());
  bool uniform = true;
  for (const auto& s : in) {
    views.push_back(s.view(block));
    uniform &= views.back().more_specific.empty();
  }
  std::array<Asn, 256> out{};
  if (uniform) {
    Ballot ballot;
    for (std::size_t k = 0; k < in.size(); ++k) ballot.cast(views[k].covering, in[k].day());
    out.fill(ballot.winner());
    return out;
  }
  for (unsigned off = 0; off < 256; ++off) {
    Ballot ballot;
    for (std::size_t k = 0; k < in.size(); ++k) ballot.cast(views[k].resolve(off, block), in[k].day());
    out[off] = ballot.winner();
  }
  return out;
}

const char* to_string(BgpClass c) noexcept {
  switch (c) {
    case BgpClass::no_change: return "no_change";
    case BgpClass::origin_change: return "origin_change";
    case BgpClass::announce: return "announce";
    case BgpClass::withdraw: return "withdraw";
    case BgpClass::unmapped: return "unmapped";
  }
  return "?";
}

BgpClass classify_bgp(Asn before, Asn after) noexcept {
  if (before == kUnrouted && after == kUnrouted) return BgpClass::unmapped;
  if (before == kUnrouted) return BgpClass::announce;
  if (after == kUnrouted) return BgpClass::withdraw;
  return before == after ? BgpClass::no_change : BgpClass::origin_change;
}

}  // namespace ipact
