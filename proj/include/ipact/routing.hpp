// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <unordered_map>
#include <vector>

#include "ipact/address.hpp"
#include "ipact/calendar.hpp"
#include "ipact/io.hpp"

namespace ipact {

/// Origin AS number. AS0 never originates a valid route, so 0 doubles as "unrouted".
using Asn = std::uint32_t;
inline constexpr Asn kUnrouted = 0;

struct Route {
  Prefix prefix;
  Asn origin = kUnrouted;
  auto operator<=>(const Route&) const = default;
};

/// One day's routing table with longest-prefix-match lookup.
class RoutingSnapshot {
public:
  /// Duplicate prefixes with conflicting origins keep the smallest AS number and are
  /// counted in conflicts().
  RoutingSnapshot(int day, std::vector<Route> routes);

  int day() const noexcept { return day_; }
  Asn lookup(AddressId a) const noexcept;
  std::size_t route_count() const noexcept { return routes_; }
  std::size_t conflicts() const noexcept { return conflicts_; }

  /// Routing as seen by one /24: the origin of the longest route of length <= 24 covering
  /// it, plus any longer routes inside it (sorted longest first).
  struct BlockView {
    Asn covering = kUnrouted;
    std::span<const Route> more_specific;
    Asn resolve(unsigned offset, std::uint32_t block) const noexcept;
  };
  BlockView view(std::uint32_t block) const noexcept;

private:
  Asn lookup_upto(std::uint32_t addr, int max_len) const noexcept;

  int day_;
  std::size_t routes_ = 0;
  std::size_t conflicts_ = 0;
  std::array<std::unordered_map<std::uint32_t, Asn>, 33> by_length_;
  std::vector<int> lengths_desc_;
  std::unordered_map<std::uint32_t, std::vector<Route>> long_routes_;
};

/// Parses `<prefix>/<len>,<asn>` lines. Blank lines and '#' comments are ignored.
std::vector<Route> parse_routes(LineReader& lines);

/// Loads a directory of daily snapshots. Each entry is named by ISO date (a file, optionally
/// with an extension, or a directory whose files are concatenated). Day ordinals are relative
/// to first_day. Result is sorted by day.
std::vector<RoutingSnapshot> load_routing_snapshots(const std::filesystem::path& dir, CivilDay first_day);

/// Origin AS of ip over a day window: longest-prefix match per day, then the most frequent
/// origin across days; ties go to the tied origin seen on the latest day. Unrouted days vote
/// for kUnrouted. Throws Error if no snapshot falls inside the window.
Asn ip_to_as(AddressId ip, std::span<const RoutingSnapshot> snapshots, DayRange window);

/// Per-address origins for a whole /24 over a window, using the same vote as ip_to_as.
std::array<Asn, 256> block_origins(std::uint32_t block, std::span<const RoutingSnapshot> snapshots,
                                   DayRange window);

/// Snapshots whose day falls inside the window (snapshots must be sorted by day).
std::span<const RoutingSnapshot> snapshots_in(std::span<const RoutingSnapshot> snapshots, DayRange window);

enum class BgpClass : std::uint8_t { no_change, origin_change, announce, withdraw, unmapped };

const char* to_string(BgpClass c) noexcept;
BgpClass classify_bgp(Asn before, Asn after) noexcept;
inline bool is_bgp_change(BgpClass c) noexcept {
  return c == BgpClass::origin_change || c == BgpClass::announce || c == BgpClass::withdraw;
}

}  // namespace ipact
