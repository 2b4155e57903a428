// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ipact/activity_store.hpp"
#include "ipact/block_metrics.hpp"
#include "ipact/routing.hpp"
#include "ipact/traffic_hosts.hpp"

namespace ipact {

struct BlockFeatures {
  std::uint32_t block = 0;
  double stu = 0.0;
  double traffic_norm = 0.0;
  double hosts_norm = 0.0;
};

/// Total hits per materialized block, ascending.
std::vector<std::pair<std::uint32_t, std::uint64_t>> block_traffic(const ActivityStore& store);

/// traffic_norm = log(1+hits) / log(1+max hits); hosts_norm likewise over distinct UA counts
/// (all zero when no block has samples). Every metrics block needs a traffic entry; blocks
/// without a host record count as zero samples. Throws Error if all traffic is zero.
std::vector<BlockFeatures> normalize_features(const std::vector<BlockMetrics>& metrics,
                                              std::span<const std::pair<std::uint32_t, std::uint64_t>> traffic,
                                              std::span<const HostDensityRecord> hosts);

/// 10 x 10 x 10 counts over (stu, traffic, hosts); bin k holds ((k-1)/10, k/10], 0 goes to bin 1.
class DemographicsCube {
public:
  static constexpr int kBins = 10;

  std::uint64_t at(int stu_bin, int traffic_bin, int hosts_bin) const noexcept {
    return counts_[index(stu_bin, traffic_bin, hosts_bin)];
  }
  std::uint64_t total() const noexcept;
  /// Mass with STU in bins [lo, hi] (1-based, inclusive).
  std::uint64_t stu_slab(int lo, int hi) const noexcept;
  const std::array<std::uint64_t, 1000>& cells() const noexcept { return counts_; }
  void add(int stu_bin, int traffic_bin, int hosts_bin) noexcept { ++counts_[index(stu_bin, traffic_bin, hosts_bin)]; }

  static constexpr std::size_t index(int s, int t, int h) noexcept {
    return static_cast<std::size_t>((s - 1) * 100 + (t - 1) * 10 + (h - 1));
  }

private:
  std::array<std::uint64_t, 1000> counts_{};
};

/// Throws Error for a feature outside [0, 1].
DemographicsCube build_cube(std::span<const BlockFeatures> features);
/// Bin of a normalized feature: ((k-1)/10, k/10] with 0 in bin 1.
int feature_bin(double value);

/// Address delegations of the regional registries.
class DelegationTable {
public:
  struct Entry {
    std::string registry;
    std::string country;
    std::uint32_t start = 0;
    std::uint64_t count = 0;
    std::string status;
    std::uint32_t last() const noexcept { return static_cast<std::uint32_t>(start + count - 1); }
  };

  /// Throws Error when ranges overlap.
  explicit DelegationTable(std::vector<Entry> entries);
  DelegationTable() = default;

  const Entry* lookup(AddressId a) const noexcept;
  const std::vector<Entry>& entries() const noexcept { return entries_; }

private:
  std::vector<Entry> entries_;
};

/// Parses pipe-separated delegated-extended lines `registry|cc|ipv4|start|value|date|status[|...]`.
/// Version, summary, comment and non-ipv4 lines are skipped.
DelegationTable load_delegations(LineReader& lines);

inline constexpr const char* kUnassigned = "unassigned";

/// Per-registry projection of the cube onto the (stu, traffic) plane with mean hosts_norm per cell.
struct RegistryGroup {
  std::uint64_t blocks = 0;
  std::array<std::uint64_t, 100> counts{};  ///< index (stu_bin-1)*10 + (traffic_bin-1)
  std::array<double, 100> hosts_sum{};
  double mean_hosts(int stu_bin, int traffic_bin) const noexcept;
  std::map<std::string, std::uint64_t> countries;
};

/// Groups blocks by the registry of their network address; unmatched blocks under "unassigned".
std::map<std::string, RegistryGroup> group_by_registry(std::span<const BlockFeatures> features,
                                                       const DelegationTable& table);

enum class Granularity { ip, slash24, as };
const char* to_string(Granularity g) noexcept;

struct Visibility {
  std::uint64_t only_a = 0;
  std::uint64_t both = 0;
  std::uint64_t only_b = 0;
  std::uint64_t unrouted_a = 0;  ///< addresses without origin, as granularity only
  std::uint64_t unrouted_b = 0;
  bool operator==(const Visibility&) const = default;
};

/// Three-way partition of two address sets. A /24 or AS counts as seen by a source when at
/// least one of its addresses is in that source. Origins for `as` use the majority vote over
/// the window; throws Error for `as` without snapshots.
Visibility compare_sources(const AddressSet& a, const AddressSet& b, Granularity g,
                           std::span<const RoutingSnapshot> snapshots = {}, DayRange window = {});

/// Address-level three-way partition per registry.
std::map<std::string, Visibility> visibility_by_registry(const AddressSet& a, const AddressSet& b,
                                                         const DelegationTable& table);

/// Reads one dotted-quad per line (blank lines and '#' comments ignored).
AddressSet load_address_set(LineReader& lines);

}  // namespace ipact
