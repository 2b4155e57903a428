// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ipact/activity_store.hpp"
#include "ipact/routing.hpp"

namespace ipact {

/// Consecutive non-overlapping windows of size_days days; a trailing partial window is dropped.
struct WindowSpec {
  int size_days = 1;
  std::vector<DayRange> windows;

  std::size_t count() const noexcept { return windows.size(); }
  std::size_t boundaries() const noexcept { return windows.empty() ? 0 : windows.size() - 1; }
};

/// floor(days / size) windows tiling [0, floor(days/size)*size - 1]. Throws if size < 1 or size > days.
WindowSpec make_windows(int days, int size);

/// Per-window unions of active addresses for every materialized /24 of a store.
class WindowedActivity {
public:
  WindowedActivity(const ActivityStore& store, WindowSpec spec);

  const WindowSpec& spec() const noexcept { return spec_; }
  std::size_t block_count() const noexcept { return blocks_.size(); }
  std::uint32_t block_at(std::size_t i) const noexcept { return blocks_[i]; }
  const std::vector<std::uint32_t>& blocks() const noexcept { return blocks_; }
  const Bits256& mask(std::size_t block_index, std::size_t window) const noexcept {
    return masks_[block_index * spec_.count() + window];
  }
  /// Index of a block, or nullopt if the block has no activity in the store.
  std::optional<std::size_t> index_of(std::uint32_t block) const noexcept;
  std::uint64_t window_size(std::size_t window) const noexcept { return sizes_[window]; }
  AddressSet window_set(std::size_t window) const;

private:
  WindowSpec spec_;
  std::vector<std::uint32_t> blocks_;
  std::vector<Bits256> masks_;
  std::vector<std::uint64_t> sizes_;
};

/// Up and down events of one /24 summed over all boundaries.
struct BlockChurn {
  std::uint32_t block = 0;
  std::uint64_t up = 0;
  std::uint64_t down = 0;
};
/// One row per block with activity, ascending. Needs no boundary (zero totals for one window).
std::vector<BlockChurn> block_churn(const WindowedActivity& wa);

enum class EventKind : std::uint8_t { up, down };
const char* to_string(EventKind k) noexcept;

/// Transition of one address between windows boundary and boundary+1.
struct UpDownEvent {
  AddressId address;
  EventKind kind = EventKind::up;
  int boundary = 0;
  int tagged_mask = 32;
  std::optional<BgpClass> bgp;

  bool operator==(const UpDownEvent&) const = default;
};

struct BoundaryStats {
  int boundary = 0;
  std::uint64_t size_before = 0;  ///< |W_i|
  std::uint64_t size_after = 0;   ///< |W_{i+1}|
  std::uint64_t up_count = 0;
  std::uint64_t down_count = 0;
  double up_pct = 0.0;    ///< 100 * up / |W_{i+1}|; 0 when W_{i+1} is empty
  double down_pct = 0.0;  ///< 100 * down / |W_i|; 0 when W_i is empty
};

struct Summary {
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
};

/// min / median / max; the median of an even count is the mean of the two central values.
Summary summarize(std::vector<double> values);

struct ChurnStats {
  std::vector<BoundaryStats> boundaries;
  Summary up;
  Summary down;
};

struct ChurnResult {
  std::vector<UpDownEvent> events;  ///< ordered by (address, boundary)
  ChurnStats stats;
};

/// Enumerates every up/down event. Throws Error when fewer than two windows exist.
ChurnResult detect_events(const WindowedActivity& wa);
ChurnResult detect_events(const ActivityStore& store, const WindowSpec& spec);
/// Boundary statistics only, without materializing events.
ChurnStats churn_stats(const WindowedActivity& wa);

/// Tags events with the smallest prefix mask m >= mask_floor such that every address of the
/// event address's /m had a same-kind event at that boundary or was inactive in both windows.
class MaskTagger {
public:
  MaskTagger(const WindowedActivity& wa, int mask_floor = 8);
  int tag(const UpDownEvent& e) const;
  /// The tagging predicate itself, for a given mask.
  bool holds(const UpDownEvent& e, int mask) const;
  int mask_floor() const noexcept { return floor_; }

private:
  Bits256 ok_bits(std::size_t block_index, int boundary, EventKind kind) const noexcept;

  const WindowedActivity& wa_;
  int floor_;
  // Per (boundary, kind): prefix counts over block index of blocks that are not entirely ok.
  std::vector<std::vector<std::uint32_t>> not_ok_prefix_;
};

int tag_event_mask(const UpDownEvent& event, const ActivityStore& store, const WindowSpec& spec,
                   int mask_floor = 8);
void tag_events(std::vector<UpDownEvent>& events, const WindowedActivity& wa, int mask_floor = 8);

/// Ordered buckets: ">=/31", "/30-/25", then one bucket per mask from /24 down to the floor.
struct MaskHistogram {
  std::vector<std::pair<std::string, double>> buckets;
  std::size_t total = 0;

  double fraction(const std::string& bucket) const;
  /// Combined share of all buckets at /24 or shorter.
  double at_or_below_24() const;
};
MaskHistogram mask_histogram(std::span<const UpDownEvent> events, int mask_floor = 8);
std::string mask_bucket(int mask);

/// Origin lookups for windows, either per window or one period-wide vote.
enum class OriginMapping { per_window, period };

/// Fills event.bgp by comparing each address's origin in the two windows around its boundary.
void annotate_bgp(std::vector<UpDownEvent>& events, const WindowedActivity& wa,
                  std::span<const RoutingSnapshot> snapshots);

BgpClass classify_bgp(AddressId address, int boundary, const WindowSpec& spec,
                      std::span<const RoutingSnapshot> snapshots);

/// Share of events (and of steadily active addresses) that coincide with a BGP change.
struct BgpCorrelation {
  std::uint64_t up_total = 0, up_changed = 0;
  std::uint64_t down_total = 0, down_changed = 0;
  std::uint64_t steady_total = 0, steady_changed = 0;
};
BgpCorrelation bgp_correlation(const WindowedActivity& wa, std::span<const RoutingSnapshot> snapshots);

/// Appear/disappear accounting of each window against window 0.
struct LongTermRow {
  int window = 0;
  std::uint64_t appear = 0;
  std::uint64_t disappear = 0;
  std::uint64_t appear_entire_block = 0;     ///< appearing addresses whose /24 was dark in W_0
  std::uint64_t disappear_entire_block = 0;  ///< disappearing addresses whose /24 is dark in W_k
  std::map<BgpClass, std::uint64_t> appear_bgp;     ///< empty without snapshots
  std::map<BgpClass, std::uint64_t> disappear_bgp;
};
std::vector<LongTermRow> long_term_diff(const WindowedActivity& wa,
                                        std::span<const RoutingSnapshot> snapshots = {});

struct AsChurn {
  Asn asn = kUnrouted;
  std::uint64_t active_addresses = 0;
  double median_up_pct = 0.0;
  double median_down_pct = 0.0;
  std::size_t boundaries_used = 0;
};
struct PerAsChurn {
  std::vector<AsChurn> ases;                            ///< ascending AS number, filtered
  std::vector<std::pair<double, double>> up_cdf;        ///< (median up pct, cumulative fraction)
  std::vector<std::pair<double, double>> down_cdf;
  std::size_t excluded = 0;                             ///< ASes at or below the threshold
};
/// Keeps ASes with more than min_actives active addresses over the period.
PerAsChurn per_as_churn(const WindowedActivity& wa, std::span<const RoutingSnapshot> snapshots,
                        std::uint64_t min_actives = 1000, OriginMapping mapping = OriginMapping::per_window);

}  // namespace ipact
