// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "ipact/activity_store.hpp"
#include "ipact/ua_samples.hpp"

namespace ipact {

/// Nearest-rank percentile of an ascending sequence: element ceil(p/100 * n), 1-based, at least 1.
double nearest_rank(const std::vector<double>& sorted, double p);

enum class DailyHitsStat { median, mean };

struct DaysActiveBin {
  int days = 0;                 ///< number of active days shared by the bin's addresses
  std::uint64_t addresses = 0;
  std::uint64_t total_hits = 0;
  // Percentiles over the per-address daily-hit statistic of member addresses.
  double p5 = 0, p25 = 0, p50 = 0, p75 = 0, p95 = 0;
};

/// Bins 1..T by active-day count; bins[b-1] holds addresses active on exactly b days.
struct DaysActiveBins {
  std::vector<DaysActiveBin> bins;
  std::uint64_t total_addresses() const noexcept;
  std::uint64_t total_hits() const noexcept;
};

/// Per address: active-day count and the median (nearest-rank) or mean of its hits over active
/// days only. Per bin: nearest-rank percentiles over member addresses.
DaysActiveBins bin_by_days_active(const ActivityStore& store, DailyHitsStat stat = DailyHitsStat::median);

struct CumulativeShare {
  int days = 0;
  double address_fraction = 0.0;
  double traffic_fraction = 0.0;
};
/// Cumulative address and traffic fractions in ascending bin order. Throws Error without addresses.
std::vector<CumulativeShare> cumulative_shares(const DaysActiveBins& bins);

/// Per window: hit share of the top ceil(0.1 * N) addresses by window hits, N = active addresses
/// in the window. Throws Error for a window without activity.
std::vector<double> top_decile_share(const ActivityStore& store, const std::vector<DayRange>& windows);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};
/// Least-squares line through (i, values[i]).
LinearFit linear_trend(const std::vector<double>& values);

struct HostDensityRecord {
  std::uint32_t block = 0;
  std::uint64_t sample_count = 0;
  std::uint64_t distinct_ua = 0;
};
/// One record per /24 active in the window, ascending, including blocks without samples.
/// Sample days are aligned to the store by calendar date.
std::vector<HostDensityRecord> host_density(const ActivityStore& store, const UASampleSet& samples, DayRange window);

/// Regions of the samples-vs-distinct-strings plane.
enum class HostRegion { bulk, automated, gateway };
const char* to_string(HostRegion r) noexcept;

struct HostRegionRule {
  std::uint64_t heavy_samples = 100;  ///< blocks below this sample count are bulk
  double automated_max_ratio = 0.05;  ///< heavy blocks with distinct/samples <= this are automated
};
HostRegion classify_host_region(const HostDensityRecord& r, const HostRegionRule& rule = {});

}  // namespace ipact
