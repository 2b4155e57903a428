// SPDX-License-Identifier: Apache-2.0
#include "ipact/traffic_hosts.hpp"

#include <algorithm>
#include <cmath>

#include "ipact/error.hpp"

namespace ipact {

double nearest_rank(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0.0;
  const double n = double(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

std::uint64_t DaysActiveBins::total_addresses() const noexcept {
  std::uint64_t n = 0;
  for (const auto& b : bins) n += b.addresses;
  return n;
}

std::uint64_t DaysActiveBins::total_hits() const noexcept {
  std::uint64_t n = 0;
  for (const auto& b : bins) n += b.total_hits;
  return n;
}

DaysActiveBins bin_by_days_active(const ActivityStore& store, DailyHitsStat stat) {
  const int T = store.days();
  std::vector<std::vector<double>> per_bin(static_cast<std::size_t>(T));
  DaysActiveBins out;
  out.bins.resize(static_cast<std::size_t>(T));
  for (int b = 0; b < T; ++b) out.bins[static_cast<std::size_t>(b)].days = b + 1;

  std::vector<double> daily;
  for (const auto& m : store.blocks()) {
    for (unsigned a = 0; a < 256; ++a) {
      const auto hits = m.row_hits(a);
      if (hits.empty()) continue;
      auto& bin = out.bins[hits.size() - 1];
      ++bin.addresses;
      std::uint64_t sum = 0;
      daily.assign(hits.begin(), hits.end());
      for (auto h : hits) sum += h;
      bin.total_hits += sum;
      double value;
      if (stat == DailyHitsStat::mean) {
        value = double(sum) / double(hits.size());
      } else {
        std::sort(daily.begin(), daily.end());
        value = nearest_rank(daily, 50.0);
      }
      per_bin[hits.size() - 1].push_back(value);
    }
  }
  for (std::size_t b = 0; b < per_bin.size(); ++b) {
    auto& v = per_bin[b];
    if (v.empty()) continue;
    std::sort(v.begin(), v.end());
    auto& bin = out.bins[b];
    bin.p5 = nearest_rank(v, 5);
    bin.p25 = nearest_rank(v, 25);
    bin.p50 = nearest_rank(v, 50);
    bin.p75 = nearest_rank(v, 75);
    bin.p95 = nearest_rank(v, 95);
  }
  return out;
}

std::vector<CumulativeShare> cumulative_shares(const DaysActiveBins& bins) {
  const auto total_addr = bins.total_addresses();
  const auto total_hits = bins.total_hits();
  if (total_addr == 0 || total_hits == 0) throw Error("no active addresses to accumulate");
  std::vector<CumulativeShare> out;
  std::uint64_t acc_a = 0, acc_h = 0;
  for (const auto& b : bins.bins) {
    acc_a += b.addresses;
    acc_h += b.total_hits;
    out.push_back({b.days, double(acc_a) / double(total_addr), double(acc_h) / double(total_hits)});
  }
  return out;
}

std::vector<double> top_decile_share(const ActivityStore& store, const std::vector<DayRange>& windows) {
  std::vector<double> out;
  std::vector<std::uint64_t> totals;
  for (const auto& w : windows) {
    store.check_range(w);
    totals.clear();
    std::uint64_t all = 0;
    for (const auto& m : store.blocks()) {
      for (unsigned a = 0; a < 256; ++a) {
        const auto h = m.hits_in(a, w);
        if (h == 0) continue;
        totals.push_back(h);
        all += h;
      }
    }
    if (totals.empty()) throw Error("window without active addresses");
    const std::size_t k = (totals.size() + 9) / 10;
    std::nth_element(totals.begin(), totals.begin() + static_cast<std::ptrdiff_t>(k - 1), totals.end(),
                     std::greater<>());
    std::uint64_t top = 0;
    for (std::size_t i = 0; i < k; ++i) top += totals[i];
    out.push_back(double(top) / double(all));
  }
  return out;
}

LinearFit linear_trend(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n == 0) return {};
  if (n == 1) return {0.0, values[0]};
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = double(i);
    sx += x;
    sy += values[i];
    sxx += x * x;
    sxy += x * values[i];
  }
  const double dn = double(n);
  const double slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
  return {slope, (sy - slope * sx) / dn};
}

std::vector<HostDensityRecord> host_density(const ActivityStore& store, const UASampleSet& samples, DayRange window) {
  store.check_range(window);
  const int shift = store.first_day() - samples.first_day();
  const DayRange sample_window{window.first + shift, window.last + shift};
  std::vector<HostDensityRecord> out;
  for (const auto& m : store.blocks()) {
    if (m.active_addresses(window).none()) continue;
    HostDensityRecord r;
    r.block = m.block();
    r.sample_count = samples.sample_count(m.block(), sample_window);
    r.distinct_ua = samples.distinct_count(m.block(), sample_window);
    out.push_back(r);
  }
  return out;
}

const char* to_string(HostRegion r) noexcept {
  switch (r) {
    case HostRegion::automated: return "automated";
    case HostRegion::gateway: return "gateway";
    case HostRegion::bulk: break;
  }
  return "bulk";
}

HostRegion classify_host_region(const HostDensityRecord& r, const HostRegionRule& rule) {
  if (r.sample_count < rule.heavy_samples) return HostRegion::bulk;
  const double ratio = double(r.distinct_ua) / double(r.sample_count);
  return ratio <= rule.automated_max_ratio ? HostRegion::automated : HostRegion::gateway;
}

}  // namespace ipact
