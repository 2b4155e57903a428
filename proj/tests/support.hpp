// SPDX-License-Identifier: Apache-2.0
// Naive reference implementations and fixtures shared by the test binaries.
// The oracles only use std containers over raw records, never the bitmap code.
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ipact/activity_store.hpp"
#include "ipact/address.hpp"
#include "ipact/calendar.hpp"

namespace ipact::test {

struct Rec {
  std::uint32_t addr;
  int day;
  std::uint64_t hits;
};

inline std::uint32_t ip(const char* s) { return parse_address(s).value().value; }

inline CivilDay day0() { return parse_iso_date("2015-01-05").value(); }  // a Monday

inline ActivityStore make_store(const std::vector<Rec>& recs, int days, CivilDay first = day0()) {
  StoreBuilder b(first, days);
  for (const auto& r : recs) b.add(AddressId{r.addr}, r.day, r.hits);
  return std::move(b).seal();
}

/// Random activity over `blocks` /24s starting at base. Each address gets its own activity
/// probability so that some blocks are dense and some sparse.
inline std::vector<Rec> random_records(std::uint64_t seed, std::uint32_t base, int blocks, int days) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Rec> out;
  for (int b = 0; b < blocks; ++b) {
    const double block_p = u(rng);
    for (std::uint32_t off = 0; off < 256; ++off) {
      const double p = u(rng) < block_p ? u(rng) : 0.0;
      if (p == 0.0) continue;
      const std::uint32_t a = base + std::uint32_t(b) * 256 + off;
      for (int d = 0; d < days; ++d)
        if (u(rng) < p) out.push_back({a, d, 1 + rng() % 1000});
    }
  }
  return out;
}

using AddrSet = std::unordered_set<std::uint32_t>;

inline AddrSet naive_active(const std::vector<Rec>& recs, int lo, int hi) {
  AddrSet s;
  for (const auto& r : recs)
    if (r.day >= lo && r.day <= hi) s.insert(r.addr);
  return s;
}

inline std::set<std::uint32_t> sorted(const AddrSet& s) { return {s.begin(), s.end()}; }

inline std::vector<AddrSet> naive_windows(const std::vector<Rec>& recs, int days, int w) {
  std::vector<AddrSet> out(std::size_t(days / w));
  for (const auto& r : recs)
    if (r.day / w < int(out.size())) out[std::size_t(r.day / w)].insert(r.addr);
  return out;
}

/// (address, kind 0=up 1=down, boundary) sorted like the library output.
using NaiveEvent = std::tuple<std::uint32_t, int, int>;

inline std::vector<NaiveEvent> naive_events(const std::vector<AddrSet>& win) {
  std::vector<NaiveEvent> out;
  for (std::size_t i = 0; i + 1 < win.size(); ++i) {
    for (auto a : win[i + 1])
      if (!win[i].count(a)) out.emplace_back(a, 0, int(i));
    for (auto a : win[i])
      if (!win[i + 1].count(a)) out.emplace_back(a, 1, int(i));
  }
  std::sort(out.begin(), out.end(), [](const NaiveEvent& x, const NaiveEvent& y) {
    return std::tie(std::get<0>(x), std::get<2>(x), std::get<1>(x)) <
           std::tie(std::get<0>(y), std::get<2>(y), std::get<1>(y));
  });
  return out;
}

/// Brute-force tagging predicate: no address in the /m of `addr` is active in either window
/// without having a same-kind event.
inline bool naive_mask_holds(const AddrSet& before, const AddrSet& after, std::uint32_t addr, bool up, int m) {
  const std::uint32_t mask = m == 0 ? 0u : ~std::uint32_t(0) << (32 - m);
  auto violates = [&](std::uint32_t x) {
    if ((x & mask) != (addr & mask)) return false;
    const bool in_b = before.count(x) > 0, in_a = after.count(x) > 0;
    const bool same_kind = up ? (!in_b && in_a) : (in_b && !in_a);
    return !same_kind;  // active in at least one window, since x came from a window set
  };
  for (auto x : before)
    if (violates(x)) return false;
  for (auto x : after)
    if (violates(x)) return false;
  return true;
}

struct NaiveLongTerm {
  std::uint64_t appear, disappear, appear_block, disappear_block;
};

inline std::vector<NaiveLongTerm> naive_long_term(const std::vector<AddrSet>& win) {
  std::vector<NaiveLongTerm> out;
  auto blocks_of = [](const AddrSet& s) {
    std::unordered_set<std::uint32_t> b;
    for (auto a : s) b.insert(a & 0xFFFFFF00u);
    return b;
  };
  const auto b0 = blocks_of(win[0]);
  for (std::size_t k = 0; k < win.size(); ++k) {
    const auto bk = blocks_of(win[k]);
    NaiveLongTerm r{0, 0, 0, 0};
    for (auto a : win[k])
      if (!win[0].count(a)) {
        ++r.appear;
        if (!b0.count(a & 0xFFFFFF00u)) ++r.appear_block;
      }
    for (auto a : win[0])
      if (!win[k].count(a)) {
        ++r.disappear;
        if (!bk.count(a & 0xFFFFFF00u)) ++r.disappear_block;
      }
    out.push_back(r);
  }
  return out;
}

/// Three-way partition of the keys produced by `key` (which returns false to drop an address).
template <class KeyFn>
std::tuple<std::uint64_t, std::uint64_t, std::uint64_t> naive_partition(const AddrSet& a, const AddrSet& b, KeyFn key) {
  std::set<std::uint64_t> ka, kb;
  std::uint64_t k = 0;
  for (auto x : a)
    if (key(x, k)) ka.insert(k);
  for (auto x : b)
    if (key(x, k)) kb.insert(k);
  std::uint64_t only_a = 0, both = 0, only_b = 0;
  for (auto x : ka) (kb.count(x) ? both : only_a) += 1;
  for (auto x : kb)
    if (!ka.count(x)) ++only_b;
  return {only_a, both, only_b};
}

inline AddressSet to_address_set(const AddrSet& s) {
  std::vector<AddressId> v;
  for (auto a : s) v.push_back(AddressId{a});
  return AddressSet::from_addresses(std::move(v));
}

}  // namespace ipact::test
