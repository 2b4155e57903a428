// SPDX-License-Identifier: Apache-2.0
#include "ipact/churn.hpp"

#include <algorithm>

#include "ipact/error.hpp"

namespace ipact {

WindowSpec make_windows(int days, int size) {
  if (size < 1) throw Error("window size must be >= 1");
  if (size > days) throw Error("window size " + std::to_string(size) + " exceeds " + std::to_string(days) + " days");
  WindowSpec spec;
  spec.size_days = size;
  for (int start = 0; start + size <= days; start += size) spec.windows.push_back({start, start + size - 1});
  return spec;
}

// ---------------------------------------------------------------------------

WindowedActivity::WindowedActivity(const ActivityStore& store, WindowSpec spec) : spec_(std::move(spec)) {
  for (const auto& w : spec_.windows) store.check_range(w);
  const std::size_t nw = spec_.count();
  sizes_.assign(nw, 0);
  blocks_.reserve(store.blocks().size());
  masks_.reserve(store.blocks().size() * nw);
  for (const auto& m : store.blocks()) {
    const auto cols = m.day_columns();
    blocks_.push_back(m.block());
    for (std::size_t i = 0; i < nw; ++i) {
      Bits256 acc;
      for (int d = spec_.windows[i].first; d <= spec_.windows[i].last; ++d) acc |= cols[static_cast<std::size_t>(d)];
      sizes_[i] += static_cast<std::uint64_t>(acc.count());
      masks_.push_back(acc);
    }
  }
}

std::optional<std::size_t> WindowedActivity::index_of(std::uint32_t block) const noexcept {
  auto it = std::lower_bound(blocks_.begin(), blocks_.end(), block);
  if (it == blocks_.end() || *it != block) return std::nullopt;
  return static_cast<std::size_t>(it - blocks_.begin());
}

AddressSet WindowedActivity::window_set(std::size_t window) const {
  std::vector<AddressSet::Entry> entries;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto& m = mask(b, window);
    if (!m.none()) entries.emplace_back(blocks_[b], m);
  }
  return AddressSet::from_sorted_entries(std::move(entries));
}

const char* to_string(EventKind k) noexcept { return k == EventKind::up ? "up" : "down"; }

// ---------------------------------------------------------------------------

Summary summarize(std::vector<double> v) {
  if (v.empty()) return {};
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  const double median = n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
  return {v.front(), median, v.back()};
}

namespace {

ChurnStats finish_stats(const WindowedActivity& wa, std::vector<std::uint64_t> up, std::vector<std::uint64_t> down) {
  ChurnStats stats;
  std::vector<double> ups, downs;
  for (std::size_t i = 0; i + 1 < wa.spec().count(); ++i) {
    BoundaryStats b;
    b.boundary = static_cast<int>(i);
    b.size_before = wa.window_size(i);
    b.size_after = wa.window_size(i + 1);
    b.up_count = up[i];
    b.down_count = down[i];
    b.up_pct = b.size_after ? 100.0 * double(b.up_count) / double(b.size_after) : 0.0;
    b.down_pct = b.size_before ? 100.0 * double(b.down_count) / double(b.size_before) : 0.0;
    ups.push_back(b.up_pct);
    downs.push_back(b.down_pct);
    stats.boundaries.push_back(b);
  }
  stats.up = summarize(std::move(ups));
  stats.down = summarize(std::move(downs));
  return stats;
}

void require_boundary(const WindowedActivity& wa) {
  if (wa.spec().count() < 2) throw Error("churn needs at least two windows");
}

}  // namespace

std::vector<BlockChurn> block_churn(const WindowedActivity& wa) {
  std::vector<BlockChurn> out;
  out.reserve(wa.block_count());
  const std::size_t windows = wa.spec().count();
  for (std::size_t b = 0; b < wa.block_count(); ++b) {
    BlockChurn c{wa.block_at(b), 0, 0};
    for (std::size_t w = 0; w + 1 < windows; ++w) {
      c.up += static_cast<std::uint64_t>(and_not(wa.mask(b, w + 1), wa.mask(b, w)).count());
      c.down += static_cast<std::uint64_t>(and_not(wa.mask(b, w), wa.mask(b, w + 1)).count());
    }
    out.push_back(c);
  }
  return out;
}

ChurnStats churn_stats(const WindowedActivity& wa) {
  require_boundary(wa);
  const std::size_t nb = wa.spec().boundaries();
  std::vector<std::uint64_t> up(nb, 0), down(nb, 0);
  for (std::size_t b = 0; b < wa.block_count(); ++b) {
    for (std::size_t i = 0; i < nb; ++i) {
      const auto& cur = wa.mask(b, i);
      const auto& nxt = wa.mask(b, i + 1);
      up[i] += static_cast<std::uint64_t>(and_not(nxt, cur).count());
      down[i] += static_cast<std::uint64_t>(and_not(cur, nxt).count());
    }
  }
  return finish_stats(wa, std::move(up), std::move(down));
}

ChurnResult detect_events(const WindowedActivity& wa) {
  require_boundary(wa);
  const std::size_t nb = wa.spec().boundaries();
  std::vector<std::uint64_t> up(nb, 0), down(nb, 0);
  ChurnResult out;
  std::vector<UpDownEvent> block_events;
  for (std::size_t b = 0; b < wa.block_count(); ++b) {
    block_events.clear();
    const std::uint32_t block = wa.block_at(b);
    for (std::size_t i = 0; i < nb; ++i) {
      const auto& cur = wa.mask(b, i);
      const auto& nxt = wa.mask(b, i + 1);
      const Bits256 ups = and_not(nxt, cur);
      const Bits256 downs = and_not(cur, nxt);
      up[i] += static_cast<std::uint64_t>(ups.count());
      down[i] += static_cast<std::uint64_t>(downs.count());
      for (unsigned w = 0; w < 4; ++w) {
        for (std::uint64_t x = ups.w[w] | downs.w[w]; x; x &= x - 1) {
          const unsigned off = w * 64 + static_cast<unsigned>(std::countr_zero(x));
          UpDownEvent e;
          e.address = AddressId{block | off};
          e.kind = ups.test(off) ? EventKind::up : EventKind::down;
          e.boundary = static_cast<int>(i);
          block_events.push_back(e);
        }
      }
    }
    std::sort(block_events.begin(), block_events.end(), [](const UpDownEvent& x, const UpDownEvent& y) {
      return x.address != y.address ? x.address < y.address : x.boundary < y.boundary;
    });
    out.events.insert(out.events.end(), block_events.begin(), block_events.end());
  }
  out.stats = finish_stats(wa, std::move(up), std::move(down));
  return out;
}

ChurnResult detect_events(const ActivityStore& store, const WindowSpec& spec) {
  return detect_events(WindowedActivity(store, spec));
}

// ---------------------------------------------------------------------------

MaskTagger::MaskTagger(const WindowedActivity& wa, int mask_floor) : wa_(wa), floor_(std::clamp(mask_floor, 0, 32)) {
  const std::size_t nb = wa.spec().boundaries();
  not_ok_prefix_.resize(nb * 2);
  for (std::size_t i = 0; i < nb; ++i) {
    for (int k = 0; k < 2; ++k) {
      auto& pre = not_ok_prefix_[i * 2 + static_cast<std::size_t>(k)];
      pre.assign(wa.block_count() + 1, 0);
      for (std::size_t b = 0; b < wa.block_count(); ++b)
        pre[b + 1] = pre[b] + (ok_bits(b, static_cast<int>(i), static_cast<EventKind>(k)).all() ? 0 : 1);
    }
  }
}

Bits256 MaskTagger::ok_bits(std::size_t b, int boundary, EventKind kind) const noexcept {
  const auto& cur = wa_.mask(b, static_cast<std::size_t>(boundary));
  const auto& nxt = wa_.mask(b, static_cast<std::size_t>(boundary) + 1);
  const Bits256 same_kind = kind == EventKind::up ? and_not(nxt, cur) : and_not(cur, nxt);
  return same_kind | ~(cur | nxt);
}

bool MaskTagger::holds(const UpDownEvent& e, int mask) const {
  if (mask >= 32) return true;
  const std::uint32_t block = e.address.block();
  if (mask >= 24) {
    auto idx = wa_.index_of(block);
    if (!idx) return true;  // a block without activity cannot hold this event, but is vacuously ok
    const unsigned width_log2 = static_cast<unsigned>(32 - mask);
    const unsigned first = (e.address.offset() >> width_log2) << width_log2;
    return ok_bits(*idx, e.boundary, e.kind).all_in(first, width_log2);
  }
  const std::uint32_t lo = e.address.value & mask_bits(mask);
  const std::uint64_t hi = std::uint64_t{lo} + (std::uint64_t{1} << (32 - mask));  // exclusive
  const auto& blocks = wa_.blocks();
  const auto first = static_cast<std::size_t>(std::lower_bound(blocks.begin(), blocks.end(), lo) - blocks.begin());
  const auto last = hi > 0xFFFFFFFFull
                        ? blocks.size()
                        : static_cast<std::size_t>(
                              std::lower_bound(blocks.begin(), blocks.end(), static_cast<std::uint32_t>(hi)) -
                              blocks.begin());
  const auto& pre = not_ok_prefix_[static_cast<std::size_t>(e.boundary) * 2 + static_cast<std::size_t>(e.kind)];
  return pre[last] - pre[first] == 0;
}

int MaskTagger::tag(const UpDownEvent& e) const {
  int m = 32;
  while (m - 1 >= floor_ && holds(e, m - 1)) --m;
  return m;
}

int tag_event_mask(const UpDownEvent& event, const ActivityStore& store, const WindowSpec& spec, int mask_floor) {
  WindowedActivity wa(store, spec);
  return MaskTagger(wa, mask_floor).tag(event);
}

void tag_events(std::vector<UpDownEvent>& events, const WindowedActivity& wa, int mask_floor) {
  MaskTagger tagger(wa, mask_floor);
  for (auto& e : events) e.tagged_mask = tagger.tag(e);
}

// ---------------------------------------------------------------------------

std::string mask_bucket(int mask) {
  if (mask >= 31) return ">=/31";
  if (mask >= 25) return "/30-/25";
  return "/" + std::to_string(mask);
}

double MaskHistogram::fraction(const std::string& bucket) const {
  for (const auto& [name, f] : buckets)
    if (name == bucket) return f;
  return 0.0;
}

double MaskHistogram::at_or_below_24() const {
  double s = 0.0;
  for (const auto& [name, f] : buckets)
    if (name != ">=/31" && name != "/30-/25") s += f;
  return s;
}

MaskHistogram mask_histogram(std::span<const UpDownEvent> events, int mask_floor) {
  MaskHistogram h;
  if (events.empty()) return h;
  const int floor = std::min(mask_floor, 24);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(2 + 24 - floor + 1), 0);
  auto slot = [&](int m) -> std::size_t {
    if (m >= 31) return 0;
    if (m >= 25) return 1;
    return static_cast<std::size_t>(2 + 24 - std::max(m, floor));
  };
  for (const auto& e : events) ++counts[slot(e.tagged_mask)];
  h.total = events.size();
  h.buckets.emplace_back(">=/31", double(counts[0]) / double(h.total));
  h.buckets.emplace_back("/30-/25", double(counts[1]) / double(h.total));
  for (int m = 24; m >= floor; --m)
    h.buckets.emplace_back(mask_bucket(m), double(counts[slot(m)]) / double(h.total));
  return h;
}

// ---------------------------------------------------------------------------

namespace {

// Per-window origins of one block, computed window by window.
std::vector<std::array<Asn, 256>> origins_for_block(std::uint32_t block, const WindowSpec& spec,
                                                    std::span<const RoutingSnapshot> snapshots) {
  std::vector<std::array<Asn, 256>> out;
  out.reserve(spec.count());
  for (const auto& w : spec.windows) out.push_back(block_origins(block, snapshots, w));
  return out;
}

}  // namespace

BgpClass classify_bgp(AddressId address, int boundary, const WindowSpec& spec,
                      std::span<const RoutingSnapshot> snapshots) {
  const auto b = static_cast<std::size_t>(boundary);
  if (b + 1 >= spec.count()) throw Error("boundary out of range");
  return classify_bgp(ip_to_as(address, snapshots, spec.windows[b]), ip_to_as(address, snapshots, spec.windows[b + 1]));
}

void annotate_bgp(std::vector<UpDownEvent>& events, const WindowedActivity& wa,
                  std::span<const RoutingSnapshot> snapshots) {
  std::size_t i = 0;
  while (i < events.size()) {
    const std::uint32_t block = events[i].address.block();
    const auto origins = origins_for_block(block, wa.spec(), snapshots);
    for (; i < events.size() && events[i].address.block() == block; ++i) {
      auto& e = events[i];
      const auto b = static_cast<std::size_t>(e.boundary);
      e.bgp = classify_bgp(origins[b][e.address.offset()], origins[b + 1][e.address.offset()]);
    }
  }
}

BgpCorrelation bgp_correlation(const WindowedActivity& wa, std::span<const RoutingSnapshot> snapshots) {
  require_boundary(wa);
  BgpCorrelation c;
  for (std::size_t b = 0; b < wa.block_count(); ++b) {
    const auto origins = origins_for_block(wa.block_at(b), wa.spec(), snapshots);
    for (std::size_t i = 0; i + 1 < wa.spec().count(); ++i) {
      const auto& cur = wa.mask(b, i);
      const auto& nxt = wa.mask(b, i + 1);
      for (unsigned off = 0; off < 256; ++off) {
        const bool a = cur.test(off), n = nxt.test(off);
        if (!a && !n) continue;
        const bool changed = is_bgp_change(classify_bgp(origins[i][off], origins[i + 1][off]));
        if (a && n) {
          ++c.steady_total;
          c.steady_changed += changed;
        } else if (n) {
          ++c.up_total;
          c.up_changed += changed;
        } else {
          ++c.down_total;
          c.down_changed += changed;
        }
      }
    }
  }
  return c;
}

std::vector<LongTermRow> long_term_diff(const WindowedActivity& wa, std::span<const RoutingSnapshot> snapshots) {
  const std::size_t nw = wa.spec().count();
  std::vector<LongTermRow> rows(nw > 0 ? nw - 1 : 0);
  for (std::size_t k = 1; k < nw; ++k) rows[k - 1].window = static_cast<int>(k);
  const bool with_bgp = !snapshots.empty();
  for (std::size_t b = 0; b < wa.block_count(); ++b) {
    const auto& base = wa.mask(b, 0);
    std::array<Asn, 256> base_origin{};
    if (with_bgp) base_origin = block_origins(wa.block_at(b), snapshots, wa.spec().windows[0]);
    for (std::size_t k = 1; k < nw; ++k) {
      const auto& cur = wa.mask(b, k);
      const Bits256 appear = and_not(cur, base);
      const Bits256 disappear = and_not(base, cur);
      auto& row = rows[k - 1];
      const auto na = static_cast<std::uint64_t>(appear.count());
      const auto nd = static_cast<std::uint64_t>(disappear.count());
      row.appear += na;
      row.disappear += nd;
      if (base.none()) row.appear_entire_block += na;
      if (cur.none()) row.disappear_entire_block += nd;
      if (with_bgp && (na || nd)) {
        const auto origin = block_origins(wa.block_at(b), snapshots, wa.spec().windows[k]);
        for (unsigned off = 0; off < 256; ++off) {
          if (appear.test(off)) ++row.appear_bgp[classify_bgp(base_origin[off], origin[off])];
          if (disappear.test(off)) ++row.disappear_bgp[classify_bgp(base_origin[off], origin[off])];
        }
      }
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------

PerAsChurn per_as_churn(const WindowedActivity& wa, std::span<const RoutingSnapshot> snapshots,
                        std::uint64_t min_actives, OriginMapping mapping) {
  require_boundary(wa);
  const std::size_t nw = wa.spec().count();
  const std::size_t nb = nw - 1;
  struct Acc {
    std::vector<std::uint64_t> size;  // per window
    std::vector<std::uint64_t> up;    // per boundary
    std::vector<std::uint64_t> down;
    std::uint64_t actives = 0;
  };
  std::map<Asn, Acc> acc;
  auto acc_for = [&](Asn asn) -> Acc& {
    auto [it, inserted] = acc.try_emplace(asn);
    if (inserted) {
      it->second.size.assign(nw, 0);
      it->second.up.assign(nb, 0);
      it->second.down.assign(nb, 0);
    }
    return it->second;
  };
  const DayRange period{wa.spec().windows.front().first, wa.spec().windows.back().last};

  for (std::size_t b = 0; b < wa.block_count(); ++b) {
    const std::uint32_t block = wa.block_at(b);
    std::vector<std::array<Asn, 256>> origins;
    if (mapping == OriginMapping::per_window) {
      origins = origins_for_block(block, wa.spec(), snapshots);
    } else {
      origins.assign(nw, block_origins(block, snapshots, period));
    }
    std::map<Asn, Bits256> seen;
    for (std::size_t i = 0; i < nw; ++i) {
      const auto& m = wa.mask(b, i);
      for (unsigned off = 0; off < 256; ++off) {
        if (!m.test(off) || origins[i][off] == kUnrouted) continue;
        ++acc_for(origins[i][off]).size[i];
        seen[origins[i][off]].set(off);
      }
    }
    for (const auto& [asn, bits] : seen) acc_for(asn).actives += static_cast<std::uint64_t>(bits.count());
    for (std::size_t i = 0; i < nb; ++i) {
      const auto& cur = wa.mask(b, i);
      const auto& nxt = wa.mask(b, i + 1);
      for (unsigned off = 0; off < 256; ++off) {
        const bool a = cur.test(off), n = nxt.test(off);
        // per-AS sets: W_i^AS uses window-i origins, W_{i+1}^AS window-(i+1) origins
        const Asn before = origins[i][off], after = origins[i + 1][off];
        if (n && after != kUnrouted && !(a && before == after)) ++acc_for(after).up[i];
        if (a && before != kUnrouted && !(n && before == after)) ++acc_for(before).down[i];
      }
    }
  }

  PerAsChurn out;
  std::vector<double> up_medians, down_medians;
  for (const auto& [asn, a] : acc) {
    if (a.actives <= min_actives) {
      ++out.excluded;
      continue;
    }
    std::vector<double> ups, downs;
    for (std::size_t i = 0; i < nb; ++i) {
      if (a.size[i + 1] > 0) ups.push_back(100.0 * double(a.up[i]) / double(a.size[i + 1]));
      if (a.size[i] > 0) downs.push_back(100.0 * double(a.down[i]) / double(a.size[i]));
    }
    AsChurn r;
    r.asn = asn;
    r.active_addresses = a.actives;
    r.median_up_pct = summarize(ups).median;
    r.median_down_pct = summarize(downs).median;
    r.boundaries_used = ups.size();
    up_medians.push_back(r.median_up_pct);
    down_medians.push_back(r.median_down_pct);
    out.ases.push_back(r);
  }
  auto cdf = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i + 1 < v.size() && v[i + 1] == v[i]) continue;
      pts.emplace_back(v[i], double(i + 1) / double(v.size()));
    }
    return pts;
  };
  out.up_cdf = cdf(std::move(up_medians));
  out.down_cdf = cdf(std::move(down_medians));
  return out;
}

}  // namespace ipact
