// SPDX-License-Identifier: Apache-2.0
//
// Draw order (generator version 1). Every regime instance owns four streams derived from
// (seed, block, phase): layout, rates, activity, ua.
//   rates:    one uniform per subscriber, in subscriber order, at construction.
//   layout:   static/gateway/bot draw a partial shuffle of the pool once; round_robin_pool
//             draws nothing; dynamic_24h_lease draws a partial shuffle at each lease start;
//             dynamic_long_lease draws a full shuffle once, then per lease boundary and per
//             subscriber one uniform (move?) and, when moving, one index into the free list.
//   activity: per day, per subscriber: two uniforms (active?, hits), drawn even when idle.
//   ua:       per day, per active subscriber, per sample: one index below ua_per_subscriber.
// Phase 0 is the block's initial regime, phase 1 the regime after a reconfiguration.
#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numeric>
#include <tuple>
#include <unordered_map>

#include <fmt/format.h>

#include "ipact/error.hpp"
#include "ipact/synth.hpp"

namespace ipact::synth {
namespace {

enum Purpose : std::uint64_t { kLayout = 1, kRates = 2, kActivity = 3, kUa = 4 };

constexpr std::uint32_t kMaxHits = 1u << 31;

bool static_like(Regime r) { return r == Regime::static_sparse || r == Regime::gateway || r == Regime::bot; }

class Instance {
public:
  Instance(const RegimeSpec& spec, std::uint64_t seed, std::uint32_t origin, std::uint64_t phase, std::uint32_t id)
      : spec_(spec),
        origin_(origin),
        id_(id),
        layout_(Rng::derive(seed, std::uint64_t{origin} << 8 | phase, kLayout)),
        activity_(Rng::derive(seed, std::uint64_t{origin} << 8 | phase, kActivity)),
        ua_(Rng::derive(seed, std::uint64_t{origin} << 8 | phase, kUa)) {
    const int n = spec.subscribers;
    Rng rates = Rng::derive(seed, std::uint64_t{origin} << 8 | phase, kRates);
    rate_.resize(std::size_t(n));
    for (auto& r : rate_) r = spec.hits_mean * (1.0 + spec.hits_spread * (2.0 * rates.uniform() - 1.0));
    heavy_ = static_cast<int>(std::floor(spec.heavy_share * n + 0.5));
    offsets_.resize(std::size_t(n));
    if (static_like(spec.regime)) {
      auto perm = shuffled(n);
      std::copy_n(perm.begin(), n, offsets_.begin());
    } else if (spec.regime == Regime::dynamic_long_lease) {
      auto perm = shuffled(spec.pool);
      std::copy_n(perm.begin(), n, offsets_.begin());
      free_.assign(perm.begin() + n, perm.end());
    }
  }

  const RegimeSpec& spec() const noexcept { return spec_; }
  std::uint32_t origin() const noexcept { return origin_; }
  std::uint32_t id() const noexcept { return id_; }
  Rng& activity() noexcept { return activity_; }
  Rng& ua() noexcept { return ua_; }
  double rate(int j) const noexcept { return rate_[std::size_t(j)]; }
  const std::vector<int>& offsets() const noexcept { return offsets_; }

  double p(int j, CivilDay day) const noexcept {
    if (spec_.regime == Regime::dynamic_long_lease && j >= heavy_) return spec_.light_p;
    return spec_.p_on(day);
  }

  /// Moves the layout to `day`; days must be visited in increasing order.
  void advance(int day) {
    const bool boundary = day % spec_.lease_days == 0;
    const bool first = !started_;
    started_ = true;
    const int n = spec_.subscribers;
    switch (spec_.regime) {
      case Regime::round_robin_pool: {
        const std::int64_t k = day / spec_.lease_days;
        for (int j = 0; j < n; ++j)
          offsets_[std::size_t(j)] = spec_.pool_offset + int((k * n + j) % spec_.pool);
        break;
      }
      case Regime::dynamic_24h_lease:
        if (first || boundary) {
          auto perm = shuffled(n);
          std::copy_n(perm.begin(), n, offsets_.begin());
        }
        break;
      case Regime::dynamic_long_lease:
        if (!first && boundary) {
          for (int j = 0; j < n; ++j) {
            const bool move = layout_.uniform() < spec_.move_p;
            if (move && !free_.empty()) std::swap(offsets_[std::size_t(j)], free_[layout_.below(free_.size())]);
          }
        }
        break;
      default:
        break;
    }
  }

private:
  /// Pool offsets with the first `count` positions drawn by a partial Fisher-Yates shuffle.
  std::vector<int> shuffled(int count) {
    std::vector<int> v(std::size_t(spec_.pool));
    std::iota(v.begin(), v.end(), spec_.pool_offset);
    for (int i = 0; i < count && i + 1 < spec_.pool; ++i) {
      const auto r = std::size_t(i) + layout_.below(std::uint64_t(spec_.pool - i));
      std::swap(v[std::size_t(i)], v[r]);
    }
    return v;
  }

  RegimeSpec spec_;
  std::uint32_t origin_;
  std::uint32_t id_;
  Rng layout_, activity_, ua_;
  std::vector<double> rate_;
  std::vector<int> offsets_;
  std::vector<int> free_;
  int heavy_ = 0;
  bool started_ = false;
};

/// Analytic expectations for one output block.
struct Acc {
  std::uint32_t block = 0;
  double cells = 0.0, cells_var = 0.0;
  std::vector<double> month, month_var;
  std::array<double, 256> q_prev{}, q_cur{};
  double up = 0.0, up_var = 0.0;
  Bits256 possible, certain, probe;
  double ua_samples = 0.0, ua_distinct = 0.0;
  std::vector<double> sub_samples;  // expected UA samples per (instance, subscriber)
  bool only_gateway = true, only_bot = true, any_slot = false;
};

struct GenRecord {
  std::uint32_t address;
  int day;
  std::uint32_t hits;
  bool gateway;
};

std::string ua_text(const Instance& inst, int j, std::uint64_t k) {
  switch (inst.spec().regime) {
    case Regime::gateway:
      return fmt::format("Mozilla/5.0 (Windows NT 10.0; Win64; x64, gw {:08x}-{}) \"build {}\"", inst.origin(), j, k);
    case Regime::bot:
      return fmt::format("ipact-bot/1.0 (+crawler {:08x}-{})", inst.origin(), j);
    default:
      return fmt::format("Mozilla/5.0 (X11; Linux x86_64, sub {:08x}-{}-{})", inst.origin(), j, k);
  }
}

std::string ptr_name(PtrPlan plan, std::uint32_t address) {
  const auto a = address;
  const auto body = fmt::format("{}-{}-{}-{}", a >> 24, (a >> 16) & 255, (a >> 8) & 255, a & 255);
  std::string name;
  switch (plan) {
    case PtrPlan::static_names: name = "host-static-" + body + ".example.net"; break;
    case PtrPlan::dynamic_names: name = "dynamic-" + body + ".isp.example"; break;
    case PtrPlan::pool_names: name = "pool-" + body + ".dsl.example"; break;
    case PtrPlan::generic_names: name = "host-" + body + ".example.net"; break;
    default: return {};
  }
  // some operators publish upper-case names
  if ((a & 255) % 3 == 0)
    for (auto& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return name;
}

PtrPlan resolve_ptr(PtrPlan plan, Regime r) {
  if (plan != PtrPlan::automatic) return plan;
  switch (r) {
    case Regime::static_sparse: return PtrPlan::static_names;
    case Regime::round_robin_pool:
    case Regime::dynamic_24h_lease: return PtrPlan::pool_names;
    case Regime::dynamic_long_lease: return PtrPlan::dynamic_names;
    default: return PtrPlan::none;
  }
}

const char* expected_tag(PtrPlan plan) {
  switch (plan) {
    case PtrPlan::static_names: return "static";
    case PtrPlan::dynamic_names:
    case PtrPlan::pool_names: return "dynamic";
    default: return "unknown";
  }
}

void put_params(std::map<std::string, double>& out, const RegimeSpec& s, const std::string& prefix) {
  out[prefix + "subscribers"] = s.subscribers;
  out[prefix + "pool"] = s.pool;
  out[prefix + "pool_offset"] = s.pool_offset;
  out[prefix + "lease_days"] = s.lease_days;
  out[prefix + "p_weekday"] = s.p_weekday;
  out[prefix + "p_weekend"] = s.p_weekend;
  if (s.regime == Regime::dynamic_long_lease) {
    out[prefix + "heavy_share"] = s.heavy_share;
    out[prefix + "light_p"] = s.light_p;
    out[prefix + "move_p"] = s.move_p;
  }
  out[prefix + "hits_mean"] = s.hits_mean;
  out[prefix + "hits_spread"] = s.hits_spread;
  out[prefix + "ua_per_subscriber"] = s.ua_per_subscriber;
  out[prefix + "ua_samples_per_day"] = s.ua_samples_per_day;
}

void finish_truth(const Acc& acc, const ScenarioSpec& spec, BlockTruth& bt, std::vector<Assertion>& out) {
  const double cells_total = 256.0 * spec.days;
  bt.block = acc.block;
  bt.expected_stu = acc.cells / cells_total;
  bt.stu_sigma = std::sqrt(acc.cells_var) / cells_total;
  bt.fd_min = acc.certain.count();
  bt.fd_max = acc.possible.count();
  bt.expected_daily_up = acc.up;
  bt.daily_up_sigma = std::sqrt(acc.up_var);
  const auto name = block_to_string(acc.block);

  out.push_back({name + ":fd", acc.block, "fd", 0.0, 0.0, double(bt.fd_min), double(bt.fd_max), {}});
  out.push_back({name + ":stu", acc.block, "stu", bt.expected_stu, 3.0 * bt.stu_sigma + 1e-12, 0, 0, {}});

  const double month_cells = 256.0 * spec.month_days;
  const std::size_t months = acc.month.size();
  bool decidable = months >= 2;
  bool major = false;
  double best = 0.0;
  for (std::size_t m = 0; m < months; ++m) bt.expected_monthly_stu.push_back(acc.month[m] / month_cells);
  for (std::size_t m = 0; m + 1 < months; ++m) {
    const double delta = bt.expected_monthly_stu[m + 1] - bt.expected_monthly_stu[m];
    const double sigma = std::sqrt(acc.month_var[m] + acc.month_var[m + 1]) / month_cells;
    if (std::fabs(delta) > std::fabs(best)) best = delta;
    if (std::fabs(std::fabs(delta) - spec.change_threshold) <= 3.0 * sigma + 0.01) decidable = false;
    major |= std::fabs(delta) > spec.change_threshold;
  }
  bt.expected_max_delta = best;
  if (decidable) {
    bt.expected_change_class = major ? "major" : "minor";
    out.push_back({name + ":change_class", acc.block, "change_class", 0, 0, 0, 0, bt.expected_change_class});
  }
  out.push_back({name + ":assignment_tag", acc.block, "assignment_tag", 0, 0, 0, 0, bt.expected_tag});
  out.push_back({name + ":daily_up", acc.block, "daily_up", acc.up, 3.0 * bt.daily_up_sigma + 1e-9, 0, 0, {}});

  if (acc.any_slot && (acc.only_gateway || acc.only_bot)) {
    const HostRegionRule rule;
    const double ratio = acc.ua_samples > 0 ? acc.ua_distinct / acc.ua_samples : 0.0;
    std::string label;
    bool clear = true;
    if (acc.ua_samples < double(rule.heavy_samples)) {
      label = "bulk";
      clear = acc.ua_samples < 0.8 * double(rule.heavy_samples);
    } else {
      label = ratio <= rule.automated_max_ratio ? "automated" : "gateway";
      clear = acc.ua_samples > 1.25 * double(rule.heavy_samples) &&
              std::fabs(ratio - rule.automated_max_ratio) > 0.25 * rule.automated_max_ratio;
    }
    if (clear) {
      bt.expected_host_region = label;
      out.push_back({name + ":host_region", acc.block, "host_region", 0, 0, 0, 0, label});
    }
  }
}

}  // namespace

Dataset generate(const ScenarioSpec& spec) {
  spec.check();
  Dataset data;
  const int T = spec.days;
  const int months = T / spec.month_days;

  std::vector<GenRecord> records;
  std::vector<std::tuple<int, std::uint32_t, std::uint32_t>> ua;  // (day, address, string id)
  std::unordered_map<std::uint64_t, std::uint32_t> ua_ids;
  std::vector<std::pair<std::uint32_t, std::string>> ptr;
  std::vector<std::uint32_t> probe;

  auto& truth = data.truth;
  truth.seed = spec.seed;
  truth.start = spec.start;
  truth.days = T;
  truth.drift = spec.drift;

  for (std::size_t pi = 0; pi < spec.blocks.size(); ++pi) {
    const BlockPlan& plan = spec.blocks[pi];
    const auto id = static_cast<std::uint32_t>(pi);
    Instance before(plan.regime, spec.seed, plan.block, 0, id * 2);
    std::optional<Instance> after;
    const bool realloc = plan.event && plan.event->kind == RenumberEvent::Kind::reallocation;
    const bool reconf = plan.event && plan.event->kind == RenumberEvent::Kind::reconfiguration;
    if (reconf) after.emplace(*plan.event->after, spec.seed, plan.block, 1, id * 2 + 1);
    const int event_day = plan.event ? plan.event->day : T;

    std::vector<Acc> accs(realloc ? 2 : 1);
    accs[0].block = plan.block;
    if (realloc) accs[1].block = plan.event->target;
    for (auto& a : accs) {
      a.month.assign(std::size_t(months), 0.0);
      a.month_var.assign(std::size_t(months), 0.0);
      a.sub_samples.assign(2 * 256, 0.0);
    }

    for (int d = 0; d < T; ++d) {
      const CivilDay cal = spec.start + d;
      Instance& inst = (reconf && d >= event_day) ? *after : before;
      const std::size_t out = (realloc && d >= event_day) ? 1 : 0;
      inst.advance(d);
      const auto& rs = inst.spec();
      Acc& acc = accs[out];
      for (auto& a : accs) a.q_cur.fill(0.0);
      acc.any_slot |= rs.subscribers > 0;
      acc.only_gateway &= rs.regime == Regime::gateway;
      acc.only_bot &= rs.regime == Regime::bot;

      for (int j = 0; j < rs.subscribers; ++j) {
        const int off = inst.offsets()[std::size_t(j)];
        const double p = inst.p(j, cal);
        const double u_active = inst.activity().uniform();
        const double u_hits = inst.activity().uniform();

        acc.q_cur[std::size_t(off)] = p;
        acc.cells += p;
        acc.cells_var += p * (1.0 - p);
        if (d / spec.month_days < months) {
          acc.month[std::size_t(d / spec.month_days)] += p;
          acc.month_var[std::size_t(d / spec.month_days)] += p * (1.0 - p);
        }
        if (p > 0.0) {
          acc.possible.set(unsigned(off));
          if (static_like(rs.regime) || off % 2 == 0) acc.probe.set(unsigned(off));
        }
        if (p >= 1.0) acc.certain.set(unsigned(off));
        acc.sub_samples[std::size_t((inst.id() & 1) * 256 + unsigned(j))] += p * rs.ua_samples_per_day;

        if (!(u_active < p)) continue;
        const double h = std::floor(inst.rate(j) * (0.5 + u_hits) + 0.5);
        const auto hits = static_cast<std::uint32_t>(std::clamp(h, 1.0, double(kMaxHits)));
        const std::uint32_t address = acc.block | unsigned(off);
        records.push_back({address, d, hits, rs.regime == Regime::gateway});
        for (int s = 0; s < rs.ua_samples_per_day; ++s) {
          const auto k = inst.ua().below(std::uint64_t(rs.ua_per_subscriber));
          const std::uint64_t key = std::uint64_t{inst.id()} << 40 | std::uint64_t(j) << 32 | k;
          auto [it, fresh] = ua_ids.try_emplace(key, static_cast<std::uint32_t>(data.ua_strings.size()));
          if (fresh) data.ua_strings.push_back(ua_text(inst, j, k));
          ua.emplace_back(d, address, it->second);
        }
      }

      for (auto& a : accs) {
        if (d > 0)
          for (std::size_t o = 0; o < 256; ++o) {
            const double r = a.q_cur[o] * (1.0 - a.q_prev[o]);
            a.up += r;
            a.up_var += r * (1.0 - r);
          }
        a.q_prev = a.q_cur;
      }
    }

    // expected distinct UA strings per subscriber: U * (1 - (1 - 1/U)^samples)
    auto distinct_for = [](const RegimeSpec& rs, const Acc& a, int phase) {
      double distinct = 0.0, samples = 0.0;
      const double u = rs.ua_per_subscriber;
      for (int j = 0; j < rs.subscribers; ++j) {
        const double s = a.sub_samples[std::size_t(phase * 256 + j)];
        samples += s;
        distinct += u * (1.0 - std::pow(1.0 - 1.0 / u, s));
      }
      return std::pair{distinct, samples};
    };
    for (auto& a : accs) {
      auto [dist, samp] = distinct_for(plan.regime, a, 0);
      a.ua_distinct = dist;
      a.ua_samples = samp;
      if (after) {
        auto [d2, s2] = distinct_for(after->spec(), a, 1);
        a.ua_distinct += d2;
        a.ua_samples += s2;
      }
    }

    const PtrPlan names = resolve_ptr(plan.ptr, plan.regime.regime);
    for (std::size_t k = 0; k < accs.size(); ++k) {
      auto& a = accs[k];
      if (a.any_slot) a.probe.set(1);
      for (unsigned o = 0; o < 256; ++o) {
        if (a.probe.test(o)) probe.push_back(a.block | o);
        if (names != PtrPlan::none) ptr.emplace_back(a.block | o, ptr_name(names, a.block | o));
      }
      BlockTruth bt;
      bt.regime = to_string(plan.regime.regime);
      if (after) bt.regime += std::string("->") + to_string(after->spec().regime);
      bt.role = k == 0 ? "primary" : "reallocation-target";
      bt.expected_tag = expected_tag(names);
      put_params(bt.params, plan.regime, "");
      if (after) put_params(bt.params, *plan.event->after, "after.");
      if (plan.event) bt.params["event_day"] = plan.event->day;
      finish_truth(a, spec, bt, truth.assertions);
      truth.blocks.push_back(std::move(bt));
    }
    if (plan.event)
      truth.events.push_back({realloc ? "reallocation" : "reconfiguration", plan.event->day, plan.block,
                              realloc ? std::optional<std::uint32_t>(plan.event->target) : std::nullopt});
  }

  if (spec.drift) {
    std::vector<double> gw(std::size_t(T), 0.0), other(std::size_t(T), 0.0);
    for (const auto& r : records) (r.gateway ? gw : other)[std::size_t(r.day)] += r.hits;
    std::vector<double> factor(std::size_t(T), 1.0);
    for (int d = 0; d < T; ++d) {
      const double share = spec.drift->from + (spec.drift->to - spec.drift->from) * (T > 1 ? double(d) / (T - 1) : 0.0);
      const auto i = std::size_t(d);
      if (gw[i] > 0 && other[i] > 0) factor[i] = share / (1.0 - share) * other[i] / gw[i];
    }
    for (auto& r : records)
      if (r.gateway)
        r.hits = static_cast<std::uint32_t>(std::clamp(std::floor(r.hits * factor[std::size_t(r.day)] + 0.5), 1.0,
                                                       double(kMaxHits)));
  }

  std::sort(records.begin(), records.end(),
            [](const GenRecord& a, const GenRecord& b) { return std::tie(a.day, a.address) < std::tie(b.day, b.address); });
  data.activity.reserve(records.size());
  for (const auto& r : records) data.activity.push_back({r.address, r.day, r.hits});
  std::sort(ua.begin(), ua.end());
  data.ua.reserve(ua.size());
  for (const auto& [d, a, s] : ua) data.ua.push_back({a, d, s});
  std::sort(ptr.begin(), ptr.end());
  data.ptr = std::move(ptr);
  std::sort(probe.begin(), probe.end());
  data.probe = std::move(probe);

  std::sort(truth.blocks.begin(), truth.blocks.end(),
            [](const BlockTruth& a, const BlockTruth& b) { return a.block < b.block; });
  std::stable_sort(truth.assertions.begin(), truth.assertions.end(),
                   [](const Assertion& a, const Assertion& b) { return a.block < b.block; });
  return data;
}

}  // namespace ipact::synth
