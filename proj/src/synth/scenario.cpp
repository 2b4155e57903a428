// SPDX-License-Identifier: Apache-2.0
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "ipact/error.hpp"
#include "ipact/io.hpp"
#include "ipact/synth.hpp"

namespace ipact::synth {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng Rng::derive(std::uint64_t seed, std::uint64_t key, std::uint64_t purpose) {
  return Rng(splitmix64(splitmix64(splitmix64(seed) ^ key) ^ purpose));
}

std::uint64_t Rng::below(std::uint64_t n) {
  // rejection keeps the draw exactly uniform
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  for (;;) {
    const auto x = next();
    if (x < limit) return x % n;
  }
}

const char* to_string(Regime r) noexcept {
  switch (r) {
    case Regime::static_sparse: return "static_sparse";
    case Regime::round_robin_pool: return "round_robin_pool";
    case Regime::dynamic_long_lease: return "dynamic_long_lease";
    case Regime::dynamic_24h_lease: return "dynamic_24h_lease";
    case Regime::gateway: return "gateway";
    case Regime::bot: return "bot";
  }
  return "?";
}

std::optional<Regime> parse_regime(std::string_view s) noexcept {
  for (auto r : {Regime::static_sparse, Regime::round_robin_pool, Regime::dynamic_long_lease,
                 Regime::dynamic_24h_lease, Regime::gateway, Regime::bot})
    if (s == to_string(r)) return r;
  return std::nullopt;
}

RegimeSpec RegimeSpec::defaults(Regime r) {
  RegimeSpec s;
  s.regime = r;
  if (r == Regime::gateway || r == Regime::bot) {
    s.hits_mean = 20000.0;
    s.hits_spread = 0.1;
    s.ua_samples_per_day = 40;
    s.ua_per_subscriber = r == Regime::gateway ? 500 : 1;
  }
  return s;
}

double RegimeSpec::p_on(CivilDay day) const noexcept { return is_weekend(day) ? p_weekend : p_weekday; }

namespace {

bool is_prob(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void RegimeSpec::check() const {
  const char* name = to_string(regime);
  if (pool < 1 || pool > 256) throw Error(fmt::format("{}: pool must be in [1, 256], got {}", name, pool));
  if (pool_offset < 0 || pool_offset + pool > 256)
    throw Error(fmt::format("{}: pool_offset + pool exceeds the /24", name));
  if (subscribers < 0) throw Error(fmt::format("{}: negative subscriber count", name));
  if (subscribers > pool)
    throw Error(fmt::format("{}: {} subscribers do not fit a pool of {}", name, subscribers, pool));
  if (lease_days < 1) throw Error(fmt::format("{}: lease_days must be >= 1", name));
  for (double p : {p_weekday, p_weekend, heavy_share, light_p, move_p})
    if (!is_prob(p)) throw Error(fmt::format("{}: probability {} outside [0, 1]", name, p));
  if (!(hits_mean >= 1.0 && hits_mean <= 1e9)) throw Error(fmt::format("{}: hits_mean must be in [1, 1e9]", name));
  if (!(hits_spread >= 0.0 && hits_spread < 1.0)) throw Error(fmt::format("{}: hits_spread must be in [0, 1)", name));
  if (ua_per_subscriber < 1) throw Error(fmt::format("{}: ua_per_subscriber must be >= 1", name));
  if (ua_samples_per_day < 0) throw Error(fmt::format("{}: negative ua_samples_per_day", name));
  if (regime == Regime::bot && ua_per_subscriber != 1) throw Error("bot: exactly one UA string per address");
}

void ScenarioSpec::check() const {
  if (days < 1) throw Error("scenario needs at least one day");
  if (!(change_threshold > 0.0 && change_threshold < 1.0)) throw Error("change_threshold must be in (0, 1)");
  if (month_days < 1) throw Error("month_days must be >= 1");
  std::set<std::uint32_t> used;
  bool gateways = false;
  for (const auto& b : blocks) {
    b.regime.check();
    gateways |= b.regime.regime == Regime::gateway;
    if (!used.insert(b.block).second) throw Error("block listed twice: " + block_to_string(b.block));
    if (b.event) {
      if (b.event->day <= 0 || b.event->day >= days)
        throw Error(fmt::format("{}: event day {} outside (0, {})", block_to_string(b.block), b.event->day, days));
      if (b.event->kind == RenumberEvent::Kind::reconfiguration) {
        if (!b.event->after) throw Error(block_to_string(b.block) + ": reconfiguration without an `after` regime");
        b.event->after->check();
        gateways |= b.event->after->regime == Regime::gateway;
      }
    }
  }
  for (const auto& b : blocks)
    if (b.event && b.event->kind == RenumberEvent::Kind::reallocation &&
        !used.insert(b.event->target).second)
      throw Error("reallocation target already in use: " + block_to_string(b.event->target));
  for (const auto& r : routes) {
    if (r.asn == 0) throw Error("route with AS0");
    if (r.from < 0 || (r.until >= 0 && r.until < r.from)) throw Error("route with an empty or negative day span");
  }
  if (drift) {
    if (!(drift->from > 0.0 && drift->from < 1.0 && drift->to > 0.0 && drift->to < 1.0))
      throw Error("traffic drift shares must be in (0, 1)");
    if (!gateways) throw Error("traffic drift needs at least one gateway block");
  }
}

// ---------------------------------------------------------------------------

namespace {

struct Ctx {
  const std::string& source;
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source, 0, what); }
};

void check_keys(const json& j, std::initializer_list<const char*> allowed, const Ctx& ctx, const char* where) {
  if (!j.is_object()) ctx.fail(fmt::format("{} must be an object", where));
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok |= k == a;
    if (!ok) ctx.fail(fmt::format("unknown key `{}` in {}", k, where));
  }
}

template <typename T>
T get(const json& j, const char* key, T fallback, const Ctx& ctx) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    ctx.fail(fmt::format("bad value for `{}`", key));
  }
}

std::uint32_t block_of(const std::string& text, const Ctx& ctx) {
  std::string_view s = text;
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    if (s.substr(slash) != "/24") ctx.fail("blocks are /24 prefixes: " + text);
    s = s.substr(0, slash);
  }
  auto a = parse_address(s);
  if (!a || a->offset() != 0) ctx.fail("bad /24 block: " + text);
  return a->value;
}

Prefix prefix_of(const std::string& text, const Ctx& ctx) {
  auto p = parse_prefix(text);
  if (!p) ctx.fail("bad prefix: " + text);
  return *p;
}

RegimeSpec parse_regime_spec(const json& j, const Ctx& ctx) {
  check_keys(j,
             {"type", "subscribers", "pool", "pool_offset", "lease_days", "p", "p_weekday", "p_weekend",
              "heavy_share", "light_p", "move_p", "hits_mean", "hits_spread", "ua_per_subscriber",
              "ua_samples_per_day"},
             ctx, "regime");
  const auto type = get<std::string>(j, "type", "", ctx);
  auto r = parse_regime(type);
  if (!r) ctx.fail("unknown regime type `" + type + "`");
  RegimeSpec s = RegimeSpec::defaults(*r);
  s.subscribers = get(j, "subscribers", s.subscribers, ctx);
  s.pool = get(j, "pool", s.pool, ctx);
  s.pool_offset = get(j, "pool_offset", s.pool_offset, ctx);
  s.lease_days = get(j, "lease_days", s.lease_days, ctx);
  s.p_weekday = s.p_weekend = get(j, "p", s.p_weekday, ctx);
  s.p_weekday = get(j, "p_weekday", s.p_weekday, ctx);
  s.p_weekend = get(j, "p_weekend", s.p_weekend, ctx);
  s.heavy_share = get(j, "heavy_share", s.heavy_share, ctx);
  s.light_p = get(j, "light_p", s.light_p, ctx);
  s.move_p = get(j, "move_p", s.move_p, ctx);
  s.hits_mean = get(j, "hits_mean", s.hits_mean, ctx);
  s.hits_spread = get(j, "hits_spread", s.hits_spread, ctx);
  s.ua_per_subscriber = get(j, "ua_per_subscriber", s.ua_per_subscriber, ctx);
  s.ua_samples_per_day = get(j, "ua_samples_per_day", s.ua_samples_per_day, ctx);
  return s;
}

PtrPlan parse_ptr_plan(const std::string& s, const Ctx& ctx) {
  if (s == "auto") return PtrPlan::automatic;
  if (s == "static") return PtrPlan::static_names;
  if (s == "dynamic") return PtrPlan::dynamic_names;
  if (s == "pool") return PtrPlan::pool_names;
  if (s == "generic") return PtrPlan::generic_names;
  if (s == "none") return PtrPlan::none;
  ctx.fail("unknown ptr plan `" + s + "`");
}

}  // namespace

ScenarioSpec parse_scenario(std::string_view text, const std::string& source) {
  const Ctx ctx{source};
  json root;
  try {
    root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    ctx.fail(e.what());
  }
  check_keys(root,
             {"seed", "start", "days", "blocks", "routes", "default_asn", "delegations", "traffic_drift",
              "change_threshold", "month_days"},
             ctx, "scenario");
  ScenarioSpec spec;
  spec.seed = get<std::uint64_t>(root, "seed", 0, ctx);
  const auto start = get<std::string>(root, "start", "2015-01-05", ctx);
  auto day = parse_iso_date(start);
  if (!day) ctx.fail("bad start date " + start);
  spec.start = *day;
  spec.days = get(root, "days", 0, ctx);
  spec.default_asn = get<std::uint32_t>(root, "default_asn", spec.default_asn, ctx);
  spec.change_threshold = get(root, "change_threshold", spec.change_threshold, ctx);
  spec.month_days = get(root, "month_days", spec.month_days, ctx);

  for (const auto& b : root.value("blocks", json::array())) {
    check_keys(b, {"block", "count", "regime", "event", "ptr"}, ctx, "block");
    const auto first = block_of(get<std::string>(b, "block", "", ctx), ctx);
    const int count = get(b, "count", 1, ctx);
    if (count < 1 || std::uint64_t{first} + (std::uint64_t(count - 1) << 8) > 0xFFFFFF00ULL)
      ctx.fail("bad block count");
    if (!b.contains("regime")) ctx.fail("block without regime");
    BlockPlan plan;
    plan.regime = parse_regime_spec(b["regime"], ctx);
    plan.ptr = parse_ptr_plan(get<std::string>(b, "ptr", "auto", ctx), ctx);
    if (b.contains("event")) {
      const auto& e = b["event"];
      check_keys(e, {"kind", "day", "to", "after"}, ctx, "event");
      RenumberEvent ev;
      const auto kind = get<std::string>(e, "kind", "", ctx);
      if (kind == "reallocation") {
        ev.kind = RenumberEvent::Kind::reallocation;
        ev.target = block_of(get<std::string>(e, "to", "", ctx), ctx);
      } else if (kind == "reconfiguration") {
        ev.kind = RenumberEvent::Kind::reconfiguration;
        if (!e.contains("after")) ctx.fail("reconfiguration without `after`");
        ev.after = parse_regime_spec(e["after"], ctx);
      } else {
        ctx.fail("unknown event kind `" + kind + "`");
      }
      ev.day = get(e, "day", 0, ctx);
      plan.event = ev;
    }
    for (int i = 0; i < count; ++i) {
      BlockPlan p = plan;
      p.block = first + (std::uint32_t(i) << 8);
      if (p.event && p.event->kind == RenumberEvent::Kind::reallocation) p.event->target += std::uint32_t(i) << 8;
      spec.blocks.push_back(std::move(p));
    }
  }
  for (const auto& r : root.value("routes", json::array())) {
    check_keys(r, {"prefix", "asn", "from", "until"}, ctx, "route");
    spec.routes.push_back({prefix_of(get<std::string>(r, "prefix", "", ctx), ctx), get<std::uint32_t>(r, "asn", 0, ctx),
                           get(r, "from", 0, ctx), get(r, "until", -1, ctx)});
  }
  for (const auto& d : root.value("delegations", json::array())) {
    check_keys(d, {"registry", "cc", "prefix"}, ctx, "delegation");
    spec.delegations.push_back({get<std::string>(d, "registry", "", ctx), get<std::string>(d, "cc", "ZZ", ctx),
                                prefix_of(get<std::string>(d, "prefix", "", ctx), ctx)});
  }
  if (root.contains("traffic_drift")) {
    const auto& d = root["traffic_drift"];
    check_keys(d, {"from", "to"}, ctx, "traffic_drift");
    spec.drift = TrafficDrift{get(d, "from", 0.0, ctx), get(d, "to", 0.0, ctx)};
  }
  spec.check();
  return spec;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_file(path), path.string());
}

}  // namespace ipact::synth
