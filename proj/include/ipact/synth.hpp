// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ipact/activity_store.hpp"
#include "ipact/address.hpp"
#include "ipact/block_metrics.hpp"
#include "ipact/calendar.hpp"
#include "ipact/traffic_hosts.hpp"
#include "ipact/ua_samples.hpp"

namespace ipact::synth {

/// Generator name and version written into every bundle. Bump the version whenever the
/// draw order below changes.
inline constexpr const char* kGeneratorName = "mt19937_64/ipact-synth";
inline constexpr int kGeneratorVersion = 1;

/// Seeded stream over std::mt19937_64 (whose output sequence is fixed by the standard).
/// Distributions are written out here because the std ones are implementation-defined.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  /// Independent stream for (seed, key, purpose).
  static Rng derive(std::uint64_t seed, std::uint64_t key, std::uint64_t purpose);

  std::uint64_t next() { return eng_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Uniform in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n);

private:
  std::mt19937_64 eng_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

enum class Regime { static_sparse, round_robin_pool, dynamic_long_lease, dynamic_24h_lease, gateway, bot };
const char* to_string(Regime r) noexcept;
std::optional<Regime> parse_regime(std::string_view s) noexcept;

struct RegimeSpec {
  Regime regime = Regime::static_sparse;
  int subscribers = 1;
  int pool = 256;        ///< pool size; the pool occupies offsets [pool_offset, pool_offset + pool)
  int pool_offset = 0;
  int lease_days = 1;
  double p_weekday = 1.0;
  double p_weekend = 1.0;
  /// dynamic_long_lease: share of heavy subscribers (weekday/weekend probabilities); the
  /// rest are light with probability light_p on every day.
  double heavy_share = 0.3;
  double light_p = 0.1;
  /// dynamic_long_lease: chance a subscriber moves to a free address at a lease boundary.
  double move_p = 0.5;
  /// Per-subscriber mean daily hits, drawn uniformly in hits_mean * [1 - spread, 1 + spread].
  double hits_mean = 20.0;
  double hits_spread = 0.5;
  int ua_per_subscriber = 2;
  int ua_samples_per_day = 1;

  /// Regime-specific defaults (gateway and bot traffic profiles).
  static RegimeSpec defaults(Regime r);
  /// Throws Error on inconsistent parameters.
  void check() const;
  double p_on(CivilDay day) const noexcept;
};

enum class PtrPlan { automatic, static_names, dynamic_names, pool_names, generic_names, none };

struct RenumberEvent {
  enum class Kind { reallocation, reconfiguration } kind = Kind::reallocation;
  int day = 0;
  std::uint32_t target = 0;          ///< reallocation: block receiving the subscribers
  std::optional<RegimeSpec> after;   ///< reconfiguration: regime from `day` on
};

struct BlockPlan {
  std::uint32_t block = 0;
  RegimeSpec regime;
  std::optional<RenumberEvent> event;
  PtrPlan ptr = PtrPlan::automatic;
};

struct RoutePlan {
  Prefix prefix;
  std::uint32_t asn = 0;
  int from = 0;
  int until = -1;  ///< exclusive; -1 = end of scenario
};

struct DelegationPlan {
  std::string registry;
  std::string country;
  Prefix prefix;
};

struct TrafficDrift {
  double from = 0.0;  ///< gateway share of daily hits on day 0
  double to = 0.0;    ///< ... and on the last day
};

struct ScenarioSpec {
  std::uint64_t seed = 0;
  CivilDay start{};
  int days = 0;
  std::vector<BlockPlan> blocks;
  /// Empty means one /24 route per block from default_asn.
  std::vector<RoutePlan> routes;
  std::uint32_t default_asn = 64500;
  std::vector<DelegationPlan> delegations;
  std::optional<TrafficDrift> drift;
  double change_threshold = ChangeClassifierConfig{}.threshold;
  int month_days = ChangeClassifierConfig{}.month_days;

  /// Throws Error for an invalid scenario.
  void check() const;
};

/// Parses the JSON scenario format (comments allowed). Throws ParseError / Error.
ScenarioSpec parse_scenario(std::string_view text, const std::string& source = "<scenario>");
ScenarioSpec load_scenario(const std::filesystem::path& path);

/// One ground-truth check against a single block.
struct Assertion {
  std::string id;
  std::uint32_t block = 0;
  std::string metric;  ///< fd | stu | change_class | assignment_tag | daily_up | host_region
  double expected = 0.0;
  double tolerance = 0.0;  ///< numeric metrics pass when |measured - expected| <= tolerance
  double expected_min = 0.0;  ///< fd only
  double expected_max = 0.0;
  std::string expected_label;  ///< categorical metrics
};

struct BlockTruth {
  std::uint32_t block = 0;
  std::string regime;
  std::string role;  ///< "primary" or "reallocation-target"
  double expected_stu = 0.0;
  double stu_sigma = 0.0;
  int fd_min = 0;
  int fd_max = 0;
  std::vector<double> expected_monthly_stu;
  double expected_max_delta = 0.0;
  std::string expected_change_class;
  std::string expected_tag;
  std::optional<std::string> expected_host_region;
  double expected_daily_up = 0.0;
  double daily_up_sigma = 0.0;
  std::map<std::string, double> params;
};

struct InjectedEvent {
  std::string kind;
  int day = 0;
  std::uint32_t block = 0;
  std::optional<std::uint32_t> target;
};

struct GroundTruth {
  std::uint64_t seed = 0;
  CivilDay start{};
  int days = 0;
  std::vector<BlockTruth> blocks;  ///< ascending by block
  std::vector<InjectedEvent> events;
  std::vector<Assertion> assertions;
  std::optional<TrafficDrift> drift;

  std::string to_json() const;
  static GroundTruth from_json(std::string_view text, const std::string& source = "<ground truth>");
};

struct ActivityRecord {
  std::uint32_t address = 0;
  int day = 0;
  std::uint32_t hits = 0;
};

struct UaRecord {
  std::uint32_t address = 0;
  int day = 0;
  std::uint32_t ua = 0;  ///< index into Dataset::ua_strings
};

/// Everything a scenario produces, in memory. Records are ordered by (day, address).
struct Dataset {
  std::vector<ActivityRecord> activity;
  std::vector<UaRecord> ua;
  std::vector<std::string> ua_strings;
  std::vector<std::pair<std::uint32_t, std::string>> ptr;  ///< ascending by address
  std::vector<std::uint32_t> probe;                        ///< addresses answering probes, ascending
  GroundTruth truth;
};

/// Throws Error on an invalid scenario. Same spec (including seed) gives an identical dataset.
Dataset generate(const ScenarioSpec& spec);

/// Builds a sealed store directly from the generated records over the scenario's day range.
ActivityStore to_store(const Dataset& data, const ScenarioSpec& spec);
UASampleSet to_samples(const Dataset& data, const ScenarioSpec& spec);
PtrRecordSet to_ptr_records(const Dataset& data);

/// Writes the bundle layout: activity.csv, ua.csv, routing/<date>/routes.csv, ptr.csv,
/// delegations.txt, probe.txt, ground_truth.json, manifest.json. Returns written paths,
/// relative to `dir`, in write order.
std::vector<std::string> write_bundle(const Dataset& data, const ScenarioSpec& spec, const std::filesystem::path& dir);

/// Per-block analysis results as read back for validation.
struct BlockObservation {
  std::optional<int> fd;
  std::optional<double> stu;
  std::optional<std::string> change_class;
  std::optional<std::string> assignment_tag;
  std::optional<std::string> host_region;
  std::optional<std::uint64_t> daily_up;
};

struct AnalysisResults {
  std::map<std::uint32_t, BlockObservation> blocks;
  bool has_block_metrics = false;
  bool has_assignment_tags = false;
  bool has_host_density = false;
  bool has_daily_churn = false;
};

/// Computes the observations in process from a store (and optional PTR / UA data).
AnalysisResults observe(const ActivityStore& store, const PtrRecordSet* ptrs, const UASampleSet* samples,
                        const BlockMetricsConfig& config = {});

struct AssertionResult {
  Assertion assertion;
  std::string measured;
  bool pass = false;
};

struct ValidationReport {
  std::vector<AssertionResult> results;
  std::size_t failures() const noexcept;
};

/// Throws Error when an assertion needs an analysis output that is missing.
ValidationReport validate(const GroundTruth& truth, const AnalysisResults& results);

}  // namespace ipact::synth
