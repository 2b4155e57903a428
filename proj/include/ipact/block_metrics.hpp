// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ipact/activity_store.hpp"

namespace ipact {

enum class ChangeClass : std::uint8_t { minor, major };
enum class AssignmentTag : std::uint8_t { unknown, static_assignment, dynamic_assignment };

const char* to_string(ChangeClass c) noexcept;
const char* to_string(AssignmentTag t) noexcept;

struct ChangeClassifierConfig {
  double threshold = 0.25;  ///< major iff |max delta STU| > threshold
  int month_days = 28;
};

struct AssignmentConfig {
  double consistency = 0.90;  ///< share of classified addresses a class must cover
  int min_classified = 16;    ///< classified addresses needed before a block is tagged
};

/// Filling degree: addresses of the block active on at least one day of the window.
int filling_degree(const ActivityMatrix& m, DayRange window);
/// Active address-days in the window (exact integer numerator of STU).
std::uint64_t active_address_days(const ActivityMatrix& m, DayRange window);
/// Spatio-temporal utilization: active address-days / (256 * window length).
double stu(const ActivityMatrix& m, DayRange window);

struct ChangeResult {
  std::vector<double> monthly_stu;
  double max_delta = 0.0;  ///< signed month-over-month difference of largest magnitude
  ChangeClass change_class = ChangeClass::minor;
};
/// Months are consecutive month_days-day spans from day 0; a trailing partial month is dropped.
/// Throws Error when fewer than two complete months fit.
ChangeResult detect_change(const ActivityMatrix& m, const ChangeClassifierConfig& config = {});

/// Reverse-DNS names per address, lower-cased. Duplicate addresses with different names keep
/// the lexicographically smallest name so that file order never matters.
class PtrRecordSet {
public:
  void add(AddressId a, std::string name);
  const std::string* find(AddressId a) const noexcept;
  std::size_t size() const noexcept { return names_.size(); }
  std::size_t conflicts() const noexcept { return conflicts_; }
  /// Addresses with names inside one /24, ascending by offset.
  std::vector<std::pair<unsigned, const std::string*>> block_names(std::uint32_t block) const;

private:
  std::unordered_map<std::uint32_t, std::string> names_;
  std::unordered_map<std::uint32_t, std::vector<unsigned>> by_block_;
  std::size_t conflicts_ = 0;
};

/// Parses `<dotted-quad>,<ptr-name>` lines.
PtrRecordSet load_ptr_records(LineReader& lines);

enum class NameClass : std::uint8_t { none, static_name, dynamic_name, conflicting };
/// Substring match on the lower-cased name: "static" -> static; "dynamic" or "pool" -> dynamic.
NameClass classify_name(std::string_view name) noexcept;

struct AssignmentCounts {
  int static_names = 0;
  int dynamic_names = 0;
  int conflicting = 0;
  int classified() const noexcept { return static_names + dynamic_names + conflicting; }
};
AssignmentCounts count_assignment_names(std::uint32_t block, const PtrRecordSet& ptrs);
AssignmentTag classify_assignment(std::uint32_t block, const PtrRecordSet& ptrs, const AssignmentConfig& config = {});

struct BlockMetrics {
  std::uint32_t block = 0;
  int fd = 0;
  std::uint64_t active_cells = 0;
  int days = 0;
  double stu = 0.0;
  std::vector<double> monthly_stu;
  std::optional<double> max_delta_stu;  ///< absent when fewer than two months fit
  ChangeClass change_class = ChangeClass::minor;
  AssignmentTag assignment = AssignmentTag::unknown;
};

struct BlockMetricsConfig {
  ChangeClassifierConfig change;
  AssignmentConfig assignment;
};

/// Metrics for every materialized block over the store's full day range, ascending block order.
std::vector<BlockMetrics> compute_block_metrics(const ActivityStore& store, const PtrRecordSet* ptrs = nullptr,
                                                const BlockMetricsConfig& config = {});

enum class TagSubset { all, static_only, dynamic_only };

struct FdDistribution {
  std::vector<std::pair<int, double>> cdf;  ///< (fd, cumulative fraction) at each distinct fd
  std::size_t blocks = 0;
  double share_below_64 = 0.0;
  double share_above_250 = 0.0;
  double at(int fd) const noexcept;  ///< cumulative fraction of blocks with FD <= fd
};
FdDistribution fd_distribution(const std::vector<BlockMetrics>& metrics, TagSubset subset = TagSubset::all);

/// STU histogram with 20 upper-inclusive bins of width 0.05 (0 folds into the first bin),
/// over blocks whose FD exceeds fd_floor.
struct StuHistogram {
  std::vector<std::uint64_t> counts = std::vector<std::uint64_t>(20, 0);
  std::uint64_t population = 0;
};
StuHistogram utilization_histogram(const std::vector<BlockMetrics>& metrics, int fd_floor = 250);
/// 1-based bin index k with value in ((k-1)/bins, k/bins]; 0 goes to bin 1.
int upper_inclusive_bin(double value, int bins) noexcept;

struct PotentialUtilization {
  std::size_t blocks = 0;
  double share_fd_below_64 = 0.0;
  std::size_t dynamic_blocks = 0;
  std::optional<double> dynamic_stu_above_80;  ///< absent when no block is tagged dynamic
  std::optional<double> dynamic_stu_below_60;
  std::optional<double> dynamic_stu_below_20;
  std::size_t static_blocks = 0;
  std::optional<double> static_fd_below_64;
};
PotentialUtilization potential_utilization_report(const std::vector<BlockMetrics>& metrics);

}  // namespace ipact
