// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ipact/activity_store.hpp"
#include "ipact/block_metrics.hpp"
#include "ipact/churn.hpp"

namespace ipact::cli {

/// Raised for invalid option combinations that CLI11 cannot express; maps to the usage exit code.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Output directory whose files are all written atomically.
class OutputDir {
public:
  explicit OutputDir(std::filesystem::path root);
  const std::filesystem::path& root() const noexcept { return root_; }
  void write(const std::string& rel, std::string_view content);
  /// CSV with leading `# ` comment lines, a column line, then the rows.
  void write_csv(const std::string& rel, const std::vector<std::string>& comments, const std::string& columns,
                 std::string_view rows);
  /// Records a file that something else already wrote atomically under root().
  void adopt(const std::string& rel);
  const std::vector<std::string>& files() const noexcept { return files_; }

private:
  std::filesystem::path root_;
  std::vector<std::string> files_;
};

struct StoreInput {
  std::string store;
  std::string activity;
  std::string first_day;
  int days = 0;
  bool tolerant = false;
};
ActivityStore load_store(const StoreInput& in);

struct IngestArgs {
  StoreInput input;
};
struct ChurnArgs {
  StoreInput input;
  std::vector<int> windows{1, 2, 4, 7, 14, 28};
  int mask_floor = 8;
  std::string routing;
  std::uint64_t min_actives = 1000;
  std::string as_mapping = "per-window";
  int long_term_window = 28;
  bool no_events = false;
};
struct BlocksArgs {
  StoreInput input;
  std::string ptr;
  double change_threshold = ChangeClassifierConfig{}.threshold;
  int month_days = ChangeClassifierConfig{}.month_days;
  double tag_share = AssignmentConfig{}.consistency;
  int tag_min = AssignmentConfig{}.min_classified;
  int fd_floor = 250;
};
struct TrafficArgs {
  StoreInput input;
  std::string ua;
  int trend_window = 7;
  std::string daily_stat = "median";
};
struct DemographicsArgs {
  StoreInput input;
  std::string ua;
  std::string delegations;
};
struct CompareArgs {
  std::string a;
  std::string b;
  std::string granularity = "all";
  std::string routing;
  std::string first_day;
  std::string delegations;
};
struct SimulateArgs {
  std::string spec;
  std::optional<std::uint64_t> seed;
};
struct ValidateArgs {
  std::string truth;
  std::string results;
};
struct ReportArgs {
  std::string bundle;
};

void cmd_ingest(const IngestArgs& o, OutputDir& out);
void cmd_churn(const ChurnArgs& o, OutputDir& out);
void cmd_blocks(const BlocksArgs& o, OutputDir& out);
void cmd_traffic(const TrafficArgs& o, OutputDir& out);
void cmd_demographics(const DemographicsArgs& o, OutputDir& out);
void cmd_compare(const CompareArgs& o, OutputDir& out);
void cmd_simulate(const SimulateArgs& o, OutputDir& out);
/// Returns the number of failed assertions.
std::size_t cmd_validate(const ValidateArgs& o, OutputDir& out);
/// Returns the number of failed assertions of the embedded validation.
std::size_t cmd_report(const ReportArgs& o, OutputDir& out);

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

}  // namespace ipact::cli
