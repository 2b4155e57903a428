// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ipact/address.hpp"
#include "ipact/calendar.hpp"
#include "ipact/io.hpp"

namespace ipact {

/// Activity of the 256 addresses of one /24 over T days.
///
/// Active bits are stored row-major (one row of ceil(T/64) words per address). Hit counts
/// are stored only for active cells, in (address, day) order; a cell's slot is found by a
/// popcount rank over its row, so a lookup touches at most ceil(T/64) words.
class ActivityMatrix {
public:
  ActivityMatrix() = default;

  std::uint32_t block() const noexcept { return block_; }
  int days() const noexcept { return days_; }
  int words_per_row() const noexcept { return words_; }

  bool active(unsigned offset, int day) const noexcept {
    return (bits_[offset * words_ + unsigned(day >> 6)] >> (day & 63)) & 1u;
  }
  /// Request count for a cell; 0 when inactive.
  std::uint32_t hits(unsigned offset, int day) const noexcept;
  std::span<const std::uint64_t> row(unsigned offset) const noexcept {
    return {bits_.data() + offset * words_, static_cast<std::size_t>(words_)};
  }
  /// Hits of the active cells of one address, in day order.
  std::span<const std::uint32_t> row_hits(unsigned offset) const noexcept {
    return {hits_.data() + row_offset_[offset], row_offset_[offset + 1] - row_offset_[offset]};
  }

  int active_days(unsigned offset, DayRange r) const noexcept;
  bool any_active(unsigned offset, DayRange r) const noexcept { return active_days(offset, r) > 0; }
  /// Addresses with at least one active day in r.
  Bits256 active_addresses(DayRange r) const noexcept;
  /// Per-day active masks for the full day range (the transpose of the row layout).
  std::vector<Bits256> day_columns() const;
  /// Number of active (address, day) cells inside r.
  std::uint64_t active_cells(DayRange r) const noexcept;
  std::uint64_t active_cells() const noexcept { return hits_.size(); }
  std::uint64_t total_hits() const noexcept;
  std::uint64_t hits_in(unsigned offset, DayRange r) const noexcept;

  bool operator==(const ActivityMatrix&) const = default;

private:
  friend class StoreBuilder;
  friend class ActivityStore;

  std::uint32_t block_ = 0;
  int days_ = 0;
  int words_ = 0;
  std::vector<std::uint64_t> bits_;
  std::array<std::uint32_t, 257> row_offset_{};
  std::vector<std::uint32_t> hits_;
};

/// Data-quality counters carried by a store.
struct DataQuality {
  std::uint64_t records = 0;          ///< records accepted
  std::uint64_t skipped_lines = 0;    ///< malformed lines skipped in tolerant mode
  std::uint64_t saturated_cells = 0;  ///< cells whose hit sum hit the 32-bit ceiling

  bool operator==(const DataQuality&) const = default;
};

/// Sealed, immutable collection of per-/24 activity matrices over a fixed day range.
/// Blocks are kept in ascending prefix order; blocks without activity are absent.
class ActivityStore {
public:
  static constexpr std::uint32_t kFormatVersion = 1;

  CivilDay first_day() const noexcept { return first_day_; }
  int days() const noexcept { return days_; }
  DayRange day_range() const noexcept { return {0, days_ - 1}; }
  CivilDay calendar_day(int ordinal) const noexcept { return first_day_ + ordinal; }

  const std::vector<ActivityMatrix>& blocks() const noexcept { return blocks_; }
  const ActivityMatrix* find(std::uint32_t block) const noexcept;

  bool active(AddressId a, int day) const noexcept;
  std::uint32_t hits(AddressId a, int day) const noexcept;
  std::uint64_t total_hits() const noexcept;
  /// Active addresses on one day summed over all blocks.
  std::uint64_t daily_active_count(int day) const;
  const DataQuality& quality() const noexcept { return quality_; }

  /// Throws RangeError unless r lies inside the store's day range and first <= last.
  void check_range(DayRange r) const;

  std::string serialize() const;
  static ActivityStore deserialize(std::string_view bytes);
  void save(const std::filesystem::path& path) const;
  static ActivityStore load(const std::filesystem::path& path);

private:
  friend class StoreBuilder;
  void build_index();

  CivilDay first_day_{};
  int days_ = 0;
  std::vector<ActivityMatrix> blocks_;
  std::unordered_map<std::uint32_t, std::uint32_t> index_;
  DataQuality quality_;
};

/// Single-writer accumulator that produces a sealed ActivityStore.
/// The day range may be declared up front or inferred from the data at seal time.
class StoreBuilder {
public:
  StoreBuilder() = default;
  StoreBuilder(CivilDay first_day, int days) : first_day_(first_day), days_(days) {}
  StoreBuilder(std::optional<CivilDay> first_day, std::optional<int> days)
      : first_day_(first_day), days_(days) {}

  /// Adds hits for one (address, day). hits must be >= 1. Duplicates are summed.
  void add(AddressId a, CivilDay day, std::uint64_t hits);
  /// Same, addressing the day by ordinal relative to the declared first day.
  void add(AddressId a, int day_ordinal, std::uint64_t hits);
  void note_skipped_line() noexcept { ++skipped_; }
  /// Bounds checking for a record date; throws RangeError when outside the declared range.
  void check_day(CivilDay day) const;

  ActivityStore seal() &&;

private:
  struct Cell {
    std::uint64_t key;  // address << 32 | (day - epoch offset)
    std::uint64_t hits;
  };
  std::optional<CivilDay> first_day_;
  std::optional<int> days_;
  std::vector<Cell> cells_;
  std::uint64_t skipped_ = 0;
};

enum class ParseMode { strict, tolerant };

struct IngestOptions {
  std::optional<CivilDay> first_day;
  std::optional<int> days;
  ParseMode mode = ParseMode::strict;
};

/// Parses `YYYY-MM-DD,<dotted-quad>,<hits>` records into a sealed store.
/// Malformed lines raise ParseError (strict) or are counted and skipped (tolerant).
/// A date outside the declared range always raises RangeError.
ActivityStore ingest_activity(LineReader& lines, const IngestOptions& options = {});
ActivityStore ingest_activity(const std::vector<std::string>& lines, const IngestOptions& options = {});

/// Addresses with at least one active day in [day_lo, day_hi].
AddressSet active_set(const ActivityStore& store, int day_lo, int day_hi);
AddressSet active_set(const ActivityStore& store, DayRange r);

}  // namespace ipact
