// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ipact/activity_store.hpp"
#include "ipact/calendar.hpp"
#include "ipact/io.hpp"

namespace ipact {

/// Sampled User-Agent strings per (/24, day). Strings are opaque bytes compared exactly;
/// they are interned so that per-block samples are (day, string id) pairs.
class UASampleSet {
public:
  struct Sample {
    int day;
    std::uint32_t ua;
    auto operator<=>(const Sample&) const = default;
  };

  CivilDay first_day() const noexcept { return first_day_; }
  int days() const noexcept { return days_; }

  /// Blocks with at least one sample, ascending.
  std::vector<std::uint32_t> blocks() const;
  /// Samples of one block sorted by (day, string id); empty if none.
  const std::vector<Sample>& samples(std::uint32_t block) const noexcept;
  std::size_t sample_count(std::uint32_t block, DayRange r) const;
  std::size_t distinct_count(std::uint32_t block, DayRange r) const;
  std::size_t total_samples() const noexcept { return total_; }
  const std::string& string_of(std::uint32_t id) const { return strings_.at(id); }
  std::size_t skipped_lines() const noexcept { return skipped_; }

private:
  friend UASampleSet ingest_ua_samples(LineReader&, const IngestOptions&);
  CivilDay first_day_{};
  int days_ = 0;
  std::vector<std::pair<std::uint32_t, std::vector<Sample>>> per_block_;
  std::vector<std::string> strings_;
  std::size_t total_ = 0;
  std::size_t skipped_ = 0;
};

/// Parses `YYYY-MM-DD,<dotted-quad>,"<ua>"` records (RFC-4180 quoting).
/// Day ordinals are relative to options.first_day (or the earliest record when absent).
UASampleSet ingest_ua_samples(LineReader& lines, const IngestOptions& options = {});
UASampleSet ingest_ua_samples(const std::vector<std::string>& lines, const IngestOptions& options = {});

}  // namespace ipact
