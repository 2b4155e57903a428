// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace ipact {

/// A calendar day (UTC) as days since 1970-01-01.
struct CivilDay {
  int days_since_epoch = 0;

  constexpr auto operator<=>(const CivilDay&) const = default;
  constexpr CivilDay operator+(int n) const noexcept { return {days_since_epoch + n}; }
  constexpr int operator-(CivilDay other) const noexcept {
    return days_since_epoch - other.days_since_epoch;
  }
};

/// Parses strict "YYYY-MM-DD" and rejects impossible dates (2015-02-30).
std::optional<CivilDay> parse_iso_date(std::string_view text) noexcept;
std::string to_iso(CivilDay day);
/// 0 = Monday ... 6 = Sunday.
int iso_weekday_index(CivilDay day) noexcept;
inline bool is_weekend(CivilDay day) noexcept { return iso_weekday_index(day) >= 5; }

/// Inclusive range of day ordinals [first, last] relative to a dataset's first day.
struct DayRange {
  int first = 0;
  int last = 0;

  constexpr auto operator<=>(const DayRange&) const = default;
  constexpr int length() const noexcept { return last - first + 1; }
  constexpr bool contains(int d) const noexcept { return d >= first && d <= last; }
};

}  // namespace ipact
