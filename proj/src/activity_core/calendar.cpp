// SPDX-License-Identifier: Apache-2.0
#include "ipact/calendar.hpp"

#include <chrono>

#include <fmt/format.h>

namespace ipact {

namespace {

bool read_digits(std::string_view s, std::size_t pos, std::size_t n, int& out) noexcept {
  int v = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

}  // namespace

std::optional<CivilDay> parse_iso_date(std::string_view text) noexcept {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!read_digits(text, 0, 4, y) || !read_digits(text, 5, 2, m) || !read_digits(text, 8, 2, d))
    return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(m)},
                                        std::chrono::day{unsigned(d)}};
  if (!ymd.ok()) return std::nullopt;
  return CivilDay{static_cast<int>(std::chrono::sys_days{ymd}.time_since_epoch().count())};
}

std::string to_iso(CivilDay day) {
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{day.days_since_epoch}}};
  return fmt::format("{:04}-{:02}-{:02}", int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day()));
}

int iso_weekday_index(CivilDay day) noexcept {
  const std::chrono::weekday wd{std::chrono::sys_days{std::chrono::days{day.days_since_epoch}}};
  return static_cast<int>(wd.iso_encoding()) - 1;
}

}  // namespace ipact
