// SPDX-License-Identifier: Apache-2.0
#include "ipact/ua_samples.hpp"

#include <algorithm>
#include <unordered_map>

#include "ipact/error.hpp"

namespace ipact {

namespace {
const std::vector<UASampleSet::Sample> kNoSamples;

auto window_bounds(const std::vector<UASampleSet::Sample>& v, DayRange r) {
  auto lo = std::lower_bound(v.begin(), v.end(), UASampleSet::Sample{r.first, 0});
  auto hi = std::lower_bound(v.begin(), v.end(), UASampleSet::Sample{r.last + 1, 0});
  return std::pair{lo, hi};
}
}  // namespace

std::vector<std::uint32_t> UASampleSet::blocks() const {
  std::vector<std::uint32_t> out;
  out.reserve(per_block_.size());
  for (const auto& [b, _] : per_block_) out.push_back(b);
  return out;
}

const std::vector<UASampleSet::Sample>& UASampleSet::samples(std::uint32_t block) const noexcept {
  auto it = std::lower_bound(per_block_.begin(), per_block_.end(), block,
                             [](const auto& e, std::uint32_t b) { return e.first < b; });
  if (it == per_block_.end() || it->first != block) return kNoSamples;
  return it->second;
}

std::size_t UASampleSet::sample_count(std::uint32_t block, DayRange r) const {
  const auto& v = samples(block);
  auto [lo, hi] = window_bounds(v, r);
  return static_cast<std::size_t>(hi - lo);
}

std::size_t UASampleSet::distinct_count(std::uint32_t block, DayRange r) const {
  const auto& v = samples(block);
  auto [lo, hi] = window_bounds(v, r);
  std::vector<std::uint32_t> ids;
  ids.reserve(static_cast<std::size_t>(hi - lo));
  for (auto it = lo; it != hi; ++it) ids.push_back(it->ua);
  std::sort(ids.begin(), ids.end());
  return static_cast<std::size_t>(std::unique(ids.begin(), ids.end()) - ids.begin());
}

UASampleSet ingest_ua_samples(LineReader& lines, const IngestOptions& options) {
  struct Raw {
    std::uint32_t block;
    CivilDay day;
    std::uint32_t ua;
  };
  std::vector<Raw> raw;
  std::unordered_map<std::string, std::uint32_t> intern;
  UASampleSet out;
  std::vector<std::string> fields;
  std::string_view line;
  while (lines.next(line)) {
    auto fail = [&](const std::string& why) {
      if (options.mode == ParseMode::strict) throw ParseError(lines.name(), lines.line_number(), why);
      ++out.skipped_;
    };
    if (!split_csv_record(line, fields)) {
      fail("unbalanced quotes");
      continue;
    }
    if (fields.size() != 3) {
      fail("expected 3 fields");
      continue;
    }
    auto day = parse_iso_date(fields[0]);
    if (!day) {
      fail("bad date '" + fields[0] + "'");
      continue;
    }
    auto addr = parse_address(fields[1]);
    if (!addr) {
      fail("bad address '" + fields[1] + "'");
      continue;
    }
    auto [it, inserted] = intern.try_emplace(std::move(fields[2]), static_cast<std::uint32_t>(out.strings_.size()));
    if (inserted) out.strings_.push_back(it->first);
    raw.push_back({addr->block(), *day, it->second});
  }

  if (options.first_day) {
    out.first_day_ = *options.first_day;
  } else if (!raw.empty()) {
    out.first_day_ = std::min_element(raw.begin(), raw.end(), [](const Raw& a, const Raw& b) {
                       return a.day < b.day;
                     })->day;
  }
  int max_ordinal = -1;
  for (const auto& r : raw) {
    const int d = r.day - out.first_day_;
    if (d < 0 || (options.days && d >= *options.days))
      throw RangeError("user-agent sample dated " + to_iso(r.day) + " outside the declared range");
    max_ordinal = std::max(max_ordinal, d);
  }
  out.days_ = options.days ? *options.days : max_ordinal + 1;

  std::sort(raw.begin(), raw.end(), [&](const Raw& a, const Raw& b) {
    if (a.block != b.block) return a.block < b.block;
    if (a.day != b.day) return a.day < b.day;
    return a.ua < b.ua;
  });
  for (const auto& r : raw) {
    if (out.per_block_.empty() || out.per_block_.back().first != r.block) out.per_block_.push_back({r.block, {}});
    out.per_block_.back().second.push_back({r.day - out.first_day_, r.ua});
  }
  out.total_ = raw.size();
  return out;
}

UASampleSet ingest_ua_samples(const std::vector<std::string>& lines, const IngestOptions& options) {
  auto reader = LineReader::from_lines(lines);
  return ingest_ua_samples(reader, options);
}

}  // namespace ipact
