// SPDX-License-Identifier: Apache-2.0
#include "ipact/block_metrics.hpp"

#include <algorithm>
#include <cmath>

#include "ipact/error.hpp"

namespace ipact {

const char* to_string(ChangeClass c) noexcept { return c == ChangeClass::major ? "major" : "minor"; }

const char* to_string(AssignmentTag t) noexcept {
  switch (t) {
    case AssignmentTag::static_assignment: return "static";
    case AssignmentTag::dynamic_assignment: return "dynamic";
    case AssignmentTag::unknown: break;
  }
  return "unknown";
}

int filling_degree(const ActivityMatrix& m, DayRange window) { return m.active_addresses(window).count(); }

std::uint64_t active_address_days(const ActivityMatrix& m, DayRange window) { return m.active_cells(window); }

double stu(const ActivityMatrix& m, DayRange window) {
  if (window.length() < 1) throw Error("window must cover at least one day");
  return double(m.active_cells(window)) / (256.0 * double(window.length()));
}

ChangeResult detect_change(const ActivityMatrix& m, const ChangeClassifierConfig& config) {
  if (config.month_days < 1) throw Error("month length must be >= 1");
  const int months = m.days() / config.month_days;
  if (months < 2) throw Error("change detection needs at least two complete months");
  const double capacity = 256.0 * double(config.month_days);
  std::vector<std::int64_t> cells;
  ChangeResult r;
  for (int k = 0; k < months; ++k) {
    const DayRange month{k * config.month_days, (k + 1) * config.month_days - 1};
    cells.push_back(static_cast<std::int64_t>(m.active_cells(month)));
    r.monthly_stu.push_back(double(cells.back()) / capacity);
  }
  std::int64_t best = 0;
  for (int k = 1; k < months; ++k) {
    const std::int64_t d = cells[static_cast<std::size_t>(k)] - cells[static_cast<std::size_t>(k - 1)];
    if (std::llabs(d) > std::llabs(best)) best = d;
  }
  r.max_delta = double(best) / capacity;
  r.change_class = std::fabs(r.max_delta) > config.threshold ? ChangeClass::major : ChangeClass::minor;
  return r;
}

// ---------------------------------------------------------------------------

void PtrRecordSet::add(AddressId a, std::string name) {
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  auto [it, inserted] = names_.try_emplace(a.value, std::move(name));
  if (inserted) {
    by_block_[a.block()].push_back(a.offset());
  } else if (it->second != name) {
    ++conflicts_;
    if (name < it->second) it->second = std::move(name);
  }
}

const std::string* PtrRecordSet::find(AddressId a) const noexcept {
  auto it = names_.find(a.value);
  return it == names_.end() ? nullptr : &it->second;
}

std::vector<std::pair<unsigned, const std::string*>> PtrRecordSet::block_names(std::uint32_t block) const {
  std::vector<std::pair<unsigned, const std::string*>> out;
  auto it = by_block_.find(block);
  if (it == by_block_.end()) return out;
  for (unsigned off : it->second) out.emplace_back(off, find(AddressId{block | off}));
  std::sort(out.begin(), out.end());
  return out;
}

PtrRecordSet load_ptr_records(LineReader& lines) {
  PtrRecordSet out;
  std::string_view line;
  while (lines.next(line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) throw ParseError(lines.name(), lines.line_number(), "expected <ip>,<name>");
    auto addr = parse_address(line.substr(0, comma));
    if (!addr) throw ParseError(lines.name(), lines.line_number(), "bad address");
    out.add(*addr, std::string(line.substr(comma + 1)));
  }
  return out;
}

NameClass classify_name(std::string_view name) noexcept {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  const bool is_static = lower.find("static") != std::string::npos;
  const bool is_dynamic = lower.find("dynamic") != std::string::npos || lower.find("pool") != std::string::npos;
  if (is_static && is_dynamic) return NameClass::conflicting;
  if (is_static) return NameClass::static_name;
  if (is_dynamic) return NameClass::dynamic_name;
  return NameClass::none;
}

AssignmentCounts count_assignment_names(std::uint32_t block, const PtrRecordSet& ptrs) {
  AssignmentCounts c;
  for (const auto& [off, name] : ptrs.block_names(block)) {
    switch (classify_name(*name)) {
      case NameClass::static_name: ++c.static_names; break;
      case NameClass::dynamic_name: ++c.dynamic_names; break;
      case NameClass::conflicting: ++c.conflicting; break;
      case NameClass::none: break;
    }
  }
  return c;
}

AssignmentTag classify_assignment(std::uint32_t block, const PtrRecordSet& ptrs, const AssignmentConfig& config) {
  const auto c = count_assignment_names(block, ptrs);
  const int n = c.classified();
  if (n < config.min_classified || n == 0) return AssignmentTag::unknown;
  if (double(c.static_names) >= config.consistency * double(n)) return AssignmentTag::static_assignment;
  if (double(c.dynamic_names) >= config.consistency * double(n)) return AssignmentTag::dynamic_assignment;
  return AssignmentTag::unknown;
}

// ---------------------------------------------------------------------------

std::vector<BlockMetrics> compute_block_metrics(const ActivityStore& store, const PtrRecordSet* ptrs,
                                                const BlockMetricsConfig& config) {
  std::vector<BlockMetrics> out;
  out.reserve(store.blocks().size());
  const DayRange full = store.day_range();
  for (const auto& m : store.blocks()) {
    BlockMetrics r;
    r.block = m.block();
    r.fd = filling_degree(m, full);
    r.active_cells = m.active_cells();
    r.days = store.days();
    r.stu = double(r.active_cells) / (256.0 * double(r.days));
    if (store.days() / config.change.month_days >= 2) {
      auto ch = detect_change(m, config.change);
      r.monthly_stu = std::move(ch.monthly_stu);
      r.max_delta_stu = ch.max_delta;
      r.change_class = ch.change_class;
    }
    if (ptrs != nullptr) r.assignment = classify_assignment(m.block(), *ptrs, config.assignment);
    out.push_back(std::move(r));
  }
  return out;
}

namespace {
bool in_subset(const BlockMetrics& b, TagSubset s) noexcept {
  switch (s) {
    case TagSubset::static_only: return b.assignment == AssignmentTag::static_assignment;
    case TagSubset::dynamic_only: return b.assignment == AssignmentTag::dynamic_assignment;
    case TagSubset::all: break;
  }
  return true;
}
}  // namespace

double FdDistribution::at(int fd) const noexcept {
  double v = 0.0;
  for (const auto& [x, f] : cdf) {
    if (x > fd) break;
    v = f;
  }
  return v;
}

FdDistribution fd_distribution(const std::vector<BlockMetrics>& metrics, TagSubset subset) {
  FdDistribution d;
  std::vector<int> counts(257, 0);
  for (const auto& b : metrics) {
    if (!in_subset(b, subset)) continue;
    ++counts[static_cast<std::size_t>(std::clamp(b.fd, 0, 256))];
    ++d.blocks;
  }
  if (d.blocks == 0) return d;
  std::size_t acc = 0, below64 = 0, above250 = 0;
  for (int fd = 0; fd <= 256; ++fd) {
    const auto c = static_cast<std::size_t>(counts[static_cast<std::size_t>(fd)]);
    if (c == 0) continue;
    acc += c;
    if (fd < 64) below64 += c;
    if (fd > 250) above250 += c;
    d.cdf.emplace_back(fd, double(acc) / double(d.blocks));
  }
  d.share_below_64 = double(below64) / double(d.blocks);
  d.share_above_250 = double(above250) / double(d.blocks);
  return d;
}

int upper_inclusive_bin(double value, int bins) noexcept {
  for (int k = 1; k < bins; ++k)
    if (value <= double(k) / double(bins)) return k;
  return bins;
}

StuHistogram utilization_histogram(const std::vector<BlockMetrics>& metrics, int fd_floor) {
  StuHistogram h;
  for (const auto& b : metrics) {
    if (b.fd <= fd_floor) continue;
    ++h.counts[static_cast<std::size_t>(upper_inclusive_bin(b.stu, 20) - 1)];
    ++h.population;
  }
  return h;
}

PotentialUtilization potential_utilization_report(const std::vector<BlockMetrics>& metrics) {
  PotentialUtilization p;
  p.blocks = metrics.size();
  std::size_t sparse = 0, dyn_hi = 0, dyn_60 = 0, dyn_20 = 0, static_sparse = 0;
  for (const auto& b : metrics) {
    if (b.fd < 64) ++sparse;
    if (b.assignment == AssignmentTag::dynamic_assignment) {
      ++p.dynamic_blocks;
      if (b.stu > 0.8) ++dyn_hi;
      if (b.stu < 0.6) ++dyn_60;
      if (b.stu < 0.2) ++dyn_20;
    } else if (b.assignment == AssignmentTag::static_assignment) {
      ++p.static_blocks;
      if (b.fd < 64) ++static_sparse;
    }
  }
  if (p.blocks > 0) p.share_fd_below_64 = double(sparse) / double(p.blocks);
  if (p.dynamic_blocks > 0) {
    const double n = double(p.dynamic_blocks);
    p.dynamic_stu_above_80 = double(dyn_hi) / n;
    p.dynamic_stu_below_60 = double(dyn_60) / n;
    p.dynamic_stu_below_20 = double(dyn_20) / n;
  }
  if (p.static_blocks > 0) p.static_fd_below_64 = double(static_sparse) / double(p.static_blocks);
  return p;
}

}  // namespace ipact
