// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include <fmt/format.h>

#include "ipact/churn.hpp"
#include "ipact/error.hpp"
#include "ipact/synth.hpp"

namespace ipact::synth {

AnalysisResults observe(const ActivityStore& store, const PtrRecordSet* ptrs, const UASampleSet* samples,
                        const BlockMetricsConfig& config) {
  AnalysisResults r;
  for (const auto& m : compute_block_metrics(store, ptrs, config)) {
    auto& o = r.blocks[m.block];
    o.fd = m.fd;
    o.stu = m.stu;
    if (m.max_delta_stu) o.change_class = to_string(m.change_class);
    if (ptrs) o.assignment_tag = to_string(m.assignment);
  }
  r.has_block_metrics = true;
  r.has_assignment_tags = ptrs != nullptr;
  if (samples) {
    for (const auto& h : host_density(store, *samples, store.day_range()))
      r.blocks[h.block].host_region = to_string(classify_host_region(h));
    r.has_host_density = true;
  }
  if (store.days() >= 1) {
    const WindowedActivity wa(store, make_windows(store.days(), 1));
    for (const auto& c : block_churn(wa)) r.blocks[c.block].daily_up = c.up;
    r.has_daily_churn = true;
  }
  return r;
}

std::size_t ValidationReport::failures() const noexcept {
  std::size_t n = 0;
  for (const auto& r : results) n += r.pass ? 0 : 1;
  return n;
}

ValidationReport validate(const GroundTruth& truth, const AnalysisResults& results) {
  ValidationReport report;
  static const BlockObservation kNone;
  for (const auto& a : truth.assertions) {
    auto it = results.blocks.find(a.block);
    // a block absent from every output had no activity at all
    const BlockObservation& o = it == results.blocks.end() ? kNone : it->second;
    const bool silent = it == results.blocks.end();
    AssertionResult r{a, {}, false};
    auto need = [&](bool present, const char* output) {
      if (!present) throw Error(fmt::format("assertion {} needs missing analysis output: {}", a.id, output));
    };
    auto numeric = [&](double measured) {
      r.measured = fmt::format("{}", measured);
      r.pass = std::fabs(measured - a.expected) <= a.tolerance;
    };
    auto label = [&](const std::optional<std::string>& measured) {
      r.measured = measured ? *measured : "absent";
      r.pass = measured && *measured == a.expected_label;
    };
    if (a.metric == "fd") {
      need(results.has_block_metrics, "block metrics");
      const int fd = o.fd.value_or(0);
      r.measured = fmt::format("{}", fd);
      r.pass = fd >= a.expected_min && fd <= a.expected_max;
    } else if (a.metric == "stu") {
      need(results.has_block_metrics, "block metrics");
      numeric(o.stu.value_or(0.0));
    } else if (a.metric == "change_class") {
      need(results.has_block_metrics, "block metrics");
      label(o.change_class);
    } else if (a.metric == "assignment_tag") {
      need(results.has_assignment_tags, "block metrics with PTR records");
      label(silent ? std::optional<std::string>("unknown") : o.assignment_tag);
    } else if (a.metric == "daily_up") {
      need(results.has_daily_churn, "daily block churn");
      numeric(double(o.daily_up.value_or(0)));
    } else if (a.metric == "host_region") {
      need(results.has_host_density, "host density");
      label(o.host_region);
    } else {
      throw Error("unknown assertion metric " + a.metric);
    }
    report.results.push_back(std::move(r));
  }
  return report;
}

}  // namespace ipact::synth
