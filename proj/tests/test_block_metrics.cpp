// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <random>

#include <fmt/format.h>

#include "ipact/block_metrics.hpp"
#include "ipact/error.hpp"
#include "support.hpp"

using namespace ipact;
using namespace ipact::test;

namespace {

const ActivityMatrix& only_block(const ActivityStore& s) {
  REQUIRE(s.blocks().size() == 1);
  return s.blocks()[0];
}

/// Addresses [0, n) of 10.0.0.0/24 active on every day in [lo, hi].
std::vector<Rec> fill(std::uint32_t n, int lo, int hi, std::uint32_t base = ip("10.0.0.0")) {
  std::vector<Rec> r;
  for (int d = lo; d <= hi; ++d)
    for (std::uint32_t o = 0; o < n; ++o) r.push_back({base + o, d, 1});
  return r;
}

PtrRecordSet names(const char* pattern, int n, std::uint32_t base = ip("10.0.0.0")) {
  PtrRecordSet p;
  for (int i = 0; i < n; ++i) p.add(AddressId{base + std::uint32_t(i)}, fmt::format(fmt::runtime(pattern), i));
  return p;
}

}  // namespace

TEST_SUITE("block_metrics") {

TEST_CASE("filling degree") {
  const auto s = make_store({{ip("10.0.0.5"), 40, 1}}, 112);
  CHECK(filling_degree(only_block(s), s.day_range()) == 1);
  CHECK(filling_degree(only_block(s), {0, 39}) == 0);

  // round robin over the full /24, 46 per day
  std::vector<Rec> rr;
  for (int d = 0; d < 6; ++d)
    for (int j = 0; j < 46; ++j) rr.push_back({ip("10.0.0.0") + std::uint32_t((d * 46 + j) % 256), d, 1});
  const auto r = make_store(rr, 6);
  CHECK(filling_degree(only_block(r), r.day_range()) == 256);
}

TEST_CASE("stu") {
  const auto full = make_store(fill(256, 0, 111), 112);
  CHECK(stu(only_block(full), full.day_range()) == 1.0);
  const auto one = make_store({{ip("10.0.0.1"), 0, 1}}, 112);
  CHECK(stu(only_block(one), one.day_range()) == 1.0 / 28672);
  const auto fifty_one = make_store(fill(51, 0, 111), 112);
  CHECK(stu(only_block(fifty_one), fifty_one.day_range()) == doctest::Approx(0.1992).epsilon(1e-3));
  CHECK(stu(only_block(fifty_one), fifty_one.day_range()) == 51.0 / 256);
}

TEST_CASE("stu is an exact ratio of integer counts") {
  const auto s = make_store(random_records(12, ip("10.0.0.0"), 20, 112), 112);
  for (const auto& m : s.blocks()) {
    const auto cells = active_address_days(m, s.day_range());
    CHECK(stu(m, s.day_range()) == double(cells) / (256.0 * 112));
    CHECK(cells == m.active_cells());
    // an address-day needs an active address
    CHECK(filling_degree(m, s.day_range()) >= int(std::ceil(stu(m, s.day_range()) * 256 - 1e-9)));
  }
}

TEST_CASE("change detection") {
  const auto constant = make_store(fill(100, 0, 111), 112);
  auto c = detect_change(only_block(constant));
  CHECK(c.max_delta == 0.0);
  CHECK(c.change_class == ChangeClass::minor);
  CHECK(c.monthly_stu.size() == 4);

  const auto dark = make_store(fill(256, 0, 27), 56);
  c = detect_change(only_block(dark));
  CHECK(c.max_delta == -1.0);
  CHECK(c.change_class == ChangeClass::major);

  // exactly 0.25 stays minor
  auto recs = fill(1, 0, 0);
  auto more = fill(64, 28, 55);
  recs.insert(recs.end(), more.begin(), more.end());
  const auto edge = make_store(recs, 56);
  c = detect_change(only_block(edge));
  CHECK(c.monthly_stu[1] - c.monthly_stu[0] == doctest::Approx(0.25 - 1.0 / 7168));
  const auto exact = make_store(fill(64, 28, 55), 56, day0());
  const auto* m = exact.find(ip("10.0.0.0"));
  REQUIRE(m);
  c = detect_change(*m);
  CHECK(c.max_delta == 0.25);
  CHECK(c.change_class == ChangeClass::minor);

  const auto short_store = make_store(fill(3, 0, 40), 41);
  CHECK_THROWS_AS(detect_change(only_block(short_store)), Error);
  // trailing partial month dropped
  const auto tail = make_store(fill(3, 0, 60), 61);
  CHECK(detect_change(only_block(tail)).monthly_stu.size() == 2);
}

TEST_CASE("change is unchanged by appending a duplicate month") {
  auto recs = random_records(41, ip("10.0.0.0"), 1, 84);
  const auto base = make_store(recs, 84);
  const auto before = detect_change(only_block(base));
  for (const auto& r : std::vector<Rec>(recs))
    if (r.day >= 56) recs.push_back({r.addr, r.day + 28, r.hits});
  const auto longer = make_store(recs, 112);
  const auto after = detect_change(only_block(longer));
  CHECK(after.max_delta == before.max_delta);
  CHECK(after.monthly_stu[3] == after.monthly_stu[2]);
}

TEST_CASE("adding cells never lowers fd or stu") {
  auto recs = random_records(43, ip("10.0.0.0"), 1, 30);
  std::mt19937_64 rng(1);
  auto prev = make_store(recs, 30);
  for (int i = 0; i < 30; ++i) {
    recs.push_back({ip("10.0.0.0") + std::uint32_t(rng() % 256), int(rng() % 30), 1});
    const auto next = make_store(recs, 30);
    CHECK(filling_degree(only_block(next), next.day_range()) >= filling_degree(only_block(prev), prev.day_range()));
    CHECK(stu(only_block(next), next.day_range()) >= stu(only_block(prev), prev.day_range()));
    prev = next;
  }
}

TEST_CASE("name classes") {
  CHECK(classify_name("host-static-7.example.net") == NameClass::static_name);
  CHECK(classify_name("HOST-STATIC-7.EXAMPLE.NET") == NameClass::static_name);
  CHECK(classify_name("pool-12-34.example.net") == NameClass::dynamic_name);
  CHECK(classify_name("dynamic-1.isp.example") == NameClass::dynamic_name);
  CHECK(classify_name("dyn-1.isp.example") == NameClass::none);
  CHECK(classify_name("static-pool.example") == NameClass::conflicting);
}

TEST_CASE("assignment tags") {
  const auto b = ip("10.0.0.0");
  CHECK(classify_assignment(b, names("host-static-{}.example.net", 200)) == AssignmentTag::static_assignment);
  CHECK(classify_assignment(b, names("pool-12-{}.example.net", 180)) == AssignmentTag::dynamic_assignment);
  CHECK(classify_assignment(b, names("host-static-{}.example.net", 10)) == AssignmentTag::unknown);
  CHECK(classify_assignment(b, names("host-static-{}.example.net", 16)) == AssignmentTag::static_assignment);

  // 89% static is below the consistency share
  PtrRecordSet mixed = names("host-static-{}.example.net", 89);
  for (int i = 89; i < 100; ++i) mixed.add(AddressId{b + std::uint32_t(i)}, "dynamic-x.example");
  CHECK(classify_assignment(b, mixed) == AssignmentTag::unknown);
  PtrRecordSet ninety = names("host-static-{}.example.net", 90);
  for (int i = 90; i < 100; ++i) ninety.add(AddressId{b + std::uint32_t(i)}, "dynamic-x.example");
  CHECK(classify_assignment(b, ninety) == AssignmentTag::static_assignment);
  // unclassified names do not count
  PtrRecordSet plain = names("host-static-{}.example.net", 20);
  for (int i = 20; i < 250; ++i) plain.add(AddressId{b + std::uint32_t(i)}, "host.example");
  CHECK(classify_assignment(b, plain) == AssignmentTag::static_assignment);
}

TEST_CASE("ptr file order never matters") {
  std::vector<std::string> lines;
  for (int i = 0; i < 256; ++i) lines.push_back(fmt::format("10.0.0.{},{}-{}.Example.net", i, i % 7 ? "pool" : "static", i));
  lines.push_back("10.0.0.3,host-static.example");  // duplicate address with a second name
  auto load = [](const std::vector<std::string>& l) {
    auto r = LineReader::from_lines(l);
    return load_ptr_records(r);
  };
  const auto ref = load(lines);
  const auto ref_tag = classify_assignment(ip("10.0.0.0"), ref);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(lines.begin(), lines.end(), rng);
    const auto p = load(lines);
    CHECK(classify_assignment(ip("10.0.0.0"), p) == ref_tag);
    CHECK(*p.find(AddressId{ip("10.0.0.3")}) == *ref.find(AddressId{ip("10.0.0.3")}));
    CHECK(p.conflicts() == 1);
  }
}

TEST_CASE("fd distribution") {
  std::vector<BlockMetrics> m(2);
  m[0].fd = 10;
  m[1].fd = 250;
  auto d = fd_distribution(m);
  CHECK(d.at(64) == 0.5);
  CHECK(d.share_below_64 == 0.5);
  CHECK(d.share_above_250 == 0.0);
  for (auto& x : m) x.fd = 256;
  d = fd_distribution(m);
  REQUIRE(d.cdf.size() == 1);
  CHECK(d.cdf[0] == std::pair<int, double>{256, 1.0});
  CHECK(d.at(255) == 0.0);
  CHECK(fd_distribution(m, TagSubset::static_only).cdf.empty());
}

TEST_CASE("fd cut points follow the population mix") {
  // 30% sparse, 50% full, 20% in between
  std::vector<BlockMetrics> m(100);
  for (int i = 0; i < 100; ++i) m[std::size_t(i)].fd = i < 30 ? 29 : i < 80 ? 256 : 128;
  const auto d = fd_distribution(m);
  CHECK(d.share_below_64 == doctest::Approx(0.30).epsilon(0.01));
  CHECK(d.share_above_250 == doctest::Approx(0.50).epsilon(0.01));
}

TEST_CASE("utilization histogram") {
  CHECK(upper_inclusive_bin(0.0, 20) == 1);
  CHECK(upper_inclusive_bin(0.05, 20) == 1);
  CHECK(upper_inclusive_bin(0.0500001, 20) == 2);
  CHECK(upper_inclusive_bin(1.0, 20) == 20);

  std::vector<BlockMetrics> m(3);
  m[0].fd = 256;
  m[0].stu = 1.0;
  m[1].fd = 251;
  m[1].stu = 0.199;
  m[2].fd = 250;  // not above the floor
  m[2].stu = 0.75;
  const auto h = utilization_histogram(m);
  CHECK(h.population == 2);
  CHECK(h.counts[19] == 1);
  CHECK(h.counts[3] == 1);
}

TEST_CASE("block metrics over a store") {
  auto recs = fill(192, 0, 111);
  auto sparse = fill(29, 0, 111, ip("10.0.1.0"));
  recs.insert(recs.end(), sparse.begin(), sparse.end());
  const auto s = make_store(recs, 112);
  PtrRecordSet p = names("dynamic-{}.isp.example", 256);
  for (int i = 0; i < 256; ++i) p.add(AddressId{ip("10.0.1.0") + std::uint32_t(i)}, fmt::format("host-static-{}.example", i));
  const auto m = compute_block_metrics(s, &p);
  REQUIRE(m.size() == 2);
  CHECK(m[0].stu == 0.75);
  CHECK(m[0].assignment == AssignmentTag::dynamic_assignment);
  CHECK(m[1].fd == 29);
  CHECK(m[1].assignment == AssignmentTag::static_assignment);
  REQUIRE(m[1].max_delta_stu);

  const auto rep = potential_utilization_report(m);
  CHECK(rep.share_fd_below_64 == 0.5);
  CHECK(rep.dynamic_blocks == 1);
  CHECK(rep.dynamic_stu_above_80 == 0.0);
  CHECK(rep.dynamic_stu_below_60 == 0.0);
  CHECK(rep.static_fd_below_64 == 1.0);

  const auto no_tags = potential_utilization_report(compute_block_metrics(s));
  CHECK_FALSE(no_tags.dynamic_stu_above_80);
  CHECK_FALSE(no_tags.static_fd_below_64);
}

TEST_CASE("potential utilization shares of dynamic pools") {
  // a third of the dynamic pools are below 0.2
  std::vector<BlockMetrics> m(90);
  for (int i = 0; i < 90; ++i) {
    m[std::size_t(i)].assignment = AssignmentTag::dynamic_assignment;
    m[std::size_t(i)].fd = 256;
    m[std::size_t(i)].stu = i < 30 ? 0.1 : 0.9;
  }
  const auto rep = potential_utilization_report(m);
  CHECK(*rep.dynamic_stu_below_20 == doctest::Approx(1.0 / 3).epsilon(0.02));
  CHECK(*rep.dynamic_stu_above_80 == doctest::Approx(2.0 / 3));
  std::vector<BlockMetrics> sparse(5);
  for (auto& x : sparse) x.fd = 10;
  CHECK(potential_utilization_report(sparse).share_fd_below_64 == 1.0);
}

}  // TEST_SUITE
