// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>

#include "ipact/demographics.hpp"
#include "ipact/error.hpp"
#include "support.hpp"

using namespace ipact;
using namespace ipact::test;

namespace {

DelegationTable table_from(std::vector<std::string> lines) {
  auto r = LineReader::from_lines(lines);
  return load_delegations(r);
}

std::vector<BlockFeatures> random_features(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<BlockFeatures> f;
  for (int i = 0; i < n; ++i) f.push_back({ip("10.0.0.0") + std::uint32_t(i) * 256, u(rng), u(rng), u(rng)});
  return f;
}

}  // namespace

TEST_SUITE("demographics") {

TEST_CASE("normalization") {
  std::vector<BlockMetrics> m(3);
  m[0].block = ip("10.0.0.0");
  m[1].block = ip("10.0.1.0");
  m[2].block = ip("10.0.2.0");
  const std::vector<std::pair<std::uint32_t, std::uint64_t>> traffic{
      {ip("10.0.0.0"), 9}, {ip("10.0.1.0"), 99}, {ip("10.0.2.0"), 0}};
  const std::vector<HostDensityRecord> hosts{{ip("10.0.0.0"), 10, 4}, {ip("10.0.1.0"), 0, 0}};
  const auto f = normalize_features(m, traffic, hosts);
  REQUIRE(f.size() == 3);
  CHECK(f[0].traffic_norm == doctest::Approx(0.5));
  CHECK(f[1].traffic_norm == 1.0);
  CHECK(f[2].traffic_norm == 0.0);
  CHECK(f[0].hosts_norm == 1.0);
  CHECK(f[1].hosts_norm == 0.0);
  CHECK(f[2].hosts_norm == 0.0);

  const std::vector<std::pair<std::uint32_t, std::uint64_t>> zero{
      {ip("10.0.0.0"), 0}, {ip("10.0.1.0"), 0}, {ip("10.0.2.0"), 0}};
  CHECK_THROWS_AS(normalize_features(m, zero, hosts), Error);
  CHECK_THROWS_AS(normalize_features(m, std::vector<std::pair<std::uint32_t, std::uint64_t>>{traffic[0]}, hosts), Error);
  // no samples at all
  for (const auto& x : normalize_features(m, traffic, {})) CHECK(x.hosts_norm == 0.0);
}

TEST_CASE("normalization keeps the traffic order and the argmax") {
  std::mt19937_64 rng(4);
  std::vector<BlockMetrics> m(50);
  std::vector<std::pair<std::uint32_t, std::uint64_t>> t;
  std::vector<HostDensityRecord> h;
  for (std::uint32_t i = 0; i < 50; ++i) {
    m[i].block = ip("10.0.0.0") + i * 256;
    t.emplace_back(m[i].block, 1 + rng() % 100000);
    h.push_back({m[i].block, 100, rng() % 80});
  }
  const auto f = normalize_features(m, t, h);
  std::size_t arg_t = 0, arg_h = 0;
  for (std::size_t i = 0; i < 50; ++i) {
    if (t[i].second > t[arg_t].second) arg_t = i;
    if (h[i].distinct_ua > h[arg_h].distinct_ua) arg_h = i;
    for (std::size_t j = 0; j < 50; ++j)
      if (t[i].second < t[j].second) CHECK(f[i].traffic_norm < f[j].traffic_norm);
  }
  CHECK(f[arg_t].traffic_norm == 1.0);
  CHECK(f[arg_h].hosts_norm == 1.0);
}

TEST_CASE("feature bins") {
  CHECK(feature_bin(0.0) == 1);
  CHECK(feature_bin(0.1) == 1);
  CHECK(feature_bin(0.10000001) == 2);
  CHECK(feature_bin(1.0) == 10);
  CHECK_THROWS_AS(feature_bin(1.01), Error);
  CHECK_THROWS_AS(feature_bin(-0.01), Error);
}

TEST_CASE("cube") {
  std::vector<BlockFeatures> same(7, BlockFeatures{0, 0.5, 0.5, 0.5});
  const auto c = build_cube(same);
  CHECK(c.at(5, 5, 5) == 7);
  CHECK(c.total() == 7);
  same[3].stu = 1.5;
  CHECK_THROWS_AS(build_cube(same), Error);
}

TEST_CASE("cube conservation") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto f = random_features(seed, int(50 + seed * 37));
    const auto c = build_cube(f);
    CHECK(c.total() == f.size());
    CHECK(c.stu_slab(1, 10) == f.size());
  }
}

TEST_CASE("delegation table") {
  const auto t = table_from({"2|nro|20151231|3|19830101|20151231|+0000", "nro|*|ipv4|*|3|summary",
                             "# comment", "arin|US|ipv4|10.0.0.0|65536|20100101|allocated|x",
                             "ripencc|DE|ipv4|10.1.0.0|768|20100101|assigned", "apnic|JP|ipv6|2001:db8::|32|20100101|allocated",
                             "lacnic|BR|asn|64500|1|20100101|allocated"});
  REQUIRE(t.entries().size() == 2);
  CHECK(t.lookup(AddressId{ip("10.0.200.1")})->registry == "arin");
  // a range of 768 addresses is not a power of two
  CHECK(t.lookup(AddressId{ip("10.1.2.255")})->country == "DE");
  CHECK(t.lookup(AddressId{ip("10.1.3.0")}) == nullptr);
  CHECK_THROWS_AS(table_from({"arin|US|ipv4|10.0.0.0|512|20100101|allocated", "ripencc|DE|ipv4|10.0.1.0|256|20100101|allocated"}),
                  Error);
}

TEST_CASE("registry grouping") {
  const auto f = random_features(1, 100);
  const DelegationTable all({{"arin", "US", ip("10.0.0.0"), 1 << 16, "allocated"}});
  const auto one = group_by_registry(f, all);
  REQUIRE(one.size() == 1);
  const auto cube = build_cube(f);
  const auto& g = one.at("arin");
  for (int s = 1; s <= 10; ++s)
    for (int t = 1; t <= 10; ++t) {
      std::uint64_t sum = 0;
      for (int h = 1; h <= 10; ++h) sum += cube.at(s, t, h);
      CHECK(g.counts[std::size_t((s - 1) * 10 + (t - 1))] == sum);
    }

  // 70 / 30 split plus an unmatched block
  auto g2 = f;
  g2.push_back({ip("192.0.2.0"), 0.5, 0.5, 0.5});
  const DelegationTable split({{"arin", "US", ip("10.0.0.0"), 70 * 256, "allocated"},
                               {"ripencc", "NL", ip("10.0.0.0") + 70 * 256, 30 * 256, "allocated"}});
  const auto groups = group_by_registry(g2, split);
  CHECK(groups.at("arin").blocks == 70);
  CHECK(groups.at("ripencc").blocks == 30);
  CHECK(groups.at(kUnassigned).blocks == 1);
  std::uint64_t total = 0;
  for (auto& [k, v] : groups) total += v.blocks;
  CHECK(total == g2.size());
}

TEST_CASE("compare sources") {
  const auto a = to_address_set({ip("10.0.0.1")});
  CHECK(compare_sources(a, a, Granularity::ip) == Visibility{0, 1, 0});
  CHECK(compare_sources(a, a, Granularity::slash24) == Visibility{0, 1, 0});
  const std::vector<RoutingSnapshot> snaps{RoutingSnapshot(0, {{parse_prefix("10.0.0.0/16").value(), 5}})};
  CHECK(compare_sources(a, a, Granularity::as, snaps, {0, 0}) == Visibility{0, 1, 0});
  const auto b = to_address_set({ip("10.0.0.2")});
  CHECK(compare_sources(a, b, Granularity::ip) == Visibility{1, 0, 1});
  CHECK(compare_sources(a, b, Granularity::slash24) == Visibility{0, 1, 0});
  CHECK_THROWS_AS(compare_sources(a, b, Granularity::as), Error);
}

TEST_CASE("compare sources equals a set-partition oracle") {
  std::mt19937_64 rng(77);
  const std::vector<RoutingSnapshot> snaps{RoutingSnapshot(
      0, {{parse_prefix("10.0.0.0/18").value(), 1}, {parse_prefix("10.0.16.0/20").value(), 2},
          {parse_prefix("10.0.32.128/25").value(), 3}})};
  for (int round = 0; round < 10; ++round) {
    AddrSet a, b;
    for (int i = 0; i < 4000; ++i) a.insert(ip("10.0.0.0") + std::uint32_t(rng() % (1 << 14)));
    for (int i = 0; i < 4000; ++i) b.insert(ip("10.0.32.0") + std::uint32_t(rng() % (1 << 14)));
    const auto A = to_address_set(a), B = to_address_set(b);
    auto same = [](const Visibility& v, std::tuple<std::uint64_t, std::uint64_t, std::uint64_t> t) {
      return v.only_a == std::get<0>(t) && v.both == std::get<1>(t) && v.only_b == std::get<2>(t);
    };
    CHECK(same(compare_sources(A, B, Granularity::ip), naive_partition(a, b, [](std::uint32_t x, std::uint64_t& k) {
                 k = x;
                 return true;
               })));
    CHECK(same(compare_sources(A, B, Granularity::slash24),
               naive_partition(a, b, [](std::uint32_t x, std::uint64_t& k) {
                 k = x >> 8;
                 return true;
               })));
    auto origin = [&](std::uint32_t x, std::uint64_t& k) {
      k = snaps[0].lookup(AddressId{x});
      return k != kUnrouted;
    };
    const auto v = compare_sources(A, B, Granularity::as, snaps, {0, 0});
    CHECK(same(v, naive_partition(a, b, origin)));
    std::uint64_t unrouted_b = 0;
    for (auto x : b) unrouted_b += snaps[0].lookup(AddressId{x}) == kUnrouted;
    CHECK(v.unrouted_b == unrouted_b);

    // swapping the sources swaps the one-sided counts
    for (auto g : {Granularity::ip, Granularity::slash24}) {
      const auto ab = compare_sources(A, B, g), ba = compare_sources(B, A, g);
      CHECK(ab.only_a == ba.only_b);
      CHECK(ab.only_b == ba.only_a);
      CHECK(ab.both == ba.both);
    }
  }
}

TEST_CASE("visibility by registry partitions the address comparison") {
  const auto a = to_address_set({ip("10.0.0.1"), ip("10.1.0.1"), ip("192.0.2.1")});
  const auto b = to_address_set({ip("10.0.0.1"), ip("10.1.0.2")});
  const DelegationTable t({{"arin", "US", ip("10.0.0.0"), 65536, "allocated"},
                           {"ripencc", "DE", ip("10.1.0.0"), 65536, "allocated"}});
  const auto v = visibility_by_registry(a, b, t);
  CHECK(v.at("arin") == Visibility{0, 1, 0});
  CHECK(v.at("ripencc") == Visibility{1, 0, 1});
  CHECK(v.at(kUnassigned) == Visibility{1, 0, 0});
}

TEST_CASE("address lists") {
  auto r = LineReader::from_lines({"# probes", "10.0.0.1", "", "10.0.0.1", "10.0.3.4"});
  const auto s = load_address_set(r);
  CHECK(s.size() == 2);
  auto bad = LineReader::from_lines({"10.0.0.256"});
  CHECK_THROWS_AS(load_address_set(bad), ParseError);
}

}  // TEST_SUITE
