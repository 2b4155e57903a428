// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include <fmt/format.h>
#include <zlib.h>

#include "ipact/activity_store.hpp"
#include "ipact/error.hpp"
#include "ipact/io.hpp"
#include "ipact/ua_samples.hpp"
#include "support.hpp"

using namespace ipact;
using namespace ipact::test;

TEST_SUITE("activity_core") {

TEST_CASE("address text round trip and ordering") {
  for (const char* s : {"0.0.0.0", "10.0.0.1", "192.168.255.7", "255.255.255.255"})
    CHECK(to_string(parse_address(s).value()) == s);
  for (const char* s : {"", "1.2.3", "1.2.3.4.5", "256.0.0.1", "+1.2.3.4", "1..2.3", "1.2.3.4 ", "a.b.c.d"})
    CHECK_FALSE(parse_address(s));
  CHECK(parse_address("9.255.255.255").value() < parse_address("10.0.0.0").value());
  CHECK(block_to_string(ip("10.1.2.0")) == "10.1.2.0/24");
}

TEST_CASE("prefix parsing rejects host bits") {
  auto p = parse_prefix("10.1.0.0/16");
  REQUIRE(p);
  CHECK(p->contains(AddressId{ip("10.1.200.3")}));
  CHECK_FALSE(p->contains(AddressId{ip("10.2.0.0")}));
  CHECK_FALSE(parse_prefix("10.1.0.1/16"));
  CHECK_FALSE(parse_prefix("10.1.0.0/33"));
  CHECK(parse_prefix("0.0.0.0/0"));
}

TEST_CASE("calendar") {
  CHECK_FALSE(parse_iso_date("2015-02-29"));
  CHECK(parse_iso_date("2016-02-29"));
  CHECK_FALSE(parse_iso_date("2015-2-01"));
  const auto d = parse_iso_date("2015-08-17").value();
  CHECK(to_iso(d) == "2015-08-17");
  CHECK(iso_weekday_index(d) == 0);
  CHECK(is_weekend(d + 5));
  CHECK(to_iso(d + 365) == "2016-08-16");
}

TEST_CASE("single record") {
  auto s = ingest_activity(std::vector<std::string>{"2015-08-17,10.0.0.1,5"});
  REQUIRE(s.blocks().size() == 1);
  const auto& m = s.blocks()[0];
  CHECK(m.block() == ip("10.0.0.0"));
  CHECK(m.active(1, 0));
  CHECK(m.hits(1, 0) == 5);
  CHECK_FALSE(m.active(0, 0));
  CHECK(s.days() == 1);
  CHECK(to_iso(s.first_day()) == "2015-08-17");
}

TEST_CASE("duplicate records sum") {
  auto s = ingest_activity(std::vector<std::string>{"2015-08-17,10.0.0.1,2", "2015-08-17,10.0.0.1,3"});
  CHECK(s.hits(AddressId{ip("10.0.0.1")}, 0) == 5);
  CHECK(s.quality().records == 2);
}

TEST_CASE("hit totals per block equal a sum over the raw text") {
  std::mt19937_64 rng(11);
  std::vector<std::string> lines;
  std::map<std::string, std::uint64_t> expect;  // keyed by the first three octets as text
  const char* blocks[] = {"10.0.0", "10.0.9", "172.16.4", "192.0.2"};
  for (int i = 0; i < 10000; ++i) {
    const char* b = blocks[rng() % 4];
    const auto hits = 1 + rng() % 500;
    lines.push_back(fmt::format("2015-01-{:02},{}.{},{}", 5 + rng() % 20, b, rng() % 256, hits));
    expect[b] += hits;
  }
  IngestOptions opt;
  opt.first_day = day0();
  opt.days = 20;
  auto s = ingest_activity(lines, opt);
  REQUIRE(s.blocks().size() == 4);
  std::uint64_t total = 0;
  for (const char* b : blocks) {
    const auto* m = s.find(ip(fmt::format("{}.0", b).c_str()));
    REQUIRE(m);
    CHECK(m->total_hits() == expect[b]);
    total += expect[b];
  }
  CHECK(s.total_hits() == total);
}

TEST_CASE("strict mode reports the line number") {
  std::vector<std::string> lines{"2015-08-17,10.0.0.1,5", "2015-08-17,10.0.0.300,1"};
  try {
    ingest_activity(lines);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  for (const char* bad : {"2015-08-17,10.0.0.1,0", "2015-08-17,10.0.0.1", "2015-08-17,10.0.0.1,5,6",
                          "2015-13-01,10.0.0.1,1", "2015-08-17,10.0.0.1,x", ""})
    CHECK_THROWS_AS(ingest_activity(std::vector<std::string>{bad}), ParseError);
}

TEST_CASE("tolerant mode counts skipped lines") {
  IngestOptions opt;
  opt.mode = ParseMode::tolerant;
  auto s = ingest_activity(std::vector<std::string>{"junk", "2015-08-17,10.0.0.1,5", "2015-08-17,1.2.3,5"}, opt);
  CHECK(s.quality().skipped_lines == 2);
  CHECK(s.quality().records == 1);
}

TEST_CASE("dates outside the declared range fail in both modes") {
  IngestOptions opt;
  opt.first_day = parse_iso_date("2015-08-17");
  opt.days = 7;
  CHECK_THROWS_AS(ingest_activity(std::vector<std::string>{"2015-08-24,10.0.0.1,1"}, opt), RangeError);
  opt.mode = ParseMode::tolerant;
  CHECK_THROWS_AS(ingest_activity(std::vector<std::string>{"2015-08-16,10.0.0.1,1"}, opt), RangeError);
}

TEST_CASE("hit counters saturate") {
  StoreBuilder b(day0(), 1);
  b.add(AddressId{ip("10.0.0.1")}, 0, 4000000000ull);
  b.add(AddressId{ip("10.0.0.1")}, 0, 4000000000ull);
  auto s = std::move(b).seal();
  CHECK(s.hits(AddressId{ip("10.0.0.1")}, 0) == 0xFFFFFFFFu);
  CHECK(s.quality().saturated_cells == 1);
}

TEST_CASE("active_set") {
  auto s = make_store({{ip("10.0.0.1"), 3, 1}, {ip("10.0.0.2"), 0, 1}}, 10);
  CHECK(active_set(s, 0, 2).size() == 1);
  CHECK_FALSE(active_set(s, 0, 2).contains(AddressId{ip("10.0.0.1")}));
  CHECK(active_set(s, 0, 9).size() == 2);
  CHECK_THROWS_AS(active_set(s, 0, 10), RangeError);
  CHECK_THROWS_AS(active_set(s, 5, 4), RangeError);
  CHECK_THROWS_AS(active_set(s, -1, 2), RangeError);
}

TEST_CASE("active_set equals a scan of the raw records") {
  const auto recs = random_records(3, ip("10.20.0.0"), 64, 30);  // 2^14 addresses
  const auto s = make_store(recs, 30);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    int lo = int(rng() % 30), hi = int(rng() % 30);
    if (lo > hi) std::swap(lo, hi);
    std::set<std::uint32_t> got;
    for (auto a : active_set(s, lo, hi).to_vector()) got.insert(a.value);
    CHECK(got == sorted(naive_active(recs, lo, hi)));
  }
  AddressSet daily_union;
  for (int d = 0; d < 30; ++d) daily_union = set_union(daily_union, active_set(s, d, d));
  CHECK(daily_union == active_set(s, 0, 29));
}

TEST_CASE("active_set monotone in the day range") {
  const auto s = make_store(random_records(8, ip("10.0.0.0"), 8, 20), 20);
  for (int lo = 0; lo < 20; lo += 3)
    for (int hi = lo; hi + 1 < 20; ++hi) {
      const auto small = active_set(s, lo, hi), big = active_set(s, lo, hi + 1);
      CHECK(set_difference(small, big).empty());
    }
}

TEST_CASE("cell invariants and conservation") {
  const auto recs = random_records(21, ip("10.1.0.0"), 6, 15);
  const auto s = make_store(recs, 15);
  std::uint64_t raw = 0;
  for (const auto& r : recs) raw += r.hits;
  CHECK(s.total_hits() == raw);
  for (const auto& m : s.blocks())
    for (unsigned o = 0; o < 256; ++o)
      for (int d = 0; d < 15; ++d) CHECK((m.hits(o, d) > 0) == m.active(o, d));
}

TEST_CASE("daily count equals column popcount") {
  const auto recs = random_records(22, ip("10.1.0.0"), 5, 12);
  const auto s = make_store(recs, 12);
  for (int d = 0; d < 12; ++d) {
    std::uint64_t pop = 0;
    for (const auto& m : s.blocks()) pop += std::uint64_t(m.day_columns()[std::size_t(d)].count());
    CHECK(s.daily_active_count(d) == pop);
    CHECK(pop == naive_active(recs, d, d).size());
  }
}

TEST_CASE("blocks are ascending and empty blocks absent") {
  auto s = make_store({{ip("10.0.5.1"), 0, 1}, {ip("10.0.1.1"), 0, 1}, {ip("9.0.0.1"), 1, 1}}, 2);
  REQUIRE(s.blocks().size() == 3);
  CHECK(s.blocks()[0].block() == ip("9.0.0.0"));
  CHECK(s.blocks()[2].block() == ip("10.0.5.0"));
  CHECK(s.find(ip("10.0.2.0")) == nullptr);
}

TEST_CASE("store serialization round trip is byte exact") {
  const auto s = make_store(random_records(4, ip("10.3.0.0"), 10, 70), 70);
  const auto bytes = s.serialize();
  const auto back = ActivityStore::deserialize(bytes);
  CHECK(back.serialize() == bytes);
  CHECK(back.blocks() == s.blocks());
  CHECK(back.first_day() == s.first_day());
  CHECK(back.quality() == s.quality());
  CHECK_THROWS_AS(ActivityStore::deserialize(bytes.substr(0, bytes.size() - 1)), Error);
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(ActivityStore::deserialize(bad), Error);
}

TEST_CASE("gzip input is detected") {
  const auto dir = std::filesystem::temp_directory_path() / "ipact_gz_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "a.csv.gz";
  gzFile f = gzopen(path.c_str(), "wb");
  REQUIRE(f);
  const std::string body = "2015-08-17,10.0.0.1,5\r\n2015-08-18,10.0.0.2,7\n";
  gzwrite(f, body.data(), unsigned(body.size()));
  gzclose(f);
  auto reader = LineReader::open(path);
  auto s = ingest_activity(reader);
  CHECK(s.days() == 2);
  CHECK(s.total_hits() == 12);
  std::filesystem::remove_all(dir);
}

TEST_CASE("csv records") {
  std::vector<std::string> f;
  CHECK(split_csv_record(R"(2015-01-01,10.0.0.1,"Mozilla/5.0 (X11, Linux) ""q""")", f));
  REQUIRE(f.size() == 3);
  CHECK(f[2] == R"(Mozilla/5.0 (X11, Linux) "q")");
  CHECK_FALSE(split_csv_record(R"(a,"open)", f));
  CHECK_FALSE(split_csv_record(R"(a,b"c)", f));
  CHECK(csv_quote("a,b") == R"("a,b")");
  CHECK(csv_quote("plain") == "plain");
}

TEST_CASE("ua samples") {
  auto one = ingest_ua_samples(std::vector<std::string>{R"(2015-08-17,10.0.0.1,"UA 1")"});
  const auto b = ip("10.0.0.0");
  CHECK(one.sample_count(b, {0, 0}) == 1);
  CHECK(one.distinct_count(b, {0, 0}) == 1);

  auto two = ingest_ua_samples(std::vector<std::string>{R"(2015-08-17,10.0.0.1,"x")", R"(2015-08-17,10.0.0.9,"x")"});
  CHECK(two.sample_count(b, {0, 0}) == 2);
  CHECK(two.distinct_count(b, {0, 0}) == 1);

  CHECK_THROWS_AS(ingest_ua_samples(std::vector<std::string>{R"(2015-08-17,10.0.0.1,"open)"}), ParseError);
  // exact byte comparison, no case folding
  auto cs = ingest_ua_samples(std::vector<std::string>{R"(2015-08-17,10.0.0.1,"a")", R"(2015-08-17,10.0.0.1,"A")"});
  CHECK(cs.distinct_count(b, {0, 0}) == 2);
}

TEST_CASE("ua counts equal a set oracle over the raw lines") {
  std::mt19937_64 rng(99);
  std::vector<std::string> lines;
  std::map<std::uint32_t, std::pair<std::size_t, std::set<std::string>>> expect;
  const std::uint32_t blocks[] = {ip("10.0.0.0"), ip("10.0.7.0"), ip("10.9.0.0")};
  for (int i = 0; i < 1000; ++i) {
    const auto blk = blocks[rng() % 3];
    const auto ua = fmt::format("agent {}, build {}", rng() % 40, rng() % 3);
    lines.push_back(fmt::format("2015-01-{:02},{},{}", 5 + rng() % 3, to_string(AddressId{blk + std::uint32_t(rng() % 256)}),
                                csv_quote(ua)));
    expect[blk].first += 1;
    expect[blk].second.insert(ua);
  }
  auto set = ingest_ua_samples(lines);
  REQUIRE(set.blocks().size() == 3);
  for (auto& [blk, e] : expect) {
    CHECK(set.sample_count(blk, {0, set.days() - 1}) == e.first);
    CHECK(set.distinct_count(blk, {0, set.days() - 1}) == e.second.size());
  }
  CHECK(set.total_samples() == 1000);
}

TEST_CASE("address set algebra matches std::set") {
  std::mt19937_64 rng(1);
  for (int round = 0; round < 10; ++round) {
    AddrSet a, b;
    for (int i = 0; i < 3000; ++i) a.insert(ip("10.0.0.0") + std::uint32_t(rng() % 5000));
    for (int i = 0; i < 3000; ++i) b.insert(ip("10.0.0.0") + std::uint32_t(rng() % 5000));
    const auto A = to_address_set(a), B = to_address_set(b);
    std::set<std::uint32_t> sa = sorted(a), sb = sorted(b), u, in, df;
    std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(), std::inserter(u, u.end()));
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::inserter(in, in.end()));
    std::set_difference(sa.begin(), sa.end(), sb.begin(), sb.end(), std::inserter(df, df.end()));
    auto as_set = [](const AddressSet& s) {
      std::set<std::uint32_t> o;
      for (auto x : s.to_vector()) o.insert(x.value);
      return o;
    };
    CHECK(as_set(set_union(A, B)) == u);
    CHECK(as_set(set_intersection(A, B)) == in);
    CHECK(as_set(set_difference(A, B)) == df);
    CHECK(A.size() == a.size());
  }
}

}  // TEST_SUITE
