// SPDX-License-Identifier: Apache-2.0
#include "ipact/address.hpp"

#include <algorithm>
#include <charconv>

#include <fmt/format.h>

namespace ipact {

std::optional<AddressId> parse_address(std::string_view text) noexcept {
  std::uint32_t value = 0;
  const char* p = text.data();
  const char* end = p + text.size();
  for (int octet = 0; octet < 4; ++octet) {
    if (octet > 0) {
      if (p == end || *p != '.') return std::nullopt;
      ++p;
    }
    unsigned v = 0;
    int digits = 0;
    while (p != end && *p >= '0' && *p <= '9' && digits < 4) {
      v = v * 10 + unsigned(*p - '0');
      ++p;
      ++digits;
    }
    if (digits == 0 || digits > 3 || v > 255) return std::nullopt;
    value = (value << 8) | v;
  }
  if (p != end) return std::nullopt;
  return AddressId{value};
}

std::string to_string(AddressId addr) {
  const auto v = addr.value;
  return fmt::format("{}.{}.{}.{}", v >> 24, (v >> 16) & 0xFF, (v >> 8) & 0xFF, v & 0xFF);
}

std::string block_to_string(std::uint32_t block) {
  return to_string(AddressId{block & 0xFFFFFF00u}) + "/24";
}

std::optional<Prefix> parse_prefix(std::string_view text) noexcept {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  auto addr = parse_address(text.substr(0, slash));
  if (!addr) return std::nullopt;
  auto len_text = text.substr(slash + 1);
  int len = -1;
  auto [ptr, ec] = std::from_chars(len_text.data(), len_text.data() + len_text.size(), len);
  if (ec != std::errc{} || ptr != len_text.data() + len_text.size() || len < 0 || len > 32)
    return std::nullopt;
  if ((addr->value & ~mask_bits(len)) != 0) return std::nullopt;
  return Prefix{addr->value, len};
}

std::string to_string(const Prefix& p) {
  return fmt::format("{}/{}", to_string(AddressId{p.network}), p.length);
}

bool Bits256::all_in(unsigned first, unsigned width_log2) const noexcept {
  if (width_log2 >= 6) {
    const unsigned words = 1u << (width_log2 - 6);
    const unsigned w0 = first >> 6;
    for (unsigned i = 0; i < words; ++i)
      if (w[w0 + i] != ~std::uint64_t{0}) return false;
    return true;
  }
  const std::uint64_t run = (std::uint64_t{1} << (1u << width_log2)) - 1u;
  const std::uint64_t m = run << (first & 63);
  return (w[first >> 6] & m) == m;
}

AddressSet AddressSet::from_addresses(std::vector<AddressId> addrs) {
  std::sort(addrs.begin(), addrs.end());
  AddressSet out;
  for (auto a : addrs) {
    if (out.entries_.empty() || out.entries_.back().first != a.block())
      out.entries_.push_back({a.block(), Bits256{}});
    out.entries_.back().second.set(a.offset());
  }
  return out;
}

AddressSet AddressSet::from_sorted_entries(std::vector<Entry> entries) {
  AddressSet out;
  out.entries_ = std::move(entries);
  return out;
}

bool AddressSet::contains(AddressId a) const noexcept {
  return block_bits(a.block()).test(a.offset());
}

Bits256 AddressSet::block_bits(std::uint32_t block) const noexcept {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), block,
                             [](const Entry& e, std::uint32_t b) { return e.first < b; });
  if (it == entries_.end() || it->first != block) return {};
  return it->second;
}

std::size_t AddressSet::size() const noexcept {
  std::size_t n = 0;
  for (const auto& e : entries_) n += static_cast<std::size_t>(e.second.count());
  return n;
}

std::vector<AddressId> AddressSet::to_vector() const {
  std::vector<AddressId> out;
  out.reserve(size());
  for (const auto& [block, bits] : entries_)
    for (unsigned i = 0; i < 256; ++i)
      if (bits.test(i)) out.push_back(AddressId{block | i});
  return out;
}

namespace {

// Sorted merge over the block lists; `op` combines two masks (missing side = empty).
template <typename Op>
AddressSet merge(const AddressSet& a, const AddressSet& b, Op op) {
  std::vector<AddressSet::Entry> out;
  const auto& ea = a.entries();
  const auto& eb = b.entries();
  std::size_t i = 0, j = 0;
  auto emit = [&](std::uint32_t block, const Bits256& bits) {
    if (!bits.none()) out.emplace_back(block, bits);
  };
  while (i < ea.size() || j < eb.size()) {
    if (j == eb.size() || (i < ea.size() && ea[i].first < eb[j].first)) {
      emit(ea[i].first, op(ea[i].second, Bits256{}));
      ++i;
    } else if (i == ea.size() || eb[j].first < ea[i].first) {
      emit(eb[j].first, op(Bits256{}, eb[j].second));
      ++j;
    } else {
      emit(ea[i].first, op(ea[i].second, eb[j].second));
      ++i;
      ++j;
    }
  }
  return AddressSet::from_sorted_entries(std::move(out));
}

}  // namespace

AddressSet set_union(const AddressSet& a, const AddressSet& b) {
  return merge(a, b, [](const Bits256& x, const Bits256& y) { return x | y; });
}

AddressSet set_difference(const AddressSet& a, const AddressSet& b) {
  return merge(a, b, [](const Bits256& x, const Bits256& y) { return and_not(x, y); });
}

AddressSet set_intersection(const AddressSet& a, const AddressSet& b) {
  return merge(a, b, [](const Bits256& x, const Bits256& y) { return x & y; });
}

}  // namespace ipact
