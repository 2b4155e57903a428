// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <bit>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ipact {

/// IPv4 address as a host-order integer.
struct AddressId {
  std::uint32_t value = 0;

  constexpr auto operator<=>(const AddressId&) const = default;

  /// Network address of the containing /24.
  constexpr std::uint32_t block() const noexcept { return value & 0xFFFFFF00u; }
  /// Position of the address inside its /24.
  constexpr unsigned offset() const noexcept { return value & 0xFFu; }
};

/// Parses strict dotted-quad text ("10.0.0.1"). No leading '+', no empty octets, each octet <= 255.
std::optional<AddressId> parse_address(std::string_view text) noexcept;

std::string to_string(AddressId addr);
/// Renders a /24 network address as "a.b.c.0/24".
std::string block_to_string(std::uint32_t block);

constexpr std::uint32_t mask_bits(int length) noexcept {
  return length <= 0 ? 0u : (length >= 32 ? 0xFFFFFFFFu : ~((1u << (32 - length)) - 1u));
}

/// A CIDR prefix. The network is always stored with host bits cleared.
struct Prefix {
  std::uint32_t network = 0;
  int length = 0;

  constexpr auto operator<=>(const Prefix&) const = default;

  constexpr bool contains(AddressId a) const noexcept {
    return (a.value & mask_bits(length)) == network;
  }
  constexpr std::uint32_t first() const noexcept { return network; }
  constexpr std::uint32_t last() const noexcept { return network | ~mask_bits(length); }
};

/// Parses "a.b.c.d/len". Host bits set below the mask are rejected.
std::optional<Prefix> parse_prefix(std::string_view text) noexcept;
std::string to_string(const Prefix& p);

/// 256-bit membership mask over the addresses of one /24. Bit i is address offset i.
struct Bits256 {
  std::array<std::uint64_t, 4> w{};

  constexpr auto operator<=>(const Bits256&) const = default;

  constexpr bool test(unsigned i) const noexcept { return (w[i >> 6] >> (i & 63)) & 1u; }
  constexpr void set(unsigned i) noexcept { w[i >> 6] |= std::uint64_t{1} << (i & 63); }
  constexpr int count() const noexcept {
    return std::popcount(w[0]) + std::popcount(w[1]) + std::popcount(w[2]) + std::popcount(w[3]);
  }
  constexpr bool none() const noexcept { return (w[0] | w[1] | w[2] | w[3]) == 0; }
  constexpr bool all() const noexcept { return (w[0] & w[1] & w[2] & w[3]) == ~std::uint64_t{0}; }

  /// True when every bit in the aligned run [first, first + 2^width_log2) is set.
  bool all_in(unsigned first, unsigned width_log2) const noexcept;

  friend constexpr Bits256 operator|(Bits256 a, const Bits256& b) noexcept {
    for (int i = 0; i < 4; ++i) a.w[i] |= b.w[i];
    return a;
  }
  friend constexpr Bits256 operator&(Bits256 a, const Bits256& b) noexcept {
    for (int i = 0; i < 4; ++i) a.w[i] &= b.w[i];
    return a;
  }
  friend constexpr Bits256 operator~(Bits256 a) noexcept {
    for (auto& x : a.w) x = ~x;
    return a;
  }
  /// a & ~b
  friend constexpr Bits256 and_not(Bits256 a, const Bits256& b) noexcept {
    for (int i = 0; i < 4; ++i) a.w[i] &= ~b.w[i];
    return a;
  }
  Bits256& operator|=(const Bits256& b) noexcept { return *this = *this | b; }
};

/// A set of IPv4 addresses stored as per-/24 bitmaps, blocks in ascending order.
/// Empty blocks are never stored.
class AddressSet {
public:
  using Entry = std::pair<std::uint32_t, Bits256>;

  AddressSet() = default;
  /// Builds from arbitrary (possibly unsorted, duplicated) addresses.
  static AddressSet from_addresses(std::vector<AddressId> addrs);
  /// Adopts entries that are already sorted by block, unique, and non-empty.
  static AddressSet from_sorted_entries(std::vector<Entry> entries);

  bool contains(AddressId a) const noexcept;
  std::size_t size() const noexcept;
  std::size_t block_count() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  /// Bits for one /24, or an empty mask when absent.
  Bits256 block_bits(std::uint32_t block) const noexcept;

  /// All members in ascending order.
  std::vector<AddressId> to_vector() const;

  friend AddressSet set_union(const AddressSet& a, const AddressSet& b);
  friend AddressSet set_difference(const AddressSet& a, const AddressSet& b);
  friend AddressSet set_intersection(const AddressSet& a, const AddressSet& b);

  bool operator==(const AddressSet&) const = default;

private:
  std::vector<Entry> entries_;
};

AddressSet set_union(const AddressSet& a, const AddressSet& b);
AddressSet set_difference(const AddressSet& a, const AddressSet& b);
AddressSet set_intersection(const AddressSet& a, const AddressSet& b);

}  // namespace ipact
