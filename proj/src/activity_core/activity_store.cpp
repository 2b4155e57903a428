// SPDX-License-Identifier: Apache-2.0
#include "ipact/activity_store.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <limits>

#include "ipact/error.hpp"

namespace ipact {

namespace {

constexpr std::uint32_t kHitCeiling = std::numeric_limits<std::uint32_t>::max();

// Mask of day bits [lo, hi] restricted to word w of a row.
inline std::uint64_t range_mask(int w, int lo, int hi) noexcept {
  const int base = w * 64;
  const int a = std::max(lo, base) - base;
  const int b = std::min(hi, base + 63) - base;
  if (a > b) return 0;
  const std::uint64_t upper = b == 63 ? ~std::uint64_t{0} : ((std::uint64_t{1} << (b + 1)) - 1);
  return upper & ~((std::uint64_t{1} << a) - 1);
}

}  // namespace

// ---------------------------------------------------------------------------
// ActivityMatrix

std::uint32_t ActivityMatrix::hits(unsigned offset, int day) const noexcept {
  if (!active(offset, day)) return 0;
  const std::uint64_t* r = bits_.data() + offset * words_;
  std::uint32_t rank = 0;
  const int w = day >> 6;
  for (int i = 0; i < w; ++i) rank += std::popcount(r[i]);
  rank += std::popcount(r[w] & ((std::uint64_t{1} << (day & 63)) - 1));
  return hits_[row_offset_[offset] + rank];
}

int ActivityMatrix::active_days(unsigned offset, DayRange r) const noexcept {
  const std::uint64_t* row = bits_.data() + offset * words_;
  int n = 0;
  for (int w = r.first >> 6; w <= (r.last >> 6); ++w) n += std::popcount(row[w] & range_mask(w, r.first, r.last));
  return n;
}

Bits256 ActivityMatrix::active_addresses(DayRange r) const noexcept {
  Bits256 out;
  const int w_lo = r.first >> 6, w_hi = r.last >> 6;
  for (unsigned a = 0; a < 256; ++a) {
    const std::uint64_t* row = bits_.data() + a * words_;
    for (int w = w_lo; w <= w_hi; ++w) {
      if (row[w] & range_mask(w, r.first, r.last)) {
        out.set(a);
        break;
      }
    }
  }
  return out;
}

std::vector<Bits256> ActivityMatrix::day_columns() const {
  std::vector<Bits256> cols(static_cast<std::size_t>(days_));
  for (unsigned a = 0; a < 256; ++a) {
    const std::uint64_t* row = bits_.data() + a * words_;
    const std::uint64_t abit = std::uint64_t{1} << (a & 63);
    for (int w = 0; w < words_; ++w) {
      std::uint64_t x = row[w];
      while (x) {
        const int d = w * 64 + std::countr_zero(x);
        cols[static_cast<std::size_t>(d)].w[a >> 6] |= abit;
        x &= x - 1;
      }
    }
  }
  return cols;
}

std::uint64_t ActivityMatrix::active_cells(DayRange r) const noexcept {
  std::uint64_t n = 0;
  for (unsigned a = 0; a < 256; ++a) n += static_cast<std::uint64_t>(active_days(a, r));
  return n;
}

std::uint64_t ActivityMatrix::total_hits() const noexcept {
  std::uint64_t s = 0;
  for (auto h : hits_) s += h;
  return s;
}

std::uint64_t ActivityMatrix::hits_in(unsigned offset, DayRange r) const noexcept {
  const std::uint64_t* row = bits_.data() + offset * words_;
  const auto h = row_hits(offset);
  std::uint64_t s = 0;
  std::size_t k = 0;
  for (int w = 0; w < words_; ++w) {
    std::uint64_t x = row[w];
    while (x) {
      const int d = w * 64 + std::countr_zero(x);
      if (d > r.last) return s;
      if (d >= r.first) s += h[k];
      ++k;
      x &= x - 1;
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// ActivityStore

void ActivityStore::build_index() {
  index_.clear();
  index_.reserve(blocks_.size());
  for (std::uint32_t i = 0; i < blocks_.size(); ++i) index_.emplace(blocks_[i].block(), i);
}

const ActivityMatrix* ActivityStore::find(std::uint32_t block) const noexcept {
  auto it = index_.find(block & 0xFFFFFF00u);
  return it == index_.end() ? nullptr : &blocks_[it->second];
}

bool ActivityStore::active(AddressId a, int day) const noexcept {
  if (day < 0 || day >= days_) return false;
  const auto* m = find(a.block());
  return m != nullptr && m->active(a.offset(), day);
}

std::uint32_t ActivityStore::hits(AddressId a, int day) const noexcept {
  if (day < 0 || day >= days_) return 0;
  const auto* m = find(a.block());
  return m == nullptr ? 0 : m->hits(a.offset(), day);
}

std::uint64_t ActivityStore::total_hits() const noexcept {
  std::uint64_t s = 0;
  for (const auto& m : blocks_) s += m.total_hits();
  return s;
}

std::uint64_t ActivityStore::daily_active_count(int day) const {
  check_range({day, day});
  std::uint64_t n = 0;
  for (const auto& m : blocks_)
    for (unsigned a = 0; a < 256; ++a) n += m.active(a, day) ? 1 : 0;
  return n;
}

void ActivityStore::check_range(DayRange r) const {
  if (r.first > r.last || r.first < 0 || r.last >= days_)
    throw RangeError("day range [" + std::to_string(r.first) + ", " + std::to_string(r.last) +
                     "] outside store range [0, " + std::to_string(days_ - 1) + "]");
}

// Binary layout (all integers little-endian):
//   header: "IPACTSTO" | u32 version | u32 days | i32 first_day | u32 reserved
//           | u64 blocks | u64 records | u64 skipped_lines | u64 saturated_cells
//   block:  u32 network | u32 active_cells | 256*ceil(days/64) u64 row words | cells * u32 hits
namespace {

static_assert(std::endian::native == std::endian::little, "store serialization assumes little-endian");

constexpr char kMagic[8] = {'I', 'P', 'A', 'C', 'T', 'S', 'T', 'O'};

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
public:
  explicit Reader(std::string_view b) : b_(b) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, b_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void read(void* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, b_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const noexcept { return pos_ == b_.size(); }

private:
  void need(std::size_t n) const {
    if (b_.size() - pos_ < n) throw Error("store file truncated");
  }
  std::string_view b_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string ActivityStore::serialize() const {
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kFormatVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(days_));
  put<std::int32_t>(out, first_day_.days_since_epoch);
  put<std::uint32_t>(out, 0);
  put<std::uint64_t>(out, blocks_.size());
  put<std::uint64_t>(out, quality_.records);
  put<std::uint64_t>(out, quality_.skipped_lines);
  put<std::uint64_t>(out, quality_.saturated_cells);
  for (const auto& m : blocks_) {
    put<std::uint32_t>(out, m.block_);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(m.hits_.size()));
    out.append(reinterpret_cast<const char*>(m.bits_.data()), m.bits_.size() * sizeof(std::uint64_t));
    out.append(reinterpret_cast<const char*>(m.hits_.data()), m.hits_.size() * sizeof(std::uint32_t));
  }
  return out;
}

ActivityStore ActivityStore::deserialize(std::string_view bytes) {
  Reader r(bytes);
  char magic[8];
  r.read(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw Error("not an activity store file");
  const auto version = r.get<std::uint32_t>();
  if (version != kFormatVersion)
    throw Error("unsupported store version " + std::to_string(version));
  ActivityStore s;
  s.days_ = static_cast<int>(r.get<std::uint32_t>());
  s.first_day_ = CivilDay{r.get<std::int32_t>()};
  (void)r.get<std::uint32_t>();
  const auto nblocks = r.get<std::uint64_t>();
  s.quality_.records = r.get<std::uint64_t>();
  s.quality_.skipped_lines = r.get<std::uint64_t>();
  s.quality_.saturated_cells = r.get<std::uint64_t>();
  if (s.days_ <= 0) throw Error("store file has no days");
  const int words = (s.days_ + 63) / 64;
  s.blocks_.reserve(nblocks);
  std::uint32_t prev = 0;
  for (std::uint64_t i = 0; i < nblocks; ++i) {
    ActivityMatrix m;
    m.block_ = r.get<std::uint32_t>();
    if ((m.block_ & 0xFF) != 0 || (i > 0 && m.block_ <= prev)) throw Error("store file: blocks out of order");
    prev = m.block_;
    m.days_ = s.days_;
    m.words_ = words;
    const auto cells = r.get<std::uint32_t>();
    m.bits_.resize(256u * static_cast<unsigned>(words));
    r.read(m.bits_.data(), m.bits_.size() * sizeof(std::uint64_t));
    m.hits_.resize(cells);
    r.read(m.hits_.data(), cells * sizeof(std::uint32_t));
    std::uint32_t acc = 0;
    for (unsigned a = 0; a < 256; ++a) {
      m.row_offset_[a] = acc;
      for (int w = 0; w < words; ++w) acc += std::popcount(m.bits_[a * words + w]);
    }
    m.row_offset_[256] = acc;
    if (acc != cells) throw Error("store file: cell count mismatch");
    s.blocks_.push_back(std::move(m));
  }
  if (!r.done()) throw Error("store file: trailing bytes");
  s.build_index();
  return s;
}

void ActivityStore::save(const std::filesystem::path& path) const { write_file_atomic(path, serialize()); }

ActivityStore ActivityStore::load(const std::filesystem::path& path) { return deserialize(read_file(path)); }

// ---------------------------------------------------------------------------
// StoreBuilder

namespace {
constexpr std::uint32_t kDayBias = 0x80000000u;
inline std::uint32_t biased(CivilDay d) noexcept {
  return static_cast<std::uint32_t>(d.days_since_epoch) + kDayBias;
}
}  // namespace

void StoreBuilder::check_day(CivilDay day) const {
  if (first_day_ && day < *first_day_)
    throw RangeError("date " + to_iso(day) + " precedes declared first day " + to_iso(*first_day_));
  if (first_day_ && days_ && day - *first_day_ >= *days_)
    throw RangeError("date " + to_iso(day) + " beyond declared range of " + std::to_string(*days_) + " days");
}

void StoreBuilder::add(AddressId a, CivilDay day, std::uint64_t hits) {
  if (hits == 0) throw Error("hits must be >= 1");
  check_day(day);
  cells_.push_back({(std::uint64_t{a.value} << 32) | biased(day), hits});
}

void StoreBuilder::add(AddressId a, int day_ordinal, std::uint64_t hits) {
  if (!first_day_) throw Error("day ordinal used without a declared first day");
  add(a, *first_day_ + day_ordinal, hits);
}

ActivityStore StoreBuilder::seal() && {
  std::sort(cells_.begin(), cells_.end(), [](const Cell& x, const Cell& y) { return x.key < y.key; });

  std::uint32_t lo = ~0u, hi = 0;
  for (const auto& c : cells_) {
    const auto d = static_cast<std::uint32_t>(c.key);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }

  ActivityStore s;
  if (first_day_) {
    s.first_day_ = *first_day_;
  } else if (!cells_.empty()) {
    s.first_day_ = CivilDay{static_cast<int>(lo - kDayBias)};
  } else {
    throw Error("cannot infer day range from an empty input");
  }
  if (days_) {
    s.days_ = *days_;
  } else if (!cells_.empty()) {
    s.days_ = static_cast<int>(hi - biased(s.first_day_)) + 1;
  } else {
    throw Error("cannot infer day count from an empty input");
  }
  if (s.days_ <= 0) throw Error("day count must be positive");

  const int words = (s.days_ + 63) / 64;
  const std::uint32_t base = biased(s.first_day_);
  s.quality_.records = 0;
  s.quality_.skipped_lines = skipped_;

  std::size_t i = 0;
  while (i < cells_.size()) {
    const std::uint32_t block = static_cast<std::uint32_t>(cells_[i].key >> 32) & 0xFFFFFF00u;
    ActivityMatrix m;
    m.block_ = block;
    m.days_ = s.days_;
    m.words_ = words;
    m.bits_.assign(256u * static_cast<unsigned>(words), 0);
    unsigned next_row = 0;
    while (i < cells_.size() && (static_cast<std::uint32_t>(cells_[i].key >> 32) & 0xFFFFFF00u) == block) {
      const std::uint64_t key = cells_[i].key;
      std::uint64_t sum = 0;
      while (i < cells_.size() && cells_[i].key == key) {
        sum += std::min<std::uint64_t>(cells_[i].hits, std::uint64_t{1} << 40);
        ++s.quality_.records;
        ++i;
      }
      const unsigned offset = static_cast<std::uint32_t>(key >> 32) & 0xFF;
      const int day = static_cast<int>(static_cast<std::uint32_t>(key) - base);
      for (; next_row <= offset; ++next_row) m.row_offset_[next_row] = static_cast<std::uint32_t>(m.hits_.size());
      m.bits_[offset * words + unsigned(day >> 6)] |= std::uint64_t{1} << (day & 63);
      if (sum > kHitCeiling) {
        sum = kHitCeiling;
        ++s.quality_.saturated_cells;
      }
      m.hits_.push_back(static_cast<std::uint32_t>(sum));
    }
    for (; next_row <= 256; ++next_row) m.row_offset_[next_row] = static_cast<std::uint32_t>(m.hits_.size());
    s.blocks_.push_back(std::move(m));
  }
  cells_.clear();
  cells_.shrink_to_fit();
  s.build_index();
  return s;
}

// ---------------------------------------------------------------------------
// Ingestion

ActivityStore ingest_activity(LineReader& lines, const IngestOptions& options) {
  StoreBuilder builder(options.first_day, options.days);
  std::string_view line;
  std::string_view last_date_text;
  std::string last_date_buf;
  CivilDay last_date{};

  auto fail = [&](const std::string& why) {
    if (options.mode == ParseMode::strict) throw ParseError(lines.name(), lines.line_number(), why);
    builder.note_skipped_line();
  };

  while (lines.next(line)) {
    if (line.empty()) {
      fail("empty line");
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos) {
      fail("expected 3 comma-separated fields");
      continue;
    }
    const auto date_text = line.substr(0, c1);
    CivilDay day;
    if (date_text == last_date_text && !last_date_text.empty()) {
      day = last_date;
    } else {
      auto parsed = parse_iso_date(date_text);
      if (!parsed) {
        fail("bad date '" + std::string(date_text) + "'");
        continue;
      }
      day = *parsed;
      last_date_buf.assign(date_text);
      last_date_text = last_date_buf;
      last_date = day;
    }
    auto addr = parse_address(line.substr(c1 + 1, c2 - c1 - 1));
    if (!addr) {
      fail("bad address '" + std::string(line.substr(c1 + 1, c2 - c1 - 1)) + "'");
      continue;
    }
    const auto hits_text = line.substr(c2 + 1);
    std::uint64_t hits = 0;
    auto [ptr, ec] = std::from_chars(hits_text.data(), hits_text.data() + hits_text.size(), hits);
    if (ec == std::errc::result_out_of_range) {
      hits = std::numeric_limits<std::uint64_t>::max();
    } else if (ec != std::errc{} || ptr != hits_text.data() + hits_text.size() || hits == 0) {
      fail("bad hit count '" + std::string(hits_text) + "'");
      continue;
    }
    try {
      builder.check_day(day);
    } catch (const RangeError& e) {
      throw RangeError(lines.name() + ":" + std::to_string(lines.line_number()) + ": " + e.what());
    }
    builder.add(*addr, day, hits);
  }
  return std::move(builder).seal();
}

ActivityStore ingest_activity(const std::vector<std::string>& lines, const IngestOptions& options) {
  auto reader = LineReader::from_lines(lines);
  return ingest_activity(reader, options);
}

AddressSet active_set(const ActivityStore& store, DayRange r) {
  store.check_range(r);
  std::vector<AddressSet::Entry> entries;
  for (const auto& m : store.blocks()) {
    auto bits = m.active_addresses(r);
    if (!bits.none()) entries.emplace_back(m.block(), bits);
  }
  return AddressSet::from_sorted_entries(std::move(entries));
}

AddressSet active_set(const ActivityStore& store, int day_lo, int day_hi) {
  return active_set(store, DayRange{day_lo, day_hi});
}

}  // namespace ipact
