// SPDX-License-Identifier: Apache-2.0
#include "ipact/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <unistd.h>
#include <zlib.h>

#include "ipact/error.hpp"

namespace ipact {

namespace {

constexpr std::size_t kChunk = 1 << 20;

struct GzCloser {
  void operator()(gzFile_s* f) const noexcept { gzclose(f); }
};

}  // namespace

LineReader::LineReader(Source source, std::string name)
    : source_(std::move(source)), name_(std::move(name)), buf_(kChunk) {}

LineReader::LineReader(LineReader&&) noexcept = default;
LineReader& LineReader::operator=(LineReader&&) noexcept = default;
LineReader::~LineReader() = default;

LineReader LineReader::open(const std::filesystem::path& path) {
  gzFile raw = gzopen(path.c_str(), "rb");
  if (raw == nullptr) throw Error("cannot open " + path.string());
  gzbuffer(raw, 1 << 18);
  std::shared_ptr<gzFile_s> file(raw, GzCloser{});
  std::string name = path.string();
  return LineReader(
      [file, name](char* dst, std::size_t n) -> std::size_t {
        const int got = gzread(file.get(), dst, static_cast<unsigned>(n));
        if (got < 0) throw Error("read error in " + name);
        return static_cast<std::size_t>(got);
      },
      name);
}

LineReader LineReader::from_string(std::string content, std::string name) {
  auto data = std::make_shared<std::string>(std::move(content));
  auto pos = std::make_shared<std::size_t>(0);
  return LineReader(
      [data, pos](char* dst, std::size_t n) -> std::size_t {
        const std::size_t k = std::min(n, data->size() - *pos);
        std::memcpy(dst, data->data() + *pos, k);
        *pos += k;
        return k;
      },
      std::move(name));
}

LineReader LineReader::from_lines(const std::vector<std::string>& lines, std::string name) {
  std::string joined;
  for (const auto& l : lines) {
    joined += l;
    joined += '\n';
  }
  return from_string(std::move(joined), std::move(name));
}

bool LineReader::fill() {
  if (eof_) return false;
  if (begin_ > 0) {
    std::memmove(buf_.data(), buf_.data() + begin_, end_ - begin_);
    end_ -= begin_;
    begin_ = 0;
  }
  if (end_ == buf_.size()) buf_.resize(buf_.size() * 2);
  const std::size_t got = source_(buf_.data() + end_, buf_.size() - end_);
  if (got == 0) {
    eof_ = true;
    return false;
  }
  end_ += got;
  return true;
}

bool LineReader::next(std::string_view& line) {
  std::size_t scan = begin_;
  for (;;) {
    const void* nl = std::memchr(buf_.data() + scan, '\n', end_ - scan);
    if (nl != nullptr) {
      const auto pos = static_cast<std::size_t>(static_cast<const char*>(nl) - buf_.data());
      std::size_t len = pos - begin_;
      if (len > 0 && buf_[begin_ + len - 1] == '\r') --len;
      line = std::string_view(buf_.data() + begin_, len);
      begin_ = pos + 1;
      ++line_no_;
      return true;
    }
    const std::size_t consumed = end_ - begin_;
    if (!fill()) {
      if (end_ == begin_) return false;
      std::size_t len = end_ - begin_;
      if (len > 0 && buf_[begin_ + len - 1] == '\r') --len;
      line = std::string_view(buf_.data() + begin_, len);
      begin_ = end_;
      ++line_no_;
      return true;
    }
    scan = begin_ + consumed;
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view data) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot rename into " + path.string() + ": " + ec.message());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool split_csv_record(std::string_view line, std::vector<std::string>& fields) {
  fields.clear();
  std::size_t i = 0;
  for (;;) {
    std::string field;
    if (i < line.size() && line[i] == '"') {
      ++i;
      bool closed = false;
      while (i < line.size()) {
        if (line[i] == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field += '"';
            i += 2;
          } else {
            ++i;
            closed = true;
            break;
          }
        } else {
          field += line[i++];
        }
      }
      if (!closed) return false;
      if (i < line.size() && line[i] != ',') return false;
    } else {
      const auto comma = line.find(',', i);
      const auto stop = comma == std::string_view::npos ? line.size() : comma;
      field.assign(line.substr(i, stop - i));
      if (field.find('"') != std::string::npos) return false;
      i = stop;
    }
    fields.push_back(std::move(field));
    if (i >= line.size()) return true;
    ++i;  // skip comma
    if (i == line.size()) {
      fields.emplace_back();
      return true;
    }
  }
}

std::string csv_quote(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace ipact
