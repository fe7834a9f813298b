#include "flowsift/ingest.hpp"

#include <zlib.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "flowsift/error.hpp"

namespace flowsift {
namespace {

class GzipStreambuf : public std::streambuf {
 public:
  explicit GzipStreambuf(const std::filesystem::path& path)
      : file_(gzopen(path.c_str(), "rb")) {
    if (file_ == nullptr) throw IoError("cannot open " + path.string());
  }
  ~GzipStreambuf() override { gzclose(file_); }
  GzipStreambuf(const GzipStreambuf&) = delete;
  GzipStreambuf& operator=(const GzipStreambuf&) = delete;

 protected:
  int_type underflow() override {
    if (gptr() < egptr()) return traits_type::to_int_type(*gptr());
    const int n = gzread(file_, buffer_.data(), static_cast<unsigned>(buffer_.size()));
    if (n < 0) throw IoError("gzip read error");
    if (n == 0) return traits_type::eof();
    setg(buffer_.data(), buffer_.data(), buffer_.data() + n);
    return traits_type::to_int_type(*gptr());
  }

 private:
  gzFile file_;
  std::array<char, 1 << 16> buffer_{};
};

class GzipIstream : public std::istream {
 public:
  explicit GzipIstream(const std::filesystem::path& path) : std::istream(nullptr), buf_(path) {
    rdbuf(&buf_);
  }

 private:
  GzipStreambuf buf_;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view token, T& out) {
  token = trim(token);
  if (token.empty()) return false;
  if (token.front() == '+') token.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc{} && ptr == token.data() + token.size();
}

std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

}  // namespace

std::string IngestStats::to_text() const {
  std::ostringstream out;
  out << "rows_read=" << rows_read << " rows_kept=" << rows_kept
      << " rows_dropped=" << rows_dropped;
  for (const auto& [reason, count] : drop_reasons) out << " drop." << reason << '=' << count;
  return out.str();
}

std::optional<std::uint16_t> parse_port(std::string_view token) {
  token = trim(token);
  if (token.empty()) return std::nullopt;
  int base = 10;
  if (token.size() > 2 && token[0] == '0' && (token[1] == 'x' || token[1] == 'X')) {
    token.remove_prefix(2);
    base = 16;
  }
  std::uint32_t value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value, base);
  if (ec != std::errc{} || ptr != token.data() + token.size() || value > 65535)
    return std::nullopt;
  return static_cast<std::uint16_t>(value);
}

std::optional<double> parse_timestamp(std::string_view token) {
  token = trim(token);
  double plain = 0.0;
  if (parse_number(token, plain)) return plain;
  // YYYY/MM/DD hh:mm:ss[.frac]
  if (token.size() < 19) return std::nullopt;
  int year = 0;
  unsigned month = 0, day = 0, hour = 0, minute = 0;
  auto field = [&](std::size_t pos, std::size_t len, auto& out) {
    return parse_number(token.substr(pos, len), out);
  };
  const char sep = token[4];
  if ((sep != '/' && sep != '-') || token[7] != sep || (token[10] != ' ' && token[10] != 'T') ||
      token[13] != ':' || token[16] != ':')
    return std::nullopt;
  double seconds = 0.0;
  if (!field(0, 4, year) || !field(5, 2, month) || !field(8, 2, day) || !field(11, 2, hour) ||
      !field(14, 2, minute) || !parse_number(token.substr(17), seconds))
    return std::nullopt;
  if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59)
    return std::nullopt;
  const auto days = days_from_civil(year, month, day);
  return static_cast<double>(days) * 86400.0 + hour * 3600.0 + minute * 60.0 + seconds;
}

std::vector<std::string_view> split_csv_line(std::string_view line, std::string& scratch) {
  std::vector<std::string_view> fields;
  if (line.find('"') == std::string_view::npos) {
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      if (comma == std::string_view::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    return fields;
  }
  // Quoted fields are unescaped into scratch; views point into it.
  scratch.clear();
  scratch.reserve(line.size());
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  std::size_t begin = 0;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          scratch.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        scratch.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      spans.emplace_back(begin, scratch.size() - begin);
      begin = scratch.size();
    } else {
      scratch.push_back(c);
    }
  }
  spans.emplace_back(begin, scratch.size() - begin);
  std::string_view all(scratch);
  for (auto [pos, len] : spans) fields.push_back(all.substr(pos, len));
  return fields;
}

FlowReader::FlowReader(std::unique_ptr<std::istream> input, ColumnMapping mapping,
                       bool keep_lines)
    : input_(std::move(input)), keep_lines_(keep_lines) {
  if (!input_ || !*input_) throw IoError("unreadable input stream");
  if (!std::getline(*input_, header_line_)) {
    if (input_->bad()) throw IoError("read error");
    throw ConfigError("input has no header line");
  }
  if (!header_line_.empty() && header_line_.back() == '\r') header_line_.pop_back();

  std::string scratch;
  const auto names = split_csv_line(header_line_, scratch);
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < names.size(); ++i) index.emplace(std::string(trim(names[i])), i);
  field_count_ = names.size();

  auto require = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) throw MissingColumnError("missing required column '" + name + "'");
    return it->second;
  };
  cols_.duration = require(mapping.duration);
  cols_.protocol = require(mapping.protocol);
  cols_.src_addr = require(mapping.src_addr);
  cols_.src_port = require(mapping.src_port);
  cols_.dst_addr = require(mapping.dst_addr);
  cols_.dst_port = require(mapping.dst_port);
  cols_.tot_pkts = require(mapping.tot_pkts);
  cols_.tot_bytes = require(mapping.tot_bytes);
  cols_.src_bytes = require(mapping.src_bytes);
  if (auto it = index.find(mapping.start_time); it != index.end()) cols_.start_time = it->second;
  if (mapping.label_required) {
    label_col_ = require(mapping.label);
  } else if (auto it = index.find(mapping.label); it != index.end()) {
    label_col_ = it->second;
  }
}

FlowReader FlowReader::open(const std::filesystem::path& path, ColumnMapping mapping,
                            bool keep_lines) {
  std::unique_ptr<std::istream> stream;
  if (path.extension() == ".gz") {
    stream = std::make_unique<GzipIstream>(path);
  } else {
    auto file = std::make_unique<std::ifstream>(path, std::ios::binary);
    if (!*file) throw IoError("cannot open " + path.string());
    stream = std::move(file);
  }
  return FlowReader(std::move(stream), std::move(mapping), keep_lines);
}

FlowReader::FlowReader(FlowReader&&) noexcept = default;
FlowReader& FlowReader::operator=(FlowReader&&) noexcept = default;
FlowReader::~FlowReader() = default;

void FlowReader::drop(std::string_view reason) {
  ++stats_.rows_dropped;
  auto it = stats_.drop_reasons.find(reason);
  if (it == stats_.drop_reasons.end()) {
    stats_.drop_reasons.emplace(std::string(reason), 1);
  } else {
    ++it->second;
  }
}

std::optional<LabeledFlow> FlowReader::next() {
  while (std::getline(*input_, line_)) {
    if (!line_.empty() && line_.back() == '\r') line_.pop_back();
    if (line_.empty()) continue;
    ++stats_.rows_read;

    const auto fields = split_csv_line(line_, scratch_);
    if (fields.size() != field_count_) {
      drop(drop_reason::kFieldCount);
      continue;
    }

    LabeledFlow out;
    RawFlow& flow = out.flow;
    if (!parse_number(fields[cols_.duration], flow.duration) ||
        !parse_number(fields[cols_.tot_pkts], flow.tot_pkts) ||
        !parse_number(fields[cols_.tot_bytes], flow.tot_bytes) ||
        !parse_number(fields[cols_.src_bytes], flow.src_bytes) || !std::isfinite(flow.duration)) {
      drop(drop_reason::kBadNumeric);
      continue;
    }
    if (flow.duration < 0.0) {
      drop(drop_reason::kNegativeValue);
      continue;
    }
    if (flow.src_bytes > flow.tot_bytes) {
      drop(drop_reason::kSrcExceedsTotal);
      continue;
    }
    if (flow.tot_pkts == 0 && flow.tot_bytes > 0) {
      drop(drop_reason::kBytesWithoutPackets);
      continue;
    }

    if (cols_.start_time) flow.start_time = parse_timestamp(fields[*cols_.start_time]);
    flow.protocol = std::string(trim(fields[cols_.protocol]));
    flow.src_addr = std::string(trim(fields[cols_.src_addr]));
    flow.dst_addr = std::string(trim(fields[cols_.dst_addr]));
    flow.src_port = parse_port(fields[cols_.src_port]);
    flow.dst_port = parse_port(fields[cols_.dst_port]);
    if (label_col_) {
      flow.label_raw = std::string(trim(fields[*label_col_]));
      out.label = parse_label(flow.label_raw);
    }
    if (keep_lines_) out.line = line_;
    ++stats_.rows_kept;
    return out;
  }
  if (input_->bad()) throw IoError("read error");
  return std::nullopt;
}

std::vector<LabeledFlow> read_flows(const std::filesystem::path& path, IngestStats* stats,
                                    const ColumnMapping& mapping) {
  auto reader = FlowReader::open(path, mapping);
  std::vector<LabeledFlow> flows;
  while (auto record = reader.next()) flows.push_back(std::move(*record));
  if (stats != nullptr) *stats = reader.stats();
  return flows;
}

}  // namespace flowsift
