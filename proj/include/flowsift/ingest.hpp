#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flowsift/flow.hpp"

namespace flowsift {

/// Maps logical RawFlow fields to CSV column names. Defaults follow the
/// binetflow header (StartTime,Dur,Proto,SrcAddr,Sport,Dir,DstAddr,Dport,
/// State,sTos,dTos,TotPkts,TotBytes,SrcBytes,Label).
struct ColumnMapping {
  std::string start_time = "StartTime";
  std::string duration = "Dur";
  std::string protocol = "Proto";
  std::string src_addr = "SrcAddr";
  std::string src_port = "Sport";
  std::string dst_addr = "DstAddr";
  std::string dst_port = "Dport";
  std::string tot_pkts = "TotPkts";
  std::string tot_bytes = "TotBytes";
  std::string src_bytes = "SrcBytes";
  std::string label = "Label";
  bool label_required = true;
};

/// Drop reason tags.
namespace drop_reason {
inline constexpr std::string_view kFieldCount = "field_count";
inline constexpr std::string_view kBadNumeric = "bad_numeric";
inline constexpr std::string_view kNegativeValue = "negative_value";
inline constexpr std::string_view kSrcExceedsTotal = "src_exceeds_total";
inline constexpr std::string_view kBytesWithoutPackets = "bytes_without_packets";
}  // namespace drop_reason

struct IngestStats {
  std::uint64_t rows_read = 0;
  std::uint64_t rows_kept = 0;
  std::uint64_t rows_dropped = 0;
  std::map<std::string, std::uint64_t, std::less<>> drop_reasons;

  /// Single-line key=value rendering for the diagnostics channel.
  std::string to_text() const;
};

struct LabeledFlow {
  RawFlow flow;
  std::optional<ClassLabel> label;  // absent when the input has no label column
  std::string line;                 // raw input line, only filled when requested
};

/// Decimal or "0x"-prefixed hexadecimal port; absent when empty, malformed
/// or outside 0..65535.
std::optional<std::uint16_t> parse_port(std::string_view token);

/// "YYYY/MM/DD hh:mm:ss[.frac]" (or '-' separated), or plain seconds.
std::optional<double> parse_timestamp(std::string_view token);

/// Splits one CSV line. Double-quoted fields may contain commas.
std::vector<std::string_view> split_csv_line(std::string_view line, std::string& scratch);

/// Single-pass reader over a header-prefixed binetflow CSV. Malformed rows are
/// skipped and counted; memory use does not grow with input length.
class FlowReader {
 public:
  FlowReader(std::unique_ptr<std::istream> input, ColumnMapping mapping = {},
             bool keep_lines = false);

  /// Opens a file; names ending in ".gz" are decompressed on the fly.
  static FlowReader open(const std::filesystem::path& path, ColumnMapping mapping = {},
                         bool keep_lines = false);

  FlowReader(FlowReader&&) noexcept;
  FlowReader& operator=(FlowReader&&) noexcept;
  ~FlowReader();

  /// Next clean record, or nullopt at end of stream.
  std::optional<LabeledFlow> next();

  const IngestStats& stats() const { return stats_; }
  const std::string& header_line() const { return header_line_; }
  bool has_labels() const { return label_col_.has_value(); }

 private:
  struct Columns {
    std::size_t duration, protocol, src_addr, src_port, dst_addr, dst_port, tot_pkts,
        tot_bytes, src_bytes;
    std::optional<std::size_t> start_time;
  };

  void drop(std::string_view reason);

  std::unique_ptr<std::istream> input_;
  bool keep_lines_;
  std::string header_line_;
  std::size_t field_count_ = 0;
  Columns cols_{};
  std::optional<std::size_t> label_col_;
  IngestStats stats_;
  std::string line_;
  std::string scratch_;
};

/// Reads every clean record of a file into memory.
std::vector<LabeledFlow> read_flows(const std::filesystem::path& path,
                                    IngestStats* stats = nullptr,
                                    const ColumnMapping& mapping = {});

}  // namespace flowsift
