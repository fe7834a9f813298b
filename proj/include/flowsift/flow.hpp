#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace flowsift {

enum class ClassLabel : std::uint8_t { Benign = 0, Botnet = 1 };

constexpr int to_int(ClassLabel label) { return label == ClassLabel::Botnet ? 1 : 0; }

/// One NetFlow-like record as read from a binetflow file.
struct RawFlow {
  std::optional<double> start_time;  // epoch seconds, absent if unparseable
  double duration = 0.0;
  std::string protocol;
  std::string src_addr;
  std::optional<std::uint16_t> src_port;
  std::string dst_addr;
  std::optional<std::uint16_t> dst_port;
  std::uint64_t tot_pkts = 0;
  std::uint64_t tot_bytes = 0;
  std::uint64_t src_bytes = 0;
  std::string label_raw;
};

/// Botnet iff the label contains "botnet" (case-insensitive). Normal and
/// background traffic both map to Benign.
ClassLabel parse_label(std::string_view label_raw);

}  // namespace flowsift
