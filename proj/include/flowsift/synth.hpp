#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <vector>

#include "flowsift/flow.hpp"

namespace flowsift {

struct SynthConfig {
  std::size_t n = 10000;
  double prevalence = 0.0248;
  std::uint64_t seed = 0;
  /// How far botnet distributions move away from benign ones; 0 makes the
  /// label independent of every field.
  double separation = 1.0;

  void validate() const;
};

struct SynthFlow {
  RawFlow flow;
  ClassLabel label = ClassLabel::Benign;
};

/// Heavy-tailed synthetic flows with exactly round(n * prevalence) botnet rows
/// in shuffled order.
///
/// Benign traffic: log-normal packet counts, a two-mode bytes-per-packet
/// mixture (small control packets and bulk transfers), a right-skewed
/// duration and a logit-normal source byte share. Botnet traffic moves away
/// from that in proportion to `separation`: bytes-per-packet shifted off the
/// small-packet mode, a larger source byte share, tighter durations, ICMP and
/// TCP over-represented, and part of the flows aimed at a few C&C ports.
std::vector<SynthFlow> generate(const SynthConfig& config);

/// Binetflow CSV with the ingestion default header.
void write_binetflow(std::ostream& out, std::span<const SynthFlow> flows);
void write_binetflow(const std::filesystem::path& path, std::span<const SynthFlow> flows);

}  // namespace flowsift
