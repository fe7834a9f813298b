#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flowsift/flow.hpp"

namespace flowsift {

/// Column order of every feature vector.
enum class Feature : std::size_t {
  Log1pTotBytes,
  Log1pTotPkts,
  Log1pBytesPerPkt,
  Log1pDuration,
  SrcToTotBytes,
  ProtocolCode,
  SrcPortBucket,
  DstPortBucket,
  SrcPort,
  DstPort,
};

inline constexpr std::size_t kFeatureCount = 10;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "log1p_totbytes", "log1p_totpkts", "log1p_bytes_per_pkt", "log1p_duration",
    "src_to_tot_bytes", "protocol_code", "src_port_bucket", "dst_port_bucket",
    "src_port", "dst_port"};

/// Sentinel stored in the raw port columns when a flow has no port.
inline constexpr double kMissingPort = -1.0;

constexpr std::size_t index_of(Feature f) { return static_cast<std::size_t>(f); }

/// Columns the logistic pipeline standardizes. Protocol codes and port
/// buckets are categorical and pass through unscaled.
constexpr bool is_scaled_feature(std::size_t column) {
  return column != index_of(Feature::ProtocolCode) &&
         column != index_of(Feature::SrcPortBucket) &&
         column != index_of(Feature::DstPortBucket);
}

/// 0 well-known (<1024), 1 registered (1024..49151), 2 ephemeral (>=49152),
/// 3 missing.
int port_bucket(std::optional<std::uint16_t> port);

/// Fitted encoder state: feature order and protocol label encoding.
struct FeatureSchema {
  std::vector<std::string> feature_names;
  std::map<std::string, int, std::less<>> protocol_codes;
  int unknown_protocol_code = 0;

  int protocol_code(std::string_view protocol) const;
  std::size_t size() const { return feature_names.size(); }
  bool operator==(const FeatureSchema&) const = default;
};

/// Incremental schema fit, usable over a stream of flows.
class SchemaBuilder {
 public:
  void observe(const RawFlow& flow) {
    ++count_;
    if (!protocols_.contains(flow.protocol)) protocols_.emplace(flow.protocol, 0);
  }
  /// Codes are assigned 0..n-1 in lexicographic order of the protocol tokens.
  FeatureSchema finish() const;

 private:
  std::size_t count_ = 0;
  std::map<std::string, int, std::less<>> protocols_;
};

FeatureSchema fit_schema(std::span<const RawFlow> flows);

/// Throws SchemaError unless the schema's feature order is the one extract()
/// produces.
void require_standard_features(const FeatureSchema& schema);

using FeatureVector = std::vector<double>;

void extract_into(const RawFlow& flow, const FeatureSchema& schema, std::span<double> out);
FeatureVector extract(const RawFlow& flow, const FeatureSchema& schema);

/// Dense row-major matrix of feature vectors.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  std::span<double> row(std::size_t i) { return {values.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
  double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }

  /// Copies the given rows, in order.
  FeatureMatrix select(std::span<const std::size_t> indices) const;
};

FeatureMatrix extract_matrix(std::span<const RawFlow> flows, const FeatureSchema& schema);

/// Per-column z-scoring. Columns with scaled[j] == false keep mean 0, std 1.
struct Standardizer {
  static constexpr double kMinStd = 1e-9;

  std::vector<double> means;
  std::vector<double> stds;

  void apply_inplace(std::span<double> v) const;
  FeatureVector apply(std::span<const double> v) const;
  void apply_inplace(FeatureMatrix& m) const;
  bool operator==(const Standardizer&) const = default;
};

/// Population statistics; std floored at kMinStd. An empty mask scales all
/// columns.
Standardizer fit_standardizer(const FeatureMatrix& train, const std::vector<bool>& scaled = {});

/// Mask of is_scaled_feature over the standard feature columns.
std::vector<bool> default_scaled_mask();

}  // namespace flowsift
