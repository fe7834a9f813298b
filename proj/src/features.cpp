#include "flowsift/features.hpp"

#include <algorithm>
#include <cmath>

#include "flowsift/error.hpp"

namespace flowsift {

int port_bucket(std::optional<std::uint16_t> port) {
  if (!port) return 3;
  if (*port < 1024) return 0;
  if (*port < 49152) return 1;
  return 2;
}

int FeatureSchema::protocol_code(std::string_view protocol) const {
  auto it = protocol_codes.find(protocol);
  return it == protocol_codes.end() ? unknown_protocol_code : it->second;
}

FeatureSchema SchemaBuilder::finish() const {
  if (count_ == 0) throw FitError("cannot fit feature schema on an empty training set");
  FeatureSchema schema;
  schema.feature_names.assign(kFeatureNames.begin(), kFeatureNames.end());
  int code = 0;
  for (const auto& [protocol, unused] : protocols_) schema.protocol_codes.emplace(protocol, code++);
  schema.unknown_protocol_code = code;
  return schema;
}

FeatureSchema fit_schema(std::span<const RawFlow> flows) {
  SchemaBuilder builder;
  for (const auto& flow : flows) builder.observe(flow);
  return builder.finish();
}

void require_standard_features(const FeatureSchema& schema) {
  if (!std::equal(schema.feature_names.begin(), schema.feature_names.end(), kFeatureNames.begin(),
                  kFeatureNames.end()))
    throw SchemaError("model feature layout does not match this build's feature extractor");
}

void extract_into(const RawFlow& flow, const FeatureSchema& schema, std::span<double> out) {
  if (out.size() != kFeatureCount || schema.size() != kFeatureCount)
    throw SchemaError("feature vector length mismatch");
  const auto bytes = static_cast<double>(flow.tot_bytes);
  const auto pkts = static_cast<double>(flow.tot_pkts);
  const double bytes_per_pkt = bytes / std::max(pkts, 1.0);

  out[index_of(Feature::Log1pTotBytes)] = std::log1p(bytes);
  out[index_of(Feature::Log1pTotPkts)] = std::log1p(pkts);
  out[index_of(Feature::Log1pBytesPerPkt)] = std::log1p(bytes_per_pkt);
  out[index_of(Feature::Log1pDuration)] = std::log1p(flow.duration);
  out[index_of(Feature::SrcToTotBytes)] =
      static_cast<double>(flow.src_bytes) / std::max(bytes, 1.0);
  out[index_of(Feature::ProtocolCode)] = schema.protocol_code(flow.protocol);
  out[index_of(Feature::SrcPortBucket)] = port_bucket(flow.src_port);
  out[index_of(Feature::DstPortBucket)] = port_bucket(flow.dst_port);
  out[index_of(Feature::SrcPort)] = flow.src_port ? *flow.src_port : kMissingPort;
  out[index_of(Feature::DstPort)] = flow.dst_port ? *flow.dst_port : kMissingPort;
}

FeatureVector extract(const RawFlow& flow, const FeatureSchema& schema) {
  FeatureVector v(kFeatureCount);
  extract_into(flow, schema, v);
  return v;
}

FeatureMatrix FeatureMatrix::select(std::span<const std::size_t> indices) const {
  FeatureMatrix out(indices.size(), cols);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    auto src = row(indices[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

FeatureMatrix extract_matrix(std::span<const RawFlow> flows, const FeatureSchema& schema) {
  require_standard_features(schema);
  FeatureMatrix m(flows.size(), kFeatureCount);
  for (std::size_t i = 0; i < flows.size(); ++i) extract_into(flows[i], schema, m.row(i));
  return m;
}

void Standardizer::apply_inplace(std::span<double> v) const {
  if (v.size() != means.size()) throw SchemaError("standardizer width mismatch");
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = (v[j] - means[j]) / stds[j];
}

FeatureVector Standardizer::apply(std::span<const double> v) const {
  FeatureVector out(v.begin(), v.end());
  apply_inplace(out);
  return out;
}

void Standardizer::apply_inplace(FeatureMatrix& m) const {
  for (std::size_t i = 0; i < m.rows; ++i) apply_inplace(m.row(i));
}

Standardizer fit_standardizer(const FeatureMatrix& train, const std::vector<bool>& scaled) {
  if (train.rows == 0) throw FitError("cannot fit standardizer on an empty training set");
  if (!scaled.empty() && scaled.size() != train.cols)
    throw ConfigError("scaling mask width does not match matrix");
  Standardizer s;
  s.means.assign(train.cols, 0.0);
  s.stds.assign(train.cols, 1.0);
  const auto n = static_cast<double>(train.rows);
  for (std::size_t j = 0; j < train.cols; ++j) {
    if (!scaled.empty() && !scaled[j]) continue;
    double sum = 0.0;
    for (std::size_t i = 0; i < train.rows; ++i) sum += train.at(i, j);
    const double mean = sum / n;
    double sq = 0.0;
    for (std::size_t i = 0; i < train.rows; ++i) {
      const double d = train.at(i, j) - mean;
      sq += d * d;
    }
    s.means[j] = mean;
    s.stds[j] = std::max(std::sqrt(sq / n), Standardizer::kMinStd);
  }
  return s;
}

std::vector<bool> default_scaled_mask() {
  std::vector<bool> mask(kFeatureCount);
  for (std::size_t j = 0; j < kFeatureCount; ++j) mask[j] = is_scaled_feature(j);
  return mask;
}

}  // namespace flowsift
