#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "flowsift/flow.hpp"

namespace flowsift {

struct SplitSpec {
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
};

struct SplitIndices {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

/// Per class: shuffle that class's indices with a seeded generator and send
/// the first floor(n_c * train_fraction) to train, the rest to test.
/// Throws StratificationError if either split would lack a class.
SplitIndices stratified_split(std::span<const ClassLabel> labels, const SplitSpec& spec);

/// Writes "index,split" rows (split is "train" or "test"), ordered by index.
void write_split_csv(const std::filesystem::path& path, const SplitIndices& split);
SplitIndices read_split_csv(const std::filesystem::path& path);

double prevalence(std::span<const ClassLabel> labels);

}  // namespace flowsift
