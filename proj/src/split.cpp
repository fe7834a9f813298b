#include "flowsift/split.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "flowsift/error.hpp"
#include "flowsift/random.hpp"

namespace flowsift {

SplitIndices stratified_split(std::span<const ClassLabel> labels, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw ConfigError("train_fraction must lie in (0, 1)");

  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[to_int(labels[i])].push_back(i);

  SplitIndices out;
  for (int c = 0; c < 2; ++c) {
    auto& members = by_class[c];
    const auto n_train =
        static_cast<std::size_t>(std::floor(static_cast<double>(members.size()) * spec.train_fraction));
    if (members.size() < 2 || n_train == 0 || n_train == members.size())
      throw StratificationError("class " + std::to_string(c) + " has " +
                                std::to_string(members.size()) +
                                " examples; both splits need at least one");
    Rng rng(derive_seed(spec.seed, SeedPurpose::Split, static_cast<std::uint64_t>(c)));
    rng.shuffle(std::span<std::size_t>(members));
    out.train.insert(out.train.end(), members.begin(), members.begin() + n_train);
    out.test.insert(out.test.end(), members.begin() + n_train, members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

void write_split_csv(const std::filesystem::path& path, const SplitIndices& split) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "index,split\n";
  std::size_t a = 0, b = 0;
  while (a < split.train.size() || b < split.test.size()) {
    if (b == split.test.size() || (a < split.train.size() && split.train[a] < split.test[b])) {
      out << split.train[a++] << ",train\n";
    } else {
      out << split.test[b++] << ",test\n";
    }
  }
}

SplitIndices read_split_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  SplitIndices split;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("malformed split row: " + line);
    const auto index = static_cast<std::size_t>(std::stoull(line.substr(0, comma)));
    const auto tag = line.substr(comma + 1);
    if (tag == "train") {
      split.train.push_back(index);
    } else if (tag == "test") {
      split.test.push_back(index);
    } else {
      throw ConfigError("unknown split tag: " + tag);
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

double prevalence(std::span<const ClassLabel> labels) {
  if (labels.empty()) return 0.0;
  const auto pos = std::count(labels.begin(), labels.end(), ClassLabel::Botnet);
  return static_cast<double>(pos) / static_cast<double>(labels.size());
}

}  // namespace flowsift
