#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "flowsift/features.hpp"
#include "flowsift/flow.hpp"
#include "flowsift/random.hpp"

namespace flowsift::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    Rng rng(std::hash<std::string>{}(tag) ^ static_cast<std::uint64_t>(
        std::chrono::steady_clock::now().time_since_epoch().count()));
    path_ = std::filesystem::temp_directory_path() /
            ("flowsift-" + tag + "-" + std::to_string(rng.next() % 1000000007));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline std::vector<ClassLabel> to_labels(const std::vector<int>& v) {
  std::vector<ClassLabel> out;
  for (int x : v) out.push_back(x ? ClassLabel::Botnet : ClassLabel::Benign);
  return out;
}

/// Random matrix whose entries are small integers so that ties are common.
inline FeatureMatrix random_int_matrix(Rng& rng, std::size_t rows, std::size_t cols, int levels) {
  FeatureMatrix m(rows, cols);
  for (auto& v : m.values) v = static_cast<double>(rng.below(static_cast<std::uint64_t>(levels)));
  return m;
}

inline std::vector<ClassLabel> random_labels(Rng& rng, std::size_t n, double p) {
  std::vector<ClassLabel> y(n);
  for (auto& v : y) v = rng.uniform() < p ? ClassLabel::Botnet : ClassLabel::Benign;
  return y;
}

/// Ensures both classes are present.
inline void force_both_classes(std::vector<ClassLabel>& y) {
  if (y.size() < 2) return;
  y[0] = ClassLabel::Botnet;
  y[1] = ClassLabel::Benign;
}

}  // namespace flowsift::testing
