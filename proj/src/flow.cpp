#include "flowsift/flow.hpp"

#include <algorithm>
#include <cctype>

namespace flowsift {

ClassLabel parse_label(std::string_view label_raw) {
  constexpr std::string_view needle = "botnet";
  auto it = std::search(label_raw.begin(), label_raw.end(), needle.begin(), needle.end(),
                        [](char a, char b) {
                          return std::tolower(static_cast<unsigned char>(a)) == b;
                        });
  return it == label_raw.end() ? ClassLabel::Benign : ClassLabel::Botnet;
}

}  // namespace flowsift
