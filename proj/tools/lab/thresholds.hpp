#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lab/config.hpp"

namespace lab {

struct Threshold {
  std::string name;
  double value;
  std::string meaning;
};

inline constexpr std::string_view kThresholdVersion = "2";

/// The single tolerance table. Acceptance checks and the verification
/// subcommands look values up by name; every manifest embeds it.
const std::vector<Threshold>& thresholds();
double threshold(std::string_view name);
Json thresholds_json();

}  // namespace lab
