#pragma once

#include <optional>

#include "xlprobe/core/types.hpp"

namespace xlprobe::search {

/// V = english_mean^gamma - target_mean. Throws std::domain_error when a
/// mean is outside [0, 1] or gamma <= 1.
double score(double english_mean, double target_mean, double gamma);

/// seeds_converted / seeds_attempted; nullopt when nothing was attempted.
std::optional<double> conversion_rate(const SearchRunStats& stats);

}  // namespace xlprobe::search
