#include "xlprobe/search/score.hpp"

#include <cmath>
#include <stdexcept>

namespace xlprobe::search {

double score(double english_mean, double target_mean, double gamma) {
    if (!(english_mean >= 0.0 && english_mean <= 1.0)) throw std::domain_error("english mean outside [0, 1]");
    if (!(target_mean >= 0.0 && target_mean <= 1.0)) throw std::domain_error("target mean outside [0, 1]");
    if (!(gamma > 1.0)) throw std::domain_error("score exponent must exceed 1");
    return std::pow(english_mean, gamma) - target_mean;
}

std::optional<double> conversion_rate(const SearchRunStats& stats) {
    if (stats.seeds_attempted <= 0) return std::nullopt;
    return static_cast<double>(stats.seeds_converted) / static_cast<double>(stats.seeds_attempted);
}

}  // namespace xlprobe::search
