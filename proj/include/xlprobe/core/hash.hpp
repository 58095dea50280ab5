#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace xlprobe {

std::string sha256_hex(std::string_view data);

// Hashes a sequence of fields with length-prefixed framing so that
// ("ab","c") and ("a","bc") never collide. Returns 16 hex chars.
std::string content_id(std::initializer_list<std::string_view> parts);
std::string content_id(const std::vector<std::string>& parts);

std::uint64_t fnv1a64(std::string_view data);

}  // namespace xlprobe
