#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace xlprobe::ling {

// First balanced {...} span in `text` that parses as a JSON object.
std::optional<nlohmann::json> extract_json_object(std::string_view text);

// Trims and collapses internal whitespace runs to one space.
std::string normalize_ws(std::string_view s);

// ASCII lowercase; other bytes are left as they are.
std::string casefold(std::string_view s);

bool is_blank(std::string_view s);

// Renders choices as a JSON array, the form every template expects.
std::string render_choices(const std::vector<std::string>& choices);

// Strips surrounding quotes and angle brackets left over from
// `<placeholder>`-style output formats.
std::string strip_wrapping(std::string_view s);

}  // namespace xlprobe::ling
