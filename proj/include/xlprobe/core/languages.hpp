#pragma once

#include <span>
#include <string>
#include <string_view>

namespace xlprobe {

struct LanguageInfo {
    std::string_view code;
    std::string_view english_name;
    std::string_view native_name;
};

inline constexpr std::string_view kEnglish = "en";

/// The sixteen supported target languages, in a fixed order.
std::span<const LanguageInfo> target_languages();

/// Looks up a target language or English. Returns nullptr for unknown codes.
const LanguageInfo* find_language(std::string_view code);

bool is_target_language(std::string_view code);

/// Throws ConfigError for codes outside the supported set (English excluded).
const LanguageInfo& require_target_language(std::string_view code);

}  // namespace xlprobe
