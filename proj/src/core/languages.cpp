#include "xlprobe/core/languages.hpp"

#include <array>

#include "xlprobe/core/errors.hpp"

namespace xlprobe {
namespace {

constexpr std::array<LanguageInfo, 16> kTargets{{
    {"zh", "Chinese", "中文"},
    {"ja", "Japanese", "日本語"},
    {"ko", "Korean", "한국어"},
    {"fr", "French", "français"},
    {"es", "Spanish", "español"},
    {"it", "Italian", "italiano"},
    {"uk", "Ukrainian", "українська"},
    {"de", "German", "Deutsch"},
    {"bn", "Bengali", "বাংলা"},
    {"hi", "Hindi", "हिन्दी"},
    {"ar", "Arabic", "العربية"},
    {"he", "Hebrew", "עברית"},
    {"am", "Amharic", "አማርኛ"},
    {"yo", "Yoruba", "Yorùbá"},
    {"sw", "Swahili", "Kiswahili"},
    {"zu", "Zulu", "isiZulu"},
}};

constexpr LanguageInfo kEnglishInfo{"en", "English", "English"};

}  // namespace

std::span<const LanguageInfo> target_languages() { return kTargets; }

const LanguageInfo* find_language(std::string_view code) {
    if (code == kEnglish) return &kEnglishInfo;
    for (const auto& l : kTargets)
        if (l.code == code) return &l;
    return nullptr;
}

bool is_target_language(std::string_view code) {
    return code != kEnglish && find_language(code) != nullptr;
}

const LanguageInfo& require_target_language(std::string_view code) {
    if (!is_target_language(code))
        throw ConfigError("unsupported target language '" + std::string(code) + "'");
    return *find_language(code);
}

}  // namespace xlprobe
