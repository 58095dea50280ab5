#include "xlprobe/linguistics/parsing.hpp"

#include <cctype>

namespace xlprobe::ling {

namespace {

// End (exclusive) of the balanced brace span starting at `open`, or npos.
std::size_t balanced_end(std::string_view s, std::size_t open) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = open; i < s.size(); ++i) {
        const char c = s[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{') ++depth;
        else if (c == '}' && --depth == 0) return i + 1;
    }
    return std::string_view::npos;
}

}  // namespace

std::optional<nlohmann::json> extract_json_object(std::string_view text) {
    for (std::size_t open = text.find('{'); open != std::string_view::npos; open = text.find('{', open + 1)) {
        const std::size_t end = balanced_end(text, open);
        if (end == std::string_view::npos) continue;
        auto j = nlohmann::json::parse(text.substr(open, end - open), nullptr, false);
        if (!j.is_discarded() && j.is_object()) return j;
    }
    return std::nullopt;
}

std::string normalize_ws(std::string_view s) {
    std::string out;
    bool pending_space = false;
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(c));
    }
    return out;
}

std::string casefold(std::string_view s) {
    std::string out(s);
    for (auto& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

bool is_blank(std::string_view s) {
    for (unsigned char c : s)
        if (!std::isspace(c)) return false;
    return true;
}

std::string render_choices(const std::vector<std::string>& choices) {
    return nlohmann::json(choices).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string strip_wrapping(std::string_view s) {
    std::string out = normalize_ws(s);
    bool changed = true;
    while (changed && out.size() >= 2) {
        changed = false;
        const char a = out.front(), b = out.back();
        if ((a == '"' && b == '"') || (a == '<' && b == '>') || (a == '\'' && b == '\'') || (a == '{' && b == '}')) {
            out = normalize_ws(std::string_view(out).substr(1, out.size() - 2));
            changed = true;
        }
    }
    return out;
}

}  // namespace xlprobe::ling
