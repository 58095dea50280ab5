#include "xlprobe/linguistics/templates.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include "embedded_templates.hpp"
#include "xlprobe/core/languages.hpp"
#include "xlprobe/core/records.hpp"

namespace xlprobe::ling {
namespace {

constexpr std::array<std::pair<TemplateId, std::string_view>, 8> kIds{{
    {TemplateId::perturb, "perturb"},
    {TemplateId::translate_question, "translate_question"},
    {TemplateId::translate_fragment, "translate_fragment"},
    {TemplateId::answer_zero_shot, "answer_zero_shot"},
    {TemplateId::extract_answer, "extract_answer"},
    {TemplateId::semantic_check, "semantic_check"},
    {TemplateId::direct_perturb_baseline, "direct_perturb_baseline"},
    {TemplateId::categorize, "categorize"},
}};

bool is_name_start(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }
bool is_name_char(char c) { return is_name_start(c) || (c >= '0' && c <= '9'); }

// Calls on_text(span) / on_placeholder(name) over the body in order.
template <typename Text, typename Placeholder>
void scan(std::string_view body, Text on_text, Placeholder on_placeholder) {
    std::size_t i = 0, literal_start = 0;
    while (i < body.size()) {
        if (body[i] == '{' && i + 1 < body.size() && is_name_start(body[i + 1])) {
            std::size_t j = i + 1;
            while (j < body.size() && is_name_char(body[j])) ++j;
            if (j < body.size() && body[j] == '}') {
                on_text(body.substr(literal_start, i - literal_start));
                on_placeholder(std::string(body.substr(i + 1, j - i - 1)));
                i = j + 1;
                literal_start = i;
                continue;
            }
        }
        ++i;
    }
    on_text(body.substr(literal_start));
}

bool valid_language(const std::string& code) { return code == kEnglish || is_target_language(code); }

}  // namespace

std::string_view to_string(TemplateId id) {
    for (const auto& [k, name] : kIds)
        if (k == id) return name;
    return "unknown";
}

TemplateId parse_template_id(std::string_view name) {
    for (const auto& [k, n] : kIds)
        if (n == name) return k;
    throw TemplateError("unknown template id '" + std::string(name) + "'");
}

const std::vector<TemplateId>& all_template_ids() {
    static const std::vector<TemplateId> ids = [] {
        std::vector<TemplateId> v;
        for (const auto& [k, n] : kIds) v.push_back(k);
        return v;
    }();
    return ids;
}

const std::set<std::string>& required_placeholders(TemplateId id) {
    static const std::map<TemplateId, std::set<std::string>> table{
        {TemplateId::perturb, {"question", "answer", "wrong_answer"}},
        {TemplateId::translate_question, {"question", "choices", "ground_truth"}},
        {TemplateId::translate_fragment, {"fragment"}},
        {TemplateId::answer_zero_shot, {"question", "choices"}},
        {TemplateId::extract_answer, {"question", "answer", "choices"}},
        {TemplateId::semantic_check,
         {"original_question", "original_choices", "original_answer", "candidate_question", "candidate_choices",
          "candidate_answer"}},
        {TemplateId::direct_perturb_baseline, {"question"}},
        {TemplateId::categorize, {"question", "choices"}},
    };
    return table.at(id);
}

const std::set<std::string>& optional_placeholders(TemplateId id) {
    static const std::set<std::string> language{"language_name"};
    static const std::set<std::string> none;
    return id == TemplateId::translate_question || id == TemplateId::translate_fragment ? language : none;
}

std::vector<std::string> PromptTemplate::placeholders() const {
    std::vector<std::string> out;
    scan(
        body, [](std::string_view) {},
        [&](const std::string& name) {
            if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
        });
    return out;
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& values) const {
    std::string out;
    out.reserve(body.size() * 2);
    scan(
        body, [&](std::string_view text) { out.append(text); },
        [&](const std::string& name) {
            auto it = values.find(name);
            if (it == values.end())
                throw TemplateError("no value for placeholder {" + name + "} in " + std::string(to_string(id)) + "/" +
                                    language);
            out.append(it->second);
        });
    return out;
}

void PromptTemplate::validate() const {
    const std::string where = std::string(to_string(id)) + "/" + language;
    if (!valid_language(language)) throw TemplateError(where + ": unsupported language");
    const auto names = placeholders();
    const auto& req = required_placeholders(id);
    const auto& opt = optional_placeholders(id);
    for (const auto& r : req)
        if (std::find(names.begin(), names.end(), r) == names.end())
            throw TemplateError(where + ": missing placeholder {" + r + "}");
    for (const auto& n : names)
        if (!req.count(n) && !opt.count(n)) throw TemplateError(where + ": unknown placeholder {" + n + "}");
    // The fallback English templates have to say which language to produce.
    if (language == kEnglish && !opt.empty() && std::find(names.begin(), names.end(), "language_name") == names.end())
        throw TemplateError(where + ": English fallback must use {language_name}");
    if (id == TemplateId::answer_zero_shot) {
        const auto last_nl = body.find_last_not_of(" \t\r\n");
        const auto line_start = body.rfind('\n', last_nl);
        const std::string_view last_line =
            std::string_view(body).substr(line_start == std::string::npos ? 0 : line_start + 1);
        if (last_line.find("\"final_answer\"") == std::string_view::npos)
            throw TemplateError(where + ": must end with a final_answer output block");
    }
}

TemplateRegistry TemplateRegistry::builtin() {
    TemplateRegistry r;
    for (std::size_t i = 0; i < detail::kEmbeddedTemplateCount; ++i) {
        const auto& e = detail::kEmbeddedTemplates[i];
        r.add(PromptTemplate{parse_template_id(e.id), e.language, e.body});
    }
    return r;
}

void TemplateRegistry::add(PromptTemplate t) {
    t.validate();
    auto key = std::make_pair(t.id, t.language);
    templates_.insert_or_assign(std::move(key), std::move(t));
}

void TemplateRegistry::load_dir(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw IoError("template directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        const auto id = parse_template_id(f.parent_path().filename().string());
        add(PromptTemplate{id, f.stem().string(), read_text_file(f)});
    }
}

bool TemplateRegistry::has_exact(TemplateId id, const std::string& language) const {
    return templates_.count({id, language}) != 0;
}

const PromptTemplate& TemplateRegistry::get(TemplateId id, const std::string& language) const {
    if (auto it = templates_.find({id, language}); it != templates_.end()) return it->second;
    if (id != TemplateId::answer_zero_shot) {
        if (auto it = templates_.find({id, std::string(kEnglish)}); it != templates_.end()) return it->second;
    }
    throw MissingTemplate("no " + std::string(to_string(id)) + " template for language '" + language + "'");
}

std::vector<std::pair<TemplateId, std::string>> TemplateRegistry::keys() const {
    std::vector<std::pair<TemplateId, std::string>> out;
    for (const auto& [k, v] : templates_) out.push_back(k);
    return out;
}

void save_template(const std::filesystem::path& dir, const PromptTemplate& t) {
    t.validate();
    write_text_file(dir / std::string(to_string(t.id)) / (t.language + ".txt"), t.body);
}

}  // namespace xlprobe::ling
