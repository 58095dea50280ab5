#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xlprobe/core/errors.hpp"

namespace xlprobe::ling {

enum class TemplateId {
    perturb,
    translate_question,
    translate_fragment,
    answer_zero_shot,
    extract_answer,
    semantic_check,
    direct_perturb_baseline,
    categorize,
};

std::string_view to_string(TemplateId id);
TemplateId parse_template_id(std::string_view name);
const std::vector<TemplateId>& all_template_ids();

class TemplateError : public Error {
public:
    using Error::Error;
};

class MissingTemplate : public TemplateError {
public:
    using TemplateError::TemplateError;
};

// Placeholders every template of the given id must contain, and the extra
// ones it may contain.
const std::set<std::string>& required_placeholders(TemplateId id);
const std::set<std::string>& optional_placeholders(TemplateId id);

/// Template text with `{name}` placeholders (lowercase identifiers only, so
/// literal JSON braces in output-format blocks are left alone).
struct PromptTemplate {
    TemplateId id = TemplateId::perturb;
    std::string language;
    std::string body;

    // Distinct placeholder names in order of first appearance.
    std::vector<std::string> placeholders() const;

    // Substitutes in one pass; substituted values are never rescanned.
    // Every placeholder in the body needs a value; extra values are ignored.
    std::string render(const std::map<std::string, std::string>& values) const;

    void validate() const;
};

/// Templates keyed by (id, language). Lookups for a language without its
/// own template fall back to the English one, except answer_zero_shot,
/// which must exist for the language being answered in.
class TemplateRegistry {
public:
    // Templates compiled into the binary from assets/templates.
    static TemplateRegistry builtin();

    void add(PromptTemplate t);
    // Reads <dir>/<template_id>/<lang>.txt, overriding existing entries.
    void load_dir(const std::filesystem::path& dir);

    bool has_exact(TemplateId id, const std::string& language) const;
    const PromptTemplate& get(TemplateId id, const std::string& language) const;
    std::vector<std::pair<TemplateId, std::string>> keys() const;

private:
    std::map<std::pair<TemplateId, std::string>, PromptTemplate> templates_;
};

/// Writes `t` to <dir>/<template_id>/<lang>.txt.
void save_template(const std::filesystem::path& dir, const PromptTemplate& t);

}  // namespace xlprobe::ling
