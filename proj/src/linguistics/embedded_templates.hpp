#pragma once

#include <cstddef>

namespace xlprobe::ling::detail {

struct EmbeddedTemplate {
    const char* id;
    const char* language;
    const char* body;
};

extern const EmbeddedTemplate kEmbeddedTemplates[];
extern const std::size_t kEmbeddedTemplateCount;

}  // namespace xlprobe::ling::detail
