#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "xlprobe/core/model_spec.hpp"

namespace xlprobe::gateway {

struct BackendReply {
    std::string text;
    std::optional<std::int64_t> prompt_tokens;
    std::optional<std::int64_t> completion_tokens;
};

/// One model transport. Implementations throw BackendError on failure and
/// must be safe to call from several threads at once.
class Backend {
public:
    virtual ~Backend() = default;
    virtual BackendReply invoke(const ModelSpec& model, const std::string& prompt, double temperature,
                                int max_tokens) = 0;
    // True when invoke() performs network I/O.
    virtual bool is_network() const { return false; }
};

}  // namespace xlprobe::gateway
