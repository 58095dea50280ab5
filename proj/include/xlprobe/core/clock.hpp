#pragma once

#include <chrono>
#include <cstdint>

namespace xlprobe {

// Time source for timestamps that land in output records. Offline and replay
// runs use a fixed clock so repeated runs produce identical bytes.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::int64_t now_ms() const = 0;
};

class SystemClock final : public Clock {
public:
    std::int64_t now_ms() const override {
        using namespace std::chrono;
        return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
    }
};

class FixedClock final : public Clock {
public:
    explicit FixedClock(std::int64_t ms = 0) : ms_(ms) {}
    std::int64_t now_ms() const override { return ms_; }

private:
    std::int64_t ms_;
};

}  // namespace xlprobe
