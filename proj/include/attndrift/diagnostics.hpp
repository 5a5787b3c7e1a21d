#pragma once

#include <string>
#include <vector>

namespace attndrift {

// Non-fatal notices collected during a computation (warnings, skipped inputs).
struct Diagnostics {
    std::vector<std::string> warnings;

    void warn(std::string message) { warnings.push_back(std::move(message)); }
};

inline void warn(Diagnostics* diag, std::string message) {
    if (diag) diag->warn(std::move(message));
}

}  // namespace attndrift
