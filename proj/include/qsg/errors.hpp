#pragma once

#include <stdexcept>
#include <string>

namespace qsg {

// Exit-code taxonomy used by the CLI: 0 ok, 2 usage, 3 capacity, 4 numerical health.

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Requested work exceeds a configured size/memory/op budget. Message carries an estimate.
struct capacity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Overflow, non-convergence, or an imaginary leak above tolerance.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed array shapes (e.g. transform length not a power of 4).
struct shape_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Arguments outside an operation's domain (e.g. order comparison off the D set).
struct domain_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const capacity_error*>(&e)) return 3;
    if (dynamic_cast<const numerical_error*>(&e)) return 4;
    return 2;
}

}  // namespace qsg
