#pragma once

#include <stdexcept>
#include <string>

namespace mai {

enum class ErrorCode {
    invalid_argument,
    parse,
    config,
    io,
    runtime,
    dimension_mismatch,
    empty_input,
    negative_weight,
    infinite_bar_mismatch,
    not_a_cycle,
    unknown_shape,
    unknown_class_id,
    unknown_ablation,
    no_retrieval,
    no_shared_anchor,
    insufficient_episodes,
    degenerate_series,
    target_unreachable,
};

/// Single exception type carrying a machine-readable code plus a message.
/// The C API maps codes onto its status enum at the boundary.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace mai
