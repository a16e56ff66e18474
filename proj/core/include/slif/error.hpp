#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace slif {

enum class ErrorCode {
    invalid_params,
    unsorted_input,
    nonpositive_horizon,
    nonpositive_ist,
    nonpositive_period,
    zero_count,
    empty_trace,
    empty_curve,
    invalid_config,
    spec_inconsistent,
    infeasible_target,
    step_budget_exceeded,
    io_error,
};

std::string_view to_string(ErrorCode code) noexcept;

// All library failures are reported through this type; `code()` is stable,
// `what()` is human readable and names the offending field where possible.
class Error: public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message):
        std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
    {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace slif
