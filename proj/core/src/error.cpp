#include <slif/error.hpp>

namespace slif {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::invalid_params: return "invalid-params";
    case ErrorCode::unsorted_input: return "unsorted-input";
    case ErrorCode::nonpositive_horizon: return "nonpositive-horizon";
    case ErrorCode::nonpositive_ist: return "nonpositive-ist";
    case ErrorCode::nonpositive_period: return "nonpositive-period";
    case ErrorCode::zero_count: return "zero-count";
    case ErrorCode::empty_trace: return "empty-trace";
    case ErrorCode::empty_curve: return "empty-curve";
    case ErrorCode::invalid_config: return "config-invalid";
    case ErrorCode::spec_inconsistent: return "spec-inconsistent";
    case ErrorCode::infeasible_target: return "infeasible-target";
    case ErrorCode::step_budget_exceeded: return "step-budget-exceeded";
    case ErrorCode::io_error: return "io-error";
    }
    return "unknown";
}

} // namespace slif
