#include <slif/neuron.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <slif/error.hpp>

namespace slif {

std::string_view to_string(ModelKind kind) noexcept {
    return kind == ModelKind::lif ? "lif" : "slif";
}

std::string_view to_string(SpikeMode mode) noexcept {
    return mode == SpikeMode::saturate ? "saturate" : "incremental";
}

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::invalid_params, what);
}

bool finite(double x) { return std::isfinite(x); }

} // namespace

void NeuronParams::validate() const {
    require(finite(c_m) && c_m > 0, "c_m must be > 0");
    require(finite(g_l) && g_l >= 0, "g_l must be >= 0");
    require(finite(v_rest), "v_rest must be finite");
    require(finite(v_th) && v_th > v_rest, "v_th must be > v_rest");
    require(finite(e_s), "e_s must be finite");
    require(v_th <= e_s, "v_th must be <= e_s");
    require(finite(g_max) && g_max > 0, "g_max must be > 0");
    require(finite(tau_s) && tau_s > 0, "tau_s must be > 0");
    require(finite(w) && w > 0, "w must be > 0");
    if (spike_mode == SpikeMode::incremental) {
        require(finite(delta_g) && delta_g > 0, "delta_g must be > 0");
    }
}

double NeuronParams::membrane_tau() const noexcept {
    return g_l > 0 ? c_m/g_l : std::numeric_limits<double>::infinity();
}

NeuronState rest_state(const NeuronParams& params) noexcept {
    return {params.v_rest, 0.0};
}

Derivative derivative(const NeuronParams& params, const NeuronState& state) {
    params.validate();
    if (params.kind == ModelKind::lif) {
        return {-params.g_l*(state.v - params.v_rest)/params.c_m, 0.0};
    }
    return {membrane_rhs(params, state.v, state.g_s), -state.g_s/params.tau_s};
}

NeuronState apply_input_spike(const NeuronParams& params, const NeuronState& state) noexcept {
    NeuronState out = state;
    if (params.kind == ModelKind::lif) {
        out.v += params.w/params.c_m;
        return out;
    }
    if (params.spike_mode == SpikeMode::saturate) {
        out.g_s = params.g_max;
    }
    else {
        out.g_s = std::min(state.g_s + params.delta_g, params.g_max);
    }
    return out;
}

ThresholdResult check_threshold(const NeuronParams& params, const NeuronState& state) noexcept {
    if (state.v >= params.v_th) {
        return {true, {params.v_rest, state.g_s}};
    }
    return {false, state};
}

} // namespace slif
