#pragma once

#include <string_view>

namespace slif {

// Unit system used throughout the library:
//   time          ms
//   potential     mV
//   capacitance   uF/cm^2
//   conductance   mS/cm^2   (so capacitance / conductance is in ms)
//   charge        nC/cm^2   (uF/cm^2 * mV)

enum class ModelKind {
    lif,  // leaky integrate-and-fire, delta-current input
    slif, // saturating conductance synapse
};

// How an input impulse acts on the synaptic conductance.
enum class SpikeMode {
    saturate,    // g_s <- g_max
    incremental, // g_s <- min(g_s + delta_g, g_max)
};

std::string_view to_string(ModelKind kind) noexcept;
std::string_view to_string(SpikeMode mode) noexcept;

// Default saturation bound of the synaptic conductance [mS/cm^2].
inline constexpr double default_g_max = 6.8e-6;

// Reference neuron: the calibration of reference_calibration_target()
// (calibrate.hpp) with g_max = default_g_max, stored at full precision.
inline constexpr double reference_c_m = 8.3048953870775181e-05;   // [uF/cm^2]
inline constexpr double reference_g_l = 6.8118363312203998e-05;   // [mS/cm^2]
inline constexpr double reference_tau_s = 12.000431315656956;    // [ms]

struct NeuronParams {
    ModelKind kind = ModelKind::slif;
    double c_m = reference_c_m;    // membrane capacitance [uF/cm^2]
    double g_l = reference_g_l;    // leak conductance [mS/cm^2]
    double v_rest = -65.0;         // resting potential [mV]
    double v_th = 0.0;             // firing threshold [mV]
    double e_s = 0.0;              // synaptic reversal potential [mV]
    double g_max = default_g_max;  // synaptic conductance bound [mS/cm^2]
    double tau_s = reference_tau_s; // synaptic time constant [ms]
    double w = 4.0e-4;             // LIF per-impulse charge [nC/cm^2], ~4.8 mV at reference c_m
    SpikeMode spike_mode = SpikeMode::saturate;
    double delta_g = default_g_max; // increment for SpikeMode::incremental [mS/cm^2]

    // Throws Error(invalid_params) naming the first violated invariant.
    void validate() const;

    // c_m / g_l [ms]; infinite when g_l == 0.
    double membrane_tau() const noexcept;

    bool operator==(const NeuronParams&) const = default;
};

struct NeuronState {
    double v = 0.0;   // [mV]
    double g_s = 0.0; // [mS/cm^2]

    bool operator==(const NeuronState&) const = default;
};

// v = v_rest, g_s = 0.
NeuronState rest_state(const NeuronParams& params) noexcept;

enum class SpikeSource { input, output };

struct SpikeEvent {
    double time = 0.0; // [ms]
    SpikeSource source = SpikeSource::input;

    bool operator==(const SpikeEvent&) const = default;
};

struct Derivative {
    double dv_dt = 0.0;   // [mV/ms]
    double dgs_dt = 0.0;  // [mS/cm^2/ms]
};

// Right-hand side of the membrane and synapse equations. The LIF delta input
// is not part of the continuous dynamics; see apply_input_spike.
Derivative derivative(const NeuronParams& params, const NeuronState& state);

// Unchecked right-hand side for v, for use inside integration loops on
// parameters that were validated up front.
inline double membrane_rhs(const NeuronParams& p, double v, double g_s) noexcept {
    return (-p.g_l*(v - p.v_rest) + g_s*(p.e_s - v))/p.c_m;
}

NeuronState apply_input_spike(const NeuronParams& params, const NeuronState& state) noexcept;

struct ThresholdResult {
    bool fired = false;
    NeuronState state;
};

// Fires iff v >= v_th; resets v to v_rest and leaves g_s untouched.
ThresholdResult check_threshold(const NeuronParams& params, const NeuronState& state) noexcept;

} // namespace slif
