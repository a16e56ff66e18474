#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <slif/neuron.hpp>
#include <slif/stimulus.hpp>

namespace slif {

enum class Scheme {
    exponential_euler, // exponential integrator, coefficients frozen at the step midpoint
    rk4,               // classical fourth-order Runge-Kutta on v
};

std::string_view to_string(Scheme scheme) noexcept;
std::optional<Scheme> scheme_from_string(std::string_view name) noexcept;

// min(tau_s/100, c_m/(g_l + g_max)/10) clamped to [1e-4, 1e-2] ms.
double default_dt(const NeuronParams& params) noexcept;

struct IntegratorConfig {
    double dt = 1.0e-3;                      // [ms]
    Scheme scheme = Scheme::exponential_euler;
    int record_stride = 1;                   // keep every k-th step in a Trace
    std::uint64_t max_steps = 200'000'000;   // per run; exceeding it throws step_budget_exceeded

    static IntegratorConfig defaults_for(const NeuronParams& params);

    void validate() const;

    // Non-empty when dt exceeds a tenth of the fastest time constant:
    // min(tau_s, c_m/g_l, c_m/(g_l + g_max))/10.
    std::optional<std::string> stability_warning(const NeuronParams& params) const;

    bool operator==(const IntegratorConfig&) const = default;
};

struct Trace {
    std::vector<double> times;  // [ms], strictly increasing
    std::vector<double> v;      // [mV]
    std::vector<double> g_s;    // [mS/cm^2]
    std::vector<SpikeEvent> output_spikes;

    std::size_t size() const noexcept { return times.size(); }
    bool empty() const noexcept { return times.empty(); }
};

// Last input time + 10*max(tau_s, c_m/g_l); the membrane time constant is
// capped at 1000 ms so a leak-free membrane still gets a finite window.
double default_horizon(const NeuronParams& params, const SpikeTrain& inputs) noexcept;

// Integrates from `initial` (rest by default) over [0, horizon]. Steps are
// split so every input time is a step boundary. At an input time the spike is
// applied first and the threshold checked second. g_s is always advanced by
// its exact exponential decay; only v goes through the numerical scheme.
Trace simulate(const NeuronParams& params, const SpikeTrain& inputs, double horizon,
               const IntegratorConfig& cfg, bool firing_enabled,
               std::optional<NeuronState> initial = std::nullopt);

// max(v) - v_rest over the recorded samples.
double peak_amplitude(const Trace& trace, double v_rest);

struct PeakMeasurement {
    double amplitude = 0.0; // [mV] above v_rest
    double time = 0.0;      // [ms]
};

// Peak response with firing disabled, without materialising a trace.
// Within each step where dv/dt changes sign from + to -, the maximum of the
// cubic Hermite interpolant is used, so the result is a smooth function of
// the input times and converges at the order of the scheme. Integration
// stops once all inputs have arrived and v is decreasing: after the last
// input g_s only decays, and dv/dt cannot return to zero from below.
PeakMeasurement measure_peak(const NeuronParams& params, const SpikeTrain& inputs,
                             const IntegratorConfig& cfg, std::optional<double> horizon = std::nullopt);

// CSV with header time_ms,v_mV,g_s,spike; LF endings.
void write_trace_csv(std::ostream& out, const Trace& trace);
void write_trace_csv(const std::filesystem::path& path, const Trace& trace);

} // namespace slif
