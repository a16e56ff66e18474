#include <slif/integrator.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <ostream>

#include <slif/error.hpp>
#include "text.hpp"

namespace slif {

std::string_view to_string(Scheme scheme) noexcept {
    return scheme == Scheme::rk4 ? "rk4" : "exponential-euler";
}

std::optional<Scheme> scheme_from_string(std::string_view name) noexcept {
    if (name == "exponential-euler") return Scheme::exponential_euler;
    if (name == "rk4") return Scheme::rk4;
    return std::nullopt;
}

double default_dt(const NeuronParams& params) noexcept {
    double tau_fast = params.kind == ModelKind::slif ? params.c_m/(params.g_l + params.g_max) : params.membrane_tau();
    return std::clamp(std::min(params.tau_s/100.0, tau_fast/10.0), 1.0e-4, 1.0e-2);
}

IntegratorConfig IntegratorConfig::defaults_for(const NeuronParams& params) {
    IntegratorConfig cfg;
    cfg.dt = default_dt(params);
    return cfg;
}

void IntegratorConfig::validate() const {
    if (!(dt > 0) || !std::isfinite(dt)) throw Error(ErrorCode::invalid_config, "dt must be > 0");
    if (record_stride < 1) throw Error(ErrorCode::invalid_config, "record_stride must be >= 1");
    if (max_steps == 0) throw Error(ErrorCode::invalid_config, "max_steps must be >= 1");
}

std::optional<std::string> IntegratorConfig::stability_warning(const NeuronParams& params) const {
    double tau_fast = params.kind == ModelKind::slif ? params.c_m/(params.g_l + params.g_max) : params.membrane_tau();
    double limit = std::min({params.tau_s, params.membrane_tau(), tau_fast})/10.0;
    if (dt > limit) {
        return "dt = " + detail::format_double(dt) + " ms exceeds min(tau_s, c_m/g_l, c_m/(g_l + g_max))/10 = "
             + detail::format_double(limit) + " ms";
    }
    return std::nullopt;
}

double default_horizon(const NeuronParams& params, const SpikeTrain& inputs) noexcept {
    double last = inputs.empty() ? 0.0 : inputs.back();
    double tau_m = std::min(params.membrane_tau(), 1000.0);
    return last + 10.0*std::max(params.tau_s, tau_m);
}

namespace {

// Advances v by one step of length h given g_s at the start of the step.
// g_s(t0 + s) = g0*exp(-s/tau_s) is evaluated exactly inside the step.
class Stepper {
public:
    Stepper(const NeuronParams& p, Scheme scheme): p_(p), scheme_(scheme) {}

    double advance_v(double v, double g0, double h) const {
        if (scheme_ == Scheme::exponential_euler) {
            double g_mid = g0 == 0.0 ? 0.0 : g0*std::exp(-0.5*h/p_.tau_s);
            double g_tot = p_.g_l + g_mid;
            if (g_tot == 0.0) return v;
            double v_inf = (p_.g_l*p_.v_rest + g_mid*p_.e_s)/g_tot;
            return v_inf + (v - v_inf)*std::exp(-g_tot*h/p_.c_m);
        }
        double g_half = g0 == 0.0 ? 0.0 : g0*std::exp(-0.5*h/p_.tau_s);
        double g_end = g0 == 0.0 ? 0.0 : g0*std::exp(-h/p_.tau_s);
        double k1 = membrane_rhs(p_, v, g0);
        double k2 = membrane_rhs(p_, v + 0.5*h*k1, g_half);
        double k3 = membrane_rhs(p_, v + 0.5*h*k2, g_half);
        double k4 = membrane_rhs(p_, v + h*k3, g_end);
        return v + h/6.0*(k1 + 2.0*k2 + 2.0*k3 + k4);
    }

    double advance_g(double g0, double h) const {
        return g0 == 0.0 ? 0.0 : g0*std::exp(-h/p_.tau_s);
    }

private:
    const NeuronParams& p_;
    Scheme scheme_;
};

double rhs(const NeuronParams& p, const NeuronState& s) noexcept {
    return membrane_rhs(p, s.v, s.g_s);
}

// Number of uniform substeps covering a segment of length `span` with steps <= dt.
std::uint64_t substeps(double span, double dt) {
    double n = std::ceil(span/dt*(1.0 - 1.0e-12));
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(n));
}

void check_inputs(const NeuronParams& params, const SpikeTrain& inputs, double horizon,
                  const IntegratorConfig& cfg) {
    params.validate();
    cfg.validate();
    if (!(horizon > 0) || !std::isfinite(horizon)) {
        throw Error(ErrorCode::nonpositive_horizon, "horizon must be > 0");
    }
    if (!inputs.empty() && !(inputs.back() < horizon)) {
        throw Error(ErrorCode::unsorted_input, "all input times must be < horizon");
    }
}

// Maximum of the cubic Hermite interpolant on a step of length h, if it has
// an interior maximum.
std::optional<std::pair<double, double>> hermite_max(double v0, double d0, double v1, double d1, double h) {
    double delta = v1 - v0;
    double a = 3.0*(h*(d0 + d1) - 2.0*delta);
    double b = 2.0*(3.0*delta - h*(2.0*d0 + d1));
    double c = h*d0;
    auto eval = [&](double s) {
        return v0 + s*(h*d0 + s*((3.0*delta - h*(2.0*d0 + d1)) + s*(h*(d0 + d1) - 2.0*delta)));
    };
    std::array<double, 2> roots{};
    int n = 0;
    if (std::abs(a) < 1e-300) {
        if (b != 0.0) roots[n++] = -c/b;
    }
    else {
        double disc = b*b - 4.0*a*c;
        if (disc >= 0) {
            double sq = std::sqrt(disc);
            double q = -0.5*(b + std::copysign(sq, b));
            if (q != 0.0) roots[n++] = c/q;
            roots[n++] = q/a;
        }
    }
    std::optional<std::pair<double, double>> best;
    for (int i = 0; i < n; ++i) {
        double s = roots[i];
        if (!(s > 0.0 && s < 1.0)) continue;
        double value = eval(s);
        if (!best || value > best->first) best = std::pair{value, s*h};
    }
    return best;
}

} // namespace

Trace simulate(const NeuronParams& params, const SpikeTrain& inputs, double horizon,
               const IntegratorConfig& cfg, bool firing_enabled, std::optional<NeuronState> initial) {
    check_inputs(params, inputs, horizon, cfg);

    const Stepper stepper(params, cfg.scheme);
    NeuronState state = initial.value_or(rest_state(params));
    Trace trace;
    std::uint64_t total_steps = 0;

    auto record = [&](double t, bool spiked) {
        trace.times.push_back(t);
        trace.v.push_back(state.v);
        trace.g_s.push_back(state.g_s);
        if (spiked) trace.output_spikes.push_back({t, SpikeSource::output});
    };
    auto threshold = [&]() {
        if (!firing_enabled) return false;
        auto res = check_threshold(params, state);
        state = res.state;
        return res.fired;
    };

    auto times = inputs.times();
    std::size_t next_input = 0;
    double t = 0.0;

    // Events at t = 0 are applied before the first sample.
    bool spiked = false;
    while (next_input < times.size() && times[next_input] == 0.0) {
        state = apply_input_spike(params, state);
        ++next_input;
    }
    spiked = threshold();
    record(0.0, spiked);

    while (t < horizon) {
        double t_end = next_input < times.size() ? times[next_input] : horizon;
        double span = t_end - t;
        std::uint64_t n = substeps(span, cfg.dt);
        if (total_steps + n > cfg.max_steps) {
            throw Error(ErrorCode::step_budget_exceeded,
                        "simulation needs more than " + std::to_string(cfg.max_steps) + " steps");
        }
        double h = span/static_cast<double>(n);
        double t_start = t;
        for (std::uint64_t k = 1; k <= n; ++k) {
            state.v = stepper.advance_v(state.v, state.g_s, h);
            state.g_s = stepper.advance_g(state.g_s, h);
            t = k == n ? t_end : t_start + static_cast<double>(k)*h;
            ++total_steps;
            bool at_event = k == n;
            if (at_event && next_input < times.size()) {
                state = apply_input_spike(params, state);
                ++next_input;
            }
            spiked = threshold();
            if (at_event || spiked || total_steps % static_cast<std::uint64_t>(cfg.record_stride) == 0) {
                record(t, spiked);
            }
        }
    }
    return trace;
}

double peak_amplitude(const Trace& trace, double v_rest) {
    if (trace.empty()) throw Error(ErrorCode::empty_trace, "trace has no samples");
    return *std::max_element(trace.v.begin(), trace.v.end()) - v_rest;
}

PeakMeasurement measure_peak(const NeuronParams& params, const SpikeTrain& inputs,
                             const IntegratorConfig& cfg, std::optional<double> horizon_opt) {
    double horizon = horizon_opt.value_or(default_horizon(params, inputs));
    check_inputs(params, inputs, horizon, cfg);

    const Stepper stepper(params, cfg.scheme);
    NeuronState state = rest_state(params);
    auto times = inputs.times();
    std::size_t next_input = 0;
    std::uint64_t total_steps = 0;

    while (next_input < times.size() && times[next_input] == 0.0) {
        state = apply_input_spike(params, state);
        ++next_input;
    }
    double best_v = state.v;
    double best_t = 0.0;
    double t = 0.0;
    if (next_input == times.size() && rhs(params, state) <= 0.0 && state.g_s == 0.0) {
        return {best_v - params.v_rest, best_t};
    }

    while (t < horizon) {
        double t_end = next_input < times.size() ? times[next_input] : horizon;
        double span = t_end - t;
        std::uint64_t n = substeps(span, cfg.dt);
        if (total_steps + n > cfg.max_steps) {
            throw Error(ErrorCode::step_budget_exceeded,
                        "simulation needs more than " + std::to_string(cfg.max_steps) + " steps");
        }
        double h = span/static_cast<double>(n);
        double t_start = t;
        double d0 = rhs(params, state);
        for (std::uint64_t k = 1; k <= n; ++k) {
            double v0 = state.v;
            state.v = stepper.advance_v(state.v, state.g_s, h);
            state.g_s = stepper.advance_g(state.g_s, h);
            double t_prev = t;
            t = k == n ? t_end : t_start + static_cast<double>(k)*h;
            ++total_steps;
            double d1 = rhs(params, state);

            if (d0 > 0.0 && d1 <= 0.0) {
                // The interpolant can overshoot on under-resolved steps; the
                // solution itself never crosses e_s from below.
                if (auto peak = hermite_max(v0, d0, state.v, d1, h);
                    peak && peak->first > best_v && peak->first <= params.e_s) {
                    best_v = peak->first;
                    best_t = t_prev + peak->second;
                }
            }
            if (state.v > best_v) {
                best_v = state.v;
                best_t = t;
            }

            bool after_last_input = next_input == times.size();
            if (k == n && !after_last_input) {
                state = apply_input_spike(params, state);
                ++next_input;
                d1 = rhs(params, state);
                if (state.v > best_v) {
                    best_v = state.v;
                    best_t = t;
                }
            }
            else if (after_last_input && d1 < 0.0) {
                return {best_v - params.v_rest, best_t};
            }
            d0 = d1;
        }
    }
    return {best_v - params.v_rest, best_t};
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
    out << "time_ms,v_mV,g_s,spike\n";
    std::size_t next_spike = 0;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        bool spike = next_spike < trace.output_spikes.size() && trace.output_spikes[next_spike].time == trace.times[i];
        if (spike) ++next_spike;
        out << detail::format_double(trace.times[i]) << ','
            << detail::format_double(trace.v[i]) << ','
            << detail::format_double(trace.g_s[i]) << ','
            << (spike ? '1' : '0') << '\n';
    }
}

void write_trace_csv(const std::filesystem::path& path, const Trace& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
    write_trace_csv(out, trace);
    if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

} // namespace slif
