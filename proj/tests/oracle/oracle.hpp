#pragma once

// Reference computations for the tests. Nothing here calls into slif_core
// beyond reading plain parameter values, so results stay independent of the
// library's integrator, step splitting and peak refinement.

#include <cmath>
#include <vector>

namespace oracle {

struct Neuron {
    long double c_m;
    long double g_l;
    long double v_rest;
    long double e_s;
    long double g_max;
    long double tau_s;
};

// v(t) for a membrane relaxing from v0 without input.
inline long double leak(const Neuron& n, long double v0, long double t) {
    return n.v_rest + (v0 - n.v_rest)*std::exp(-t*n.g_l/n.c_m);
}

// g_s(t) decaying from g0.
inline long double conductance(const Neuron& n, long double g0, long double t) {
    return g0*std::exp(-t/n.tau_s);
}

// Peak above rest of a delta-input membrane hit at 0 and ist by jumps dv.
inline long double lif_pair_peak(const Neuron& n, long double dv, long double ist) {
    return dv*(1.0L + std::exp(-ist*n.g_l/n.c_m));
}

// Saturating synapse driven by impulses at `times` (ascending); every
// impulse sets g_s to g_max. Classical RK4 in long double on a uniform grid
// of width h that contains every impulse time, g_s evaluated in closed form
// on each stage. Returns the largest sampled v - v_rest.
inline long double slif_peak(const Neuron& n, const std::vector<long double>& times, long double h,
                             long double t_end) {
    auto g_at = [&](long double t) {
        long double last = -1;
        for (long double s: times) {
            if (s <= t) last = s;
        }
        return last < 0 ? 0.0L : n.g_max*std::exp(-(t - last)/n.tau_s);
    };
    auto f = [&](long double t, long double v) {
        return (-n.g_l*(v - n.v_rest) + g_at(t)*(n.e_s - v))/n.c_m;
    };

    long double v = n.v_rest;
    long double best = 0;
    long long steps = std::llround(t_end/h);
    for (long long k = 0; k < steps; ++k) {
        long double t = k*h;
        // Evaluate g on stage times slightly inside the step so an impulse at
        // the right edge does not leak into this step.
        long double tl = t + h*1e-9L;
        long double tm = t + h/2;
        long double tr = t + h*(1 - 1e-9L);
        long double k1 = f(tl, v);
        long double k2 = f(tm, v + h/2*k1);
        long double k3 = f(tm, v + h/2*k2);
        long double k4 = f(tr, v + h*k3);
        v += h/6*(k1 + 2*k2 + 2*k3 + k4);
        best = std::max(best, v - n.v_rest);
    }
    return best;
}

} // namespace oracle
