#include <slif/response.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include <slif/error.hpp>
#include <slif/json_io.hpp>
#include <slif/parallel.hpp>
#include <slif/stimulus.hpp>
#include "text.hpp"

namespace slif {

void IstScan::validate() const {
    if (!(ist_min > 0) || !(ist_max > ist_min) || !std::isfinite(ist_max)) {
        throw Error(ErrorCode::invalid_config, "ist range must satisfy 0 < ist_min < ist_max");
    }
    if (n_points < 3) throw Error(ErrorCode::invalid_config, "n_points must be >= 3");
}

std::vector<double> IstScan::grid() const {
    validate();
    std::vector<double> out(n_points);
    double last = n_points - 1;
    for (int i = 0; i < n_points; ++i) {
        double u = i/last;
        out[i] = spacing == IstSpacing::linear
            ? ist_min + u*(ist_max - ist_min)
            : ist_min*std::pow(ist_max/ist_min, u);
    }
    out.front() = ist_min;
    out.back() = ist_max;
    return out;
}

std::string ResponseMetrics::flag_string() const {
    std::string out;
    auto add = [&](bool on, const char* name) {
        if (!on) return;
        if (!out.empty()) out += '|';
        out += name;
    };
    add(non_unimodal, "non_unimodal");
    add(tw_low_saturated, "tw_low_saturated");
    add(tw_high_saturated, "tw_high_saturated");
    return out.empty() ? "ok" : out;
}

double pair_amplitude(const NeuronParams& params, double ist, const IntegratorConfig& cfg) {
    return measure_peak(params, pair(default_pair_onset, ist), cfg).amplitude;
}

ResponseCurve response_curve(const NeuronParams& params, const IstScan& scan,
                             const IntegratorConfig& cfg, unsigned jobs) {
    params.validate();
    cfg.validate();
    ResponseCurve curve;
    curve.ists = scan.grid();
    curve.amplitudes.resize(curve.ists.size());
    parallel_for(curve.ists.size(), jobs, [&](std::size_t i) {
        curve.amplitudes[i] = pair_amplitude(params, curve.ists[i], cfg);
    });
    return curve;
}

namespace {

bool grid_unimodal(const std::vector<double>& a, std::size_t peak) {
    for (std::size_t i = 1; i <= peak; ++i) {
        if (!(a[i] > a[i-1])) return false;
    }
    for (std::size_t i = peak + 1; i < a.size(); ++i) {
        if (!(a[i] < a[i-1])) return false;
    }
    return true;
}

struct Sample {
    double x;
    double f;
};

template <typename F>
Sample golden_max(F&& f, double a, double b, double tol, Sample best) {
    const double invphi = (std::sqrt(5.0) - 1.0)/2.0;
    double c = b - invphi*(b - a);
    double d = a + invphi*(b - a);
    double fc = f(c);
    double fd = f(d);
    auto keep = [&](double x, double fx) {
        if (fx > best.f) best = {x, fx};
    };
    keep(c, fc);
    keep(d, fd);
    while (b - a > tol) {
        if (fc >= fd) {
            b = d; d = c; fd = fc;
            c = b - invphi*(b - a);
            fc = f(c);
            keep(c, fc);
        }
        else {
            a = c; c = d; fc = fd;
            d = a + invphi*(b - a);
            fd = f(d);
            keep(d, fd);
        }
    }
    return best;
}

// `below` has f < level, `above` has f >= level; returns the crossing.
template <typename F>
double bisect_level(F&& f, double below, double above, double level, double tol) {
    while (std::abs(above - below) > tol) {
        double mid = 0.5*(below + above);
        if (f(mid) >= level) above = mid;
        else below = mid;
    }
    return 0.5*(below + above);
}

void check_curve(const ResponseCurve& curve) {
    if (curve.ists.empty()) throw Error(ErrorCode::empty_curve, "response curve has no points");
    if (curve.ists.size() != curve.amplitudes.size()) {
        throw Error(ErrorCode::empty_curve, "response curve arrays differ in length");
    }
}

} // namespace

ResponseMetrics metrics(const ResponseCurve& curve, const NeuronParams& params,
                        const IntegratorConfig& cfg, double tw_offset, double tolerance) {
    check_curve(curve);
    if (!(tw_offset > 0)) throw Error(ErrorCode::invalid_config, "tw_offset must be > 0");

    const auto& x = curve.ists;
    const auto& a = curve.amplitudes;
    const std::size_t n = x.size();
    auto amp = [&](double ist) { return pair_amplitude(params, ist, cfg); };

    std::size_t peak = static_cast<std::size_t>(std::max_element(a.begin(), a.end()) - a.begin());
    ResponseMetrics m;
    Sample best{x[peak], a[peak]};
    if (n >= 2 && grid_unimodal(a, peak)) {
        double lo = x[peak == 0 ? 0 : peak - 1];
        double hi = x[std::min(peak + 1, n - 1)];
        best = golden_max(amp, lo, hi, tolerance, best);
    }
    else if (n >= 2) {
        m.non_unimodal = true;
    }
    m.favorite_ist = best.x;
    m.max_amplitude = best.f;
    m.margin = m.max_amplitude - *std::min_element(a.begin(), a.end());

    const double level = m.max_amplitude - tw_offset;

    // Walk outward from the favorite; the first grid point under the level
    // brackets the crossing together with the last point at or above it.
    double above = m.favorite_ist;
    m.tw_low = x.front();
    m.tw_low_saturated = true;
    for (std::size_t i = n; i-- > 0;) {
        if (!(x[i] < m.favorite_ist)) continue;
        if (a[i] < level) {
            m.tw_low = bisect_level(amp, x[i], above, level, tolerance);
            m.tw_low_saturated = false;
            break;
        }
        above = x[i];
    }

    above = m.favorite_ist;
    m.tw_high = x.back();
    m.tw_high_saturated = true;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > m.favorite_ist)) continue;
        if (a[i] < level) {
            m.tw_high = bisect_level(amp, x[i], above, level, tolerance);
            m.tw_high_saturated = false;
            break;
        }
        above = x[i];
    }

    m.tw_low = std::min(m.tw_low, m.favorite_ist);
    m.tw_high = std::max(m.tw_high, m.favorite_ist);
    m.timewidth = m.tw_high - m.tw_low;
    return m;
}

ResponseMetrics measure_response(const NeuronParams& params, const IstScan& scan,
                                 const std::optional<IntegratorConfig>& cfg, unsigned jobs, double tw_offset,
                                 double tolerance) {
    IntegratorConfig resolved = cfg.value_or(IntegratorConfig::defaults_for(params));
    auto curve = response_curve(params, scan, resolved, jobs);
    return metrics(curve, params, resolved, tw_offset, tolerance);
}

bool fires(const NeuronParams& params, double ist, const IntegratorConfig& cfg) {
    auto inputs = pair(default_pair_onset, ist);
    IntegratorConfig quiet = cfg;
    quiet.record_stride = std::numeric_limits<int>::max();
    auto trace = simulate(params, inputs, default_horizon(params, inputs), quiet, true);
    return !trace.output_spikes.empty();
}

std::optional<IstBand> amplitude_band(const ResponseCurve& curve, const NeuronParams& params,
                                      const IntegratorConfig& cfg, double level, double tolerance) {
    check_curve(curve);
    const auto& x = curve.ists;
    const auto& a = curve.amplitudes;
    std::size_t peak = static_cast<std::size_t>(std::max_element(a.begin(), a.end()) - a.begin());
    if (a[peak] < level) return std::nullopt;
    auto amp = [&](double ist) { return pair_amplitude(params, ist, cfg); };

    std::size_t lo = peak;
    while (lo > 0 && a[lo-1] >= level) --lo;
    std::size_t hi = peak;
    while (hi + 1 < a.size() && a[hi+1] >= level) ++hi;

    IstBand band{x[lo], x[hi]};
    if (lo > 0) band.low = bisect_level(amp, x[lo-1], x[lo], level, tolerance);
    if (hi + 1 < a.size()) band.high = bisect_level(amp, x[hi+1], x[hi], level, tolerance);
    return band;
}

void write_response_csv(std::ostream& out, const ResponseCurve& curve) {
    check_curve(curve);
    out << "ist_ms,amplitude_mV\n";
    for (std::size_t i = 0; i < curve.ists.size(); ++i) {
        out << detail::format_double(curve.ists[i]) << ',' << detail::format_double(curve.amplitudes[i]) << '\n';
    }
}

void write_response_csv(const std::filesystem::path& path, const ResponseCurve& curve) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
    write_response_csv(out, curve);
}

std::string metrics_json(const ResponseMetrics& m) {
    return to_json(m).dump(2);
}

} // namespace slif
