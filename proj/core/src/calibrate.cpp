#include <slif/calibrate.hpp>

#include <algorithm>
#include <array>
#include <cmath>

#include "text.hpp"

namespace slif {

double ParamBounds::geometric_mid() const {
    return std::sqrt(lo*hi);
}

std::string_view to_string(CalibrationStage stage) noexcept {
    switch (stage) {
    case CalibrationStage::membrane_capacitance: return "c_m";
    case CalibrationStage::leak_conductance: return "g_l";
    case CalibrationStage::synaptic_time_constant: return "tau_s";
    }
    return "unknown";
}

void CalibrationTarget::validate() const {
    auto bad = [](const char* what) { throw Error(ErrorCode::invalid_config, what); };
    if (!(target_favorite_ist > 0) || !std::isfinite(target_favorite_ist)) bad("target_favorite_ist must be > 0");
    if (!(min_margin >= 0) || !std::isfinite(min_margin)) bad("min_margin must be >= 0");
    if (!(max_timewidth > 0) || !std::isfinite(max_timewidth)) bad("max_timewidth must be > 0");
    for (auto [b, name]: {std::pair{c_m, "c_m bounds"}, std::pair{g_l, "g_l bounds"}, std::pair{tau_s, "tau_s bounds"}}) {
        if (!(b.lo > 0) || !(b.hi > b.lo) || !std::isfinite(b.hi)) {
            throw Error(ErrorCode::invalid_config, std::string(name) + " must satisfy 0 < lo < hi");
        }
    }
    if (!(tolerance > 0 && tolerance < 0.5)) bad("tolerance must be in (0, 0.5)");
    if (max_passes < 1) bad("max_passes must be >= 1");
    if (base.kind != ModelKind::slif) bad("calibration requires the slif model kind");
    scan.validate();
}

namespace {

constexpr double log_tolerance = 1.0e-6;
constexpr double search_tolerance = 1.0e-6; // [ms], IST searches inside metrics
constexpr int max_newton_iterations = 30;
constexpr double jacobian_step = 1.0e-3; // in log parameter
constexpr double newton_trust = 0.25;    // largest log step per component
constexpr double polish_goal = 1.0e-6;   // max |log residual|
constexpr double max_extrapolation = 1.3862943611198906; // log 4
constexpr double drift_retouch = 0.10;
constexpr int probe_count = 5;

double& field(NeuronParams& p, CalibrationStage stage) {
    switch (stage) {
    case CalibrationStage::membrane_capacitance: return p.c_m;
    case CalibrationStage::leak_conductance: return p.g_l;
    case CalibrationStage::synaptic_time_constant: return p.tau_s;
    }
    return p.c_m;
}

class Calibrator {
public:
    Calibrator(const CalibrationTarget& target, const std::optional<IntegratorConfig>& cfg, unsigned jobs):
        target_(target), cfg_(cfg), jobs_(jobs)
    {}

    CalibrationReport run() {
        NeuronParams p = target_.base;
        p.c_m = target_.c_m.geometric_mid();
        p.g_l = target_.g_l.geometric_mid();
        p.tau_s = target_.tau_s.geometric_mid();

        ResponseMetrics m;
        std::vector<Point> history;
        for (report_.passes = 1; report_.passes <= target_.max_passes; ++report_.passes) {
            bool first = report_.passes == 1;
            NeuronParams before = p;
            shortfall_.reset();
            m = stage_capacitance(p, first ? target_.c_m : retouch_bounds(p.c_m));
            m = stage_leak(p);
            if (relative(m.favorite_ist, target_.target_favorite_ist) > drift_retouch) {
                m = stage_capacitance(p, retouch_bounds(p.c_m));
            }
            m = stage_tau(p);
            m = stage_capacitance(p, retouch_bounds(p.c_m));
            if (satisfied(p, m) || (!first && unchanged(before, p))) break;
            history.push_back(log_point(p));
            if (report_.passes < target_.max_passes && extrapolate(p, history)) history.clear();
        }
        m = polish(p, m);
        final_check(m);
        report_.passes = std::min(report_.passes, target_.max_passes);
        report_.params = p;
        report_.achieved = m;
        report_.converged = satisfied(p, m);
        if (!report_.converged) {
            report_.warnings.push_back("targets not met jointly after " + std::to_string(report_.passes) + " passes");
        }
        return report_;
    }

private:
    const CalibrationTarget& target_;
    const std::optional<IntegratorConfig>& cfg_;
    unsigned jobs_;
    CalibrationReport report_;
    std::optional<CalibrationStage> shortfall_; // stage with no feasible probe in the latest pass

    using Point = std::array<double, 3>; // log c_m, log g_l, log tau_s

    static double relative(double x, double ref) { return std::abs(x - ref)/std::abs(ref); }

    static Point log_point(const NeuronParams& p) {
        return {std::log(p.c_m), std::log(p.g_l), std::log(p.tau_s)};
    }

    // The staged passes creep along a shallow valley with a nearly constant
    // contraction ratio. When the last two displacements line up, jump to
    // the limit of the geometric series (Aitken).
    bool extrapolate(NeuronParams& p, const std::vector<Point>& history) const {
        if (history.size() < 3) return false;
        const Point& x2 = history[history.size() - 1];
        const Point& x1 = history[history.size() - 2];
        const Point& x0 = history[history.size() - 3];
        double dot = 0, n1 = 0, n0 = 0;
        for (int i = 0; i < 3; ++i) {
            double d1 = x2[i] - x1[i];
            double d0 = x1[i] - x0[i];
            dot += d1*d0;
            n1 += d1*d1;
            n0 += d0*d0;
        }
        if (!(n0 > 0 && n1 > 0)) return false;
        double cosine = dot/std::sqrt(n0*n1);
        double ratio = std::sqrt(n1/n0);
        if (cosine < 0.98 || ratio < 0.3 || ratio > 0.97) return false;
        double gain = ratio/(1 - ratio);
        const std::array<ParamBounds, 3> bounds{target_.c_m, target_.g_l, target_.tau_s};
        std::array<double*, 3> fields{&p.c_m, &p.g_l, &p.tau_s};
        for (int i = 0; i < 3; ++i) {
            double step = std::clamp(gain*(x2[i] - x1[i]), -max_extrapolation, max_extrapolation);
            *fields[i] = std::clamp(std::exp(x2[i] + step), bounds[i].lo, bounds[i].hi);
        }
        return true;
    }

    ResponseMetrics evaluate(const NeuronParams& p) {
        ++report_.evaluations;
        auto m = measure_response(p, target_.scan, cfg_, jobs_, default_tw_offset, search_tolerance);
        if (m.non_unimodal) note("non-unimodal-search: response curve not unimodal on the scan grid");
        return m;
    }

    void note(const std::string& warning) {
        for (const auto& w: report_.warnings) if (w == warning) return;
        report_.warnings.push_back(warning);
    }

    ParamBounds retouch_bounds(double c_m) const {
        return {std::max(target_.c_m.lo, c_m/3.0), std::min(target_.c_m.hi, c_m*3.0)};
    }

    bool satisfied(const NeuronParams& p, const ResponseMetrics& m) const {
        double tol = target_.tolerance;
        bool fav = relative(m.favorite_ist, target_.target_favorite_ist) <= tol;
        bool margin_ok = m.margin >= target_.min_margin*(1 - tol)
            && (m.margin <= target_.min_margin*(1 + tol) || p.g_l >= target_.g_l.hi*(1 - 1e-9));
        bool tw_ok = m.timewidth <= target_.max_timewidth*(1 + tol)
            && (m.timewidth >= target_.max_timewidth*(1 - tol) || p.tau_s >= target_.tau_s.hi*(1 - 1e-9));
        return fav && margin_ok && tw_ok;
    }

    void final_check(const ResponseMetrics& m) const {
        double tol = target_.tolerance;
        bool fav_ok = relative(m.favorite_ist, target_.target_favorite_ist) <= 0.02;
        bool margin_ok = m.margin >= target_.min_margin*(1 - tol);
        bool tw_ok = m.timewidth <= target_.max_timewidth*(1 + tol);
        if (shortfall_ && !(fav_ok && margin_ok && tw_ok)) {
            const char* what = *shortfall_ == CalibrationStage::leak_conductance
                ? "min_margin exceeds the largest margin reachable within g_l bounds"
                : "max_timewidth is below the smallest Timewidth reachable within tau_s bounds";
            throw CalibrationError(*shortfall_, what);
        }
        if (relative(m.favorite_ist, target_.target_favorite_ist) > 0.02) {
            throw CalibrationError(CalibrationStage::membrane_capacitance,
                "favorite IST settled at " + detail::format_double(m.favorite_ist) + " ms, target "
                + detail::format_double(target_.target_favorite_ist) + " ms");
        }
        if (m.margin < target_.min_margin*(1 - tol)) {
            throw CalibrationError(CalibrationStage::leak_conductance,
                "margin settled at " + detail::format_double(m.margin) + " mV, below min_margin "
                + detail::format_double(target_.min_margin) + " mV");
        }
        if (m.timewidth > target_.max_timewidth*(1 + tol)) {
            throw CalibrationError(CalibrationStage::synaptic_time_constant,
                "Timewidth settled at " + detail::format_double(m.timewidth) + " ms, above max_timewidth "
                + detail::format_double(target_.max_timewidth) + " ms");
        }
    }

    static bool unchanged(const NeuronParams& a, const NeuronParams& b) {
        return relative(b.c_m, a.c_m) < 1e-6 && relative(b.g_l, a.g_l) < 1e-6 && relative(b.tau_s, a.tau_s) < 1e-6;
    }

    // The staged passes leave a residual of the order of the tolerance, and
    // along the valley that still means parameters uncertain by several
    // percent. A damped Newton iteration on the binding equations (log
    // favorite, log margin, log Timewidth against log c_m, g_l, tau_s) takes
    // the residual down to the noise of the metric searches. Steps are capped
    // so the iteration stays on the root the staged passes were heading for.
    // Constraints that are slack at a bound stay fixed.
    ResponseMetrics polish(NeuronParams& p, ResponseMetrics m) {
        std::vector<CalibrationStage> unknowns{CalibrationStage::membrane_capacitance};
        bool margin_binding = target_.min_margin > 0 && p.g_l < target_.g_l.hi*(1 - 1e-9);
        bool tw_binding = p.tau_s < target_.tau_s.hi*(1 - 1e-9);
        if (margin_binding) unknowns.push_back(CalibrationStage::leak_conductance);
        if (tw_binding) unknowns.push_back(CalibrationStage::synaptic_time_constant);
        const std::size_t n = unknowns.size();

        auto residual = [&](const ResponseMetrics& mm) {
            std::vector<double> r{std::log(mm.favorite_ist/target_.target_favorite_ist)};
            if (margin_binding) r.push_back(std::log(std::max(mm.margin, 1e-300)/target_.min_margin));
            if (tw_binding) r.push_back(std::log(std::max(mm.timewidth, 1e-300)/target_.max_timewidth));
            return r;
        };
        auto norm = [](const std::vector<double>& r) {
            double out = 0;
            for (double x: r) out = std::max(out, std::abs(x));
            return out;
        };
        auto bounds_of = [&](CalibrationStage s) {
            switch (s) {
            case CalibrationStage::membrane_capacitance: return target_.c_m;
            case CalibrationStage::leak_conductance: return target_.g_l;
            case CalibrationStage::synaptic_time_constant: return target_.tau_s;
            }
            return target_.c_m;
        };
        auto moved = [&](const NeuronParams& base, const std::vector<double>& step) {
            NeuronParams q = base;
            for (std::size_t i = 0; i < n; ++i) {
                auto b = bounds_of(unknowns[i]);
                double& x = field(q, unknowns[i]);
                x = std::clamp(x*std::exp(step[i]), b.lo, b.hi);
            }
            return q;
        };

        std::vector<double> r = residual(m);
        for (int it = 0; it < max_newton_iterations && norm(r) > polish_goal; ++it) {
            std::vector<std::vector<double>> jac(n, std::vector<double>(n));
            for (std::size_t j = 0; j < n; ++j) {
                std::vector<double> step(n, 0.0);
                step[j] = jacobian_step;
                auto rj = residual(evaluate(moved(p, step)));
                for (std::size_t i = 0; i < n; ++i) jac[i][j] = (rj[i] - r[i])/jacobian_step;
            }
            auto delta = solve(jac, r);
            if (!delta) {
                note("calibration polish: singular Jacobian");
                break;
            }
            double longest = 0;
            for (double d: *delta) longest = std::max(longest, std::abs(d));
            double scale = longest > newton_trust ? newton_trust/longest : 1.0;
            bool improved = false;
            for (int ls = 0; ls < 8; ++ls, scale *= 0.5) {
                std::vector<double> step(n);
                for (std::size_t i = 0; i < n; ++i) step[i] = -scale*(*delta)[i];
                NeuronParams q = moved(p, step);
                auto mq = evaluate(q);
                auto rq = residual(mq);
                if (norm(rq) < norm(r)) {
                    p = q;
                    m = mq;
                    r = rq;
                    improved = true;
                    break;
                }
            }
            if (!improved) break;
        }
        return m;
    }

    // Gaussian elimination with partial pivoting; nullopt when singular.
    static std::optional<std::vector<double>> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
        const std::size_t n = b.size();
        for (std::size_t c = 0; c < n; ++c) {
            std::size_t piv = c;
            for (std::size_t r = c + 1; r < n; ++r) if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
            if (std::abs(a[piv][c]) < 1e-12) return std::nullopt;
            std::swap(a[piv], a[c]);
            std::swap(b[piv], b[c]);
            for (std::size_t r = c + 1; r < n; ++r) {
                double f = a[r][c]/a[c][c];
                for (std::size_t k = c; k < n; ++k) a[r][k] -= f*a[c][k];
                b[r] -= f*b[c];
            }
        }
        std::vector<double> x(n);
        for (std::size_t i = n; i-- > 0;) {
            double acc = b[i];
            for (std::size_t k = i + 1; k < n; ++k) acc -= a[i][k]*x[k];
            x[i] = acc/a[i][i];
        }
        return x;
    }

    // Golden-section search in log c_m on |favorite_ist - target|.
    ResponseMetrics stage_capacitance(NeuronParams& p, ParamBounds bounds) {
        const double goal = target_.target_favorite_ist;
        ResponseMetrics best_m;
        double best_err = INFINITY;
        double best_c = p.c_m;
        auto err = [&](double u) {
            NeuronParams q = p;
            q.c_m = std::exp(u);
            auto m = evaluate(q);
            double e = std::abs(m.favorite_ist - goal);
            if (e < best_err) {
                best_err = e;
                best_m = m;
                best_c = q.c_m;
            }
            return e;
        };
        const double invphi = (std::sqrt(5.0) - 1.0)/2.0;
        double a = std::log(bounds.lo);
        double b = std::log(bounds.hi);
        double c = b - invphi*(b - a);
        double d = a + invphi*(b - a);
        double fc = err(c);
        double fd = err(d);
        while (b - a > log_tolerance) {
            if (fc <= fd) {
                b = d; d = c; fd = fc;
                c = b - invphi*(b - a);
                fc = err(c);
            }
            else {
                a = c; c = d; fc = fd;
                d = a + invphi*(b - a);
                fd = err(d);
            }
        }
        p.c_m = best_c;
        return best_m;
    }

    // Largest parameter value in `bounds` for which `ok(metrics)` holds,
    // assuming `ok` holds on a lower interval. `score` is the monitored
    // quantity, expected monotone with sign `direction` (+1 increasing).
    template <typename Ok, typename Score>
    ResponseMetrics boundary_search(NeuronParams& p, CalibrationStage stage, ParamBounds bounds,
                                    Ok ok, Score score, int direction, const char* quantity,
                                    const std::string& infeasible) {
        std::array<double, probe_count> x{};
        std::array<ResponseMetrics, probe_count> m{};
        double llo = std::log(bounds.lo);
        double lhi = std::log(bounds.hi);
        for (int k = 0; k < probe_count; ++k) {
            x[k] = llo + (lhi - llo)*k/(probe_count - 1);
            NeuronParams q = p;
            field(q, stage) = std::exp(x[k]);
            m[k] = evaluate(q);
        }
        for (int k = 1; k < probe_count; ++k) {
            if (!(direction*(score(m[k]) - score(m[k-1])) > 0)) {
                note("stage " + std::to_string(static_cast<int>(stage)) + ": " + quantity
                     + " not monotone in " + std::string(to_string(stage)) + " on probe points");
                break;
            }
        }
        int last_ok = -1;
        for (int k = 0; k < probe_count; ++k) if (ok(m[k])) last_ok = k;
        if (last_ok < 0) {
            // Keep the probe closest to the constraint; the final check
            // decides whether the target as a whole is infeasible.
            int closest = 0;
            for (int k = 1; k < probe_count; ++k) {
                if (direction*(score(m[k]) - score(m[closest])) < 0) closest = k;
            }
            note(infeasible + " (at pass " + std::to_string(report_.passes) + ")");
            shortfall_ = stage;
            field(p, stage) = std::exp(x[closest]);
            return m[closest];
        }
        if (last_ok == probe_count - 1) {
            field(p, stage) = bounds.hi;
            return m[last_ok];
        }
        double good = x[last_ok];
        double bad = x[last_ok + 1];
        ResponseMetrics good_m = m[last_ok];
        while (bad - good > log_tolerance) {
            double mid = 0.5*(good + bad);
            NeuronParams q = p;
            field(q, stage) = std::exp(mid);
            auto mm = evaluate(q);
            if (ok(mm)) {
                good = mid;
                good_m = mm;
            }
            else {
                bad = mid;
            }
        }
        field(p, stage) = std::exp(good);
        return good_m;
    }

    ResponseMetrics stage_leak(NeuronParams& p) {
        double floor = target_.min_margin;
        return boundary_search(p, CalibrationStage::leak_conductance, target_.g_l,
            [floor](const ResponseMetrics& m) { return m.margin >= floor; },
            [](const ResponseMetrics& m) { return m.margin; }, -1, "margin",
            "min_margin " + detail::format_double(floor) + " mV exceeds the largest margin reachable within g_l bounds");
    }

    ResponseMetrics stage_tau(NeuronParams& p) {
        double ceiling = target_.max_timewidth;
        return boundary_search(p, CalibrationStage::synaptic_time_constant, target_.tau_s,
            [ceiling](const ResponseMetrics& m) { return m.timewidth <= ceiling; },
            [](const ResponseMetrics& m) { return m.timewidth; }, +1, "timewidth",
            "max_timewidth " + detail::format_double(ceiling) + " ms is below the smallest Timewidth reachable within tau_s bounds");
    }
};

} // namespace

CalibrationTarget reference_calibration_target() {
    CalibrationTarget t;
    t.target_favorite_ist = 3.0;
    t.min_margin = 0.57;
    t.max_timewidth = 3.4;
    return t;
}

CalibrationReport calibrate(const CalibrationTarget& target, const std::optional<IntegratorConfig>& cfg, unsigned jobs) {
    target.validate();
    return Calibrator(target, cfg, jobs).run();
}

} // namespace slif
