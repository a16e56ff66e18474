#include <slif/json_io.hpp>

#include <cmath>
#include <limits>
#include <set>
#include <string>

#include <slif/error.hpp>

namespace slif {

namespace {

// Keys for the three swept parameters, shared by the neuron block and the
// sweep "fixed" block.
constexpr const char* c_m_key = "c_m_uF_per_cm2";
constexpr const char* g_l_key = "g_l_mS_per_cm2";
constexpr const char* tau_s_key = "tau_s_ms";

const char* param_key(SweepParam p) {
    switch (p) {
    case SweepParam::c_m: return c_m_key;
    case SweepParam::g_l: return g_l_key;
    case SweepParam::tau_s: return tau_s_key;
    }
    return "";
}

// Unit suffix used for axis bounds: "min_<unit>", "max_<unit>".
const char* param_unit(SweepParam p) {
    switch (p) {
    case SweepParam::c_m: return "uF_per_cm2";
    case SweepParam::g_l: return "mS_per_cm2";
    case SweepParam::tau_s: return "ms";
    }
    return "";
}

const char* product_unit(Product p) {
    switch (p) {
    case Product::c_m_tau_s: return "uF_ms_per_cm2";
    case Product::g_l_tau_s: return "mS_ms_per_cm2";
    case Product::c_m_g_l: return "uF_mS_per_cm4";
    }
    return "";
}

// Field-by-field reader over one JSON object that remembers which keys were
// consumed, so leftovers can be reported as unknown.
class Reader {
public:
    Reader(const Json& j, std::string_view where): j_(j), where_(where) {
        if (!j_.is_object()) fail("", "expected a JSON object");
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        std::string field = key.empty() ? where_ : where_ + "." + key;
        throw Error(ErrorCode::invalid_config, field + ": " + what);
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const Json* find(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out) {
        if (const Json* v = find(key)) {
            if (!v->is_number()) fail(key, "expected a number");
            out = v->get<double>();
            if (!std::isfinite(out)) fail(key, "must be finite");
        }
    }

    template <typename Int>
    void integer(const std::string& key, Int& out) {
        if (const Json* v = find(key)) {
            if (!v->is_number_integer()) fail(key, "expected an integer");
            if (v->is_number_unsigned()) {
                auto u = v->get<std::uint64_t>();
                if (u > static_cast<std::uint64_t>(std::numeric_limits<Int>::max())) fail(key, "out of range");
                out = static_cast<Int>(u);
                return;
            }
            auto s = v->get<std::int64_t>();
            if (s < static_cast<std::int64_t>(std::numeric_limits<Int>::min()) ||
                (s > 0 && static_cast<std::uint64_t>(s) > static_cast<std::uint64_t>(std::numeric_limits<Int>::max()))) {
                fail(key, "out of range");
            }
            out = static_cast<Int>(s);
        }
    }

    std::optional<std::string> text(const std::string& key) {
        if (const Json* v = find(key)) {
            if (!v->is_string()) fail(key, "expected a string");
            return v->get<std::string>();
        }
        return std::nullopt;
    }

    void bounds(const std::string& key, ParamBounds& out) {
        if (const Json* v = find(key)) {
            if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
                fail(key, "expected [lo, hi]");
            }
            out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
        }
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) fail(it.key(), "unknown key");
        }
    }

    std::string child(const std::string& key) const { return where_ + "." + key; }

private:
    const Json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

// Re-labels validate() failures of a parsed block as config errors.
template <typename Fn>
void checked(std::string_view where, Fn&& fn) {
    try {
        fn();
    }
    catch (const Error& e) {
        std::string message = e.what();
        std::string own = std::string(to_string(ErrorCode::invalid_config)) + ": ";
        if (message.starts_with(own)) message.erase(0, own.size());
        throw Error(ErrorCode::invalid_config, std::string(where) + ": " + message);
    }
}

} // namespace

Json to_json(const NeuronParams& p) {
    Json j;
    j["kind"] = to_string(p.kind);
    j[c_m_key] = p.c_m;
    j[g_l_key] = p.g_l;
    j["v_rest_mV"] = p.v_rest;
    j["v_th_mV"] = p.v_th;
    j["e_s_mV"] = p.e_s;
    j["g_max_mS_per_cm2"] = p.g_max;
    j[tau_s_key] = p.tau_s;
    j["w_nC_per_cm2"] = p.w;
    j["spike_mode"] = to_string(p.spike_mode);
    j["delta_g_mS_per_cm2"] = p.delta_g;
    return j;
}

Json to_json(const IntegratorConfig& cfg) {
    Json j;
    j["dt_ms"] = cfg.dt;
    j["scheme"] = to_string(cfg.scheme);
    j["record_stride"] = cfg.record_stride;
    j["max_steps"] = cfg.max_steps;
    return j;
}

Json to_json(const IstScan& scan) {
    Json j;
    j["ist_min_ms"] = scan.ist_min;
    j["ist_max_ms"] = scan.ist_max;
    j["n_points"] = scan.n_points;
    j["spacing"] = scan.spacing == IstSpacing::linear ? "linear" : "log";
    return j;
}

Json to_json(const ResponseMetrics& m) {
    Json j;
    j["favorite_ist_ms"] = m.favorite_ist;
    j["max_amplitude_mV"] = m.max_amplitude;
    j["margin_mV"] = m.margin;
    j["timewidth_ms"] = m.timewidth;
    j["tw_low_ms"] = m.tw_low;
    j["tw_high_ms"] = m.tw_high;
    j["non_unimodal"] = m.non_unimodal;
    j["tw_low_saturated"] = m.tw_low_saturated;
    j["tw_high_saturated"] = m.tw_high_saturated;
    return j;
}

Json to_json(const SweepSpec& spec) {
    auto axis = [](const SweepAxis& a) {
        Json j;
        j["param"] = to_string(a.param);
        j[std::string("min_") + param_unit(a.param)] = a.min;
        j[std::string("max_") + param_unit(a.param)] = a.max;
        j["n"] = a.n;
        return j;
    };
    Json j;
    j["axis1"] = axis(spec.axis1);
    j["axis2"] = axis(spec.axis2);
    if (spec.constraint) {
        j["constraint"] = {
            {"product", to_string(spec.constraint->product)},
            {std::string("value_") + product_unit(spec.constraint->product), spec.constraint->value},
        };
    }
    if (!spec.fixed.empty()) {
        Json fixed = Json::object();
        for (const auto& f: spec.fixed) fixed[param_key(f.param)] = f.value;
        j["fixed"] = std::move(fixed);
    }
    j["tw_offset_mV"] = spec.tw_offset;
    j["neuron"] = to_json(spec.base);
    j["scan"] = to_json(spec.scan);
    if (spec.integrator) j["integrator"] = to_json(*spec.integrator);
    else j["integrator"] = "per-cell defaults";
    return j;
}

Json to_json(const CalibrationTarget& t) {
    Json j;
    j["target_favorite_ist_ms"] = t.target_favorite_ist;
    j["min_margin_mV"] = t.min_margin;
    j["max_timewidth_ms"] = t.max_timewidth;
    j["c_m_bounds_uF_per_cm2"] = {t.c_m.lo, t.c_m.hi};
    j["g_l_bounds_mS_per_cm2"] = {t.g_l.lo, t.g_l.hi};
    j["tau_s_bounds_ms"] = {t.tau_s.lo, t.tau_s.hi};
    j["tolerance"] = t.tolerance;
    j["max_passes"] = t.max_passes;
    return j;
}

Json to_json(const CalibrationReport& r) {
    Json j;
    j["params"] = to_json(r.params);
    j["achieved"] = to_json(r.achieved);
    j["passes"] = r.passes;
    j["evaluations"] = r.evaluations;
    j["converged"] = r.converged;
    j["warnings"] = r.warnings;
    return j;
}

NeuronParams neuron_from_json(const Json& j, std::string_view where, const NeuronParams& defaults) {
    Reader r(j, where);
    NeuronParams p = defaults;
    if (auto kind = r.text("kind")) {
        if (*kind == "slif") p.kind = ModelKind::slif;
        else if (*kind == "lif") p.kind = ModelKind::lif;
        else r.fail("kind", "expected \"slif\" or \"lif\"");
    }
    r.number(c_m_key, p.c_m);
    r.number(g_l_key, p.g_l);
    r.number("v_rest_mV", p.v_rest);
    r.number("v_th_mV", p.v_th);
    r.number("e_s_mV", p.e_s);
    r.number("g_max_mS_per_cm2", p.g_max);
    r.number(tau_s_key, p.tau_s);
    r.number("w_nC_per_cm2", p.w);
    if (auto mode = r.text("spike_mode")) {
        if (*mode == "saturate") p.spike_mode = SpikeMode::saturate;
        else if (*mode == "incremental") p.spike_mode = SpikeMode::incremental;
        else r.fail("spike_mode", "expected \"saturate\" or \"incremental\"");
    }
    r.number("delta_g_mS_per_cm2", p.delta_g);
    r.finish();
    checked(where, [&] { p.validate(); });
    return p;
}

IntegratorConfig integrator_from_json(const Json& j, std::string_view where, const IntegratorConfig& defaults) {
    Reader r(j, where);
    IntegratorConfig cfg = defaults;
    r.number("dt_ms", cfg.dt);
    if (auto scheme = r.text("scheme")) {
        auto s = scheme_from_string(*scheme);
        if (!s) r.fail("scheme", "expected \"exponential-euler\" or \"rk4\"");
        cfg.scheme = *s;
    }
    r.integer("record_stride", cfg.record_stride);
    r.integer("max_steps", cfg.max_steps);
    r.finish();
    checked(where, [&] { cfg.validate(); });
    return cfg;
}

IstScan scan_from_json(const Json& j, std::string_view where, const IstScan& defaults) {
    Reader r(j, where);
    IstScan scan = defaults;
    r.number("ist_min_ms", scan.ist_min);
    r.number("ist_max_ms", scan.ist_max);
    r.integer("n_points", scan.n_points);
    if (auto spacing = r.text("spacing")) {
        if (*spacing == "linear") scan.spacing = IstSpacing::linear;
        else if (*spacing == "log") scan.spacing = IstSpacing::log;
        else r.fail("spacing", "expected \"linear\" or \"log\"");
    }
    r.finish();
    checked(where, [&] { scan.validate(); });
    return scan;
}

SweepSpec sweep_from_json(const Json& j, std::string_view where, const SweepSpec& defaults) {
    Reader r(j, where);
    SweepSpec spec = defaults;

    auto axis = [&](const std::string& key, SweepAxis& out) {
        const Json* v = r.find(key);
        if (!v) r.fail(key, "required");
        Reader a(*v, r.child(key));
        auto name = a.text("param");
        if (!name) a.fail("param", "required");
        auto param = sweep_param_from_string(*name);
        if (!param) a.fail("param", "expected \"c_m\", \"g_l\" or \"tau_s\"");
        out.param = *param;
        std::string min_key = std::string("min_") + param_unit(*param);
        std::string max_key = std::string("max_") + param_unit(*param);
        if (!a.has(min_key) && !a.has(max_key)) {
            // Default span: +-1.5 decades around the reference value.
            out = default_sweep_spec(*param, *param == SweepParam::c_m ? SweepParam::g_l : SweepParam::c_m).axis1;
        }
        else if (!a.has(min_key) || !a.has(max_key)) {
            a.fail(a.has(min_key) ? max_key : min_key, "required together with the other bound");
        }
        a.number(min_key, out.min);
        a.number(max_key, out.max);
        a.integer("n", out.n);
        a.finish();
    };
    axis("axis1", spec.axis1);
    axis("axis2", spec.axis2);

    if (const Json* v = r.find("constraint")) {
        Reader c(*v, r.child("constraint"));
        auto name = c.text("product");
        if (!name) c.fail("product", "required");
        auto product = product_from_string(*name);
        if (!product) c.fail("product", "expected \"c_m*tau_s\", \"g_l*tau_s\" or \"c_m*g_l\"");
        std::string value_key = std::string("value_") + product_unit(*product);
        if (!c.has(value_key)) c.fail(value_key, "required");
        ProductConstraint pc{*product, 0.0};
        c.number(value_key, pc.value);
        c.finish();
        spec.constraint = pc;
    }
    if (const Json* v = r.find("fixed")) {
        Reader f(*v, r.child("fixed"));
        spec.fixed.clear();
        for (auto p: {SweepParam::c_m, SweepParam::g_l, SweepParam::tau_s}) {
            if (f.has(param_key(p))) {
                FixedValue fv{p, 0.0};
                f.number(param_key(p), fv.value);
                spec.fixed.push_back(fv);
            }
        }
        f.finish();
    }
    r.number("tw_offset_mV", spec.tw_offset);
    r.finish();
    return spec;
}

CalibrationTarget calibration_target_from_json(const Json& j, std::string_view where,
                                               const CalibrationTarget& defaults) {
    Reader r(j, where);
    CalibrationTarget t = defaults;
    r.number("target_favorite_ist_ms", t.target_favorite_ist);
    r.number("min_margin_mV", t.min_margin);
    r.number("max_timewidth_ms", t.max_timewidth);
    r.bounds("c_m_bounds_uF_per_cm2", t.c_m);
    r.bounds("g_l_bounds_mS_per_cm2", t.g_l);
    r.bounds("tau_s_bounds_ms", t.tau_s);
    r.number("tolerance", t.tolerance);
    r.integer("max_passes", t.max_passes);
    r.finish();
    checked(where, [&] { t.validate(); });
    return t;
}

} // namespace slif
