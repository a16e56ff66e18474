#include <slif/sweep.hpp>

#include <array>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <ostream>

#include <slif/error.hpp>
#include <slif/json_io.hpp>
#include <slif/parallel.hpp>
#include <slif/version.hpp>
#include "text.hpp"

namespace slif {

std::string_view to_string(SweepParam param) noexcept {
    switch (param) {
    case SweepParam::c_m: return "c_m";
    case SweepParam::g_l: return "g_l";
    case SweepParam::tau_s: return "tau_s";
    }
    return "unknown";
}

std::optional<SweepParam> sweep_param_from_string(std::string_view name) noexcept {
    for (auto p: {SweepParam::c_m, SweepParam::g_l, SweepParam::tau_s}) {
        if (name == to_string(p)) return p;
    }
    return std::nullopt;
}

double get(const NeuronParams& params, SweepParam which) noexcept {
    switch (which) {
    case SweepParam::c_m: return params.c_m;
    case SweepParam::g_l: return params.g_l;
    case SweepParam::tau_s: return params.tau_s;
    }
    return 0.0;
}

void set(NeuronParams& params, SweepParam which, double value) noexcept {
    switch (which) {
    case SweepParam::c_m: params.c_m = value; break;
    case SweepParam::g_l: params.g_l = value; break;
    case SweepParam::tau_s: params.tau_s = value; break;
    }
}

std::vector<double> SweepAxis::values() const {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        out[i] = n == 1 ? min : min*std::pow(max/min, static_cast<double>(i)/(n - 1));
    }
    out.front() = min;
    out.back() = max;
    return out;
}

std::string_view to_string(Product product) noexcept {
    switch (product) {
    case Product::c_m_tau_s: return "c_m*tau_s";
    case Product::g_l_tau_s: return "g_l*tau_s";
    case Product::c_m_g_l: return "c_m*g_l";
    }
    return "unknown";
}

std::optional<Product> product_from_string(std::string_view name) noexcept {
    for (auto p: {Product::c_m_tau_s, Product::g_l_tau_s, Product::c_m_g_l}) {
        if (name == to_string(p)) return p;
    }
    return std::nullopt;
}

namespace {

std::array<SweepParam, 2> factors(Product product) {
    switch (product) {
    case Product::c_m_tau_s: return {SweepParam::c_m, SweepParam::tau_s};
    case Product::g_l_tau_s: return {SweepParam::g_l, SweepParam::tau_s};
    case Product::c_m_g_l: return {SweepParam::c_m, SweepParam::g_l};
    }
    return {SweepParam::c_m, SweepParam::c_m};
}

SweepParam third_of(SweepParam a, SweepParam b) {
    for (auto p: {SweepParam::c_m, SweepParam::g_l, SweepParam::tau_s}) {
        if (p != a && p != b) return p;
    }
    return SweepParam::c_m;
}

[[noreturn]] void inconsistent(const std::string& what) {
    throw Error(ErrorCode::spec_inconsistent, what);
}

} // namespace

void SweepSpec::validate() const {
    for (const auto* axis: {&axis1, &axis2}) {
        std::string name = axis == &axis1 ? "axis1" : "axis2";
        if (axis->n < 2) throw Error(ErrorCode::invalid_config, name + ".n must be >= 2");
        if (!(axis->min > 0) || !(axis->max >= axis->min) || !std::isfinite(axis->max)) {
            throw Error(ErrorCode::invalid_config, name + " range must satisfy 0 < min <= max");
        }
    }
    if (axis1.param == axis2.param) inconsistent("both axes sweep " + std::string(to_string(axis1.param)));

    SweepParam third = third_of(axis1.param, axis2.param);
    for (std::size_t i = 0; i < fixed.size(); ++i) {
        const auto& f = fixed[i];
        std::string name(to_string(f.param));
        if (f.param != third) inconsistent("fixed " + name + " is also a sweep axis");
        for (std::size_t k = 0; k < i; ++k) {
            if (fixed[k].param == f.param) inconsistent("fixed " + name + " given twice");
        }
        if (!(f.value > 0) || !std::isfinite(f.value)) {
            throw Error(ErrorCode::invalid_config, "fixed " + name + " must be > 0");
        }
        if (constraint) {
            inconsistent("constraint " + std::string(to_string(constraint->product)) + " conflicts with fixed " + name);
        }
    }
    if (constraint) {
        auto [a, b] = factors(constraint->product);
        if (a != third && b != third) {
            inconsistent("constraint " + std::string(to_string(constraint->product)) +
                         " does not involve the unswept parameter " + std::string(to_string(third)));
        }
        if (!(constraint->value > 0) || !std::isfinite(constraint->value)) {
            throw Error(ErrorCode::invalid_config, "constraint value must be > 0");
        }
    }
    scan.validate();
    if (integrator) integrator->validate();
    if (!(tw_offset > 0)) throw Error(ErrorCode::invalid_config, "tw_offset must be > 0");
}

NeuronParams SweepSpec::resolve(double x1, double x2) const {
    NeuronParams p = base;
    set(p, axis1.param, x1);
    set(p, axis2.param, x2);
    SweepParam third = third_of(axis1.param, axis2.param);
    for (const auto& f: fixed) set(p, f.param, f.value);
    if (constraint) {
        auto [a, b] = factors(constraint->product);
        SweepParam partner = a == third ? b : a;
        set(p, third, constraint->value/get(p, partner));
    }
    return p;
}

SweepSpec default_sweep_spec(SweepParam axis1, SweepParam axis2) {
    SweepSpec spec;
    NeuronParams ref;
    auto around = [&](SweepParam which) {
        double centre = get(ref, which);
        double k = std::pow(10.0, 1.5);
        return SweepAxis{which, centre/k, centre*k, 25};
    };
    spec.axis1 = around(axis1);
    spec.axis2 = around(axis2);
    return spec;
}

std::size_t SweepResult::failures() const noexcept {
    std::size_t n = 0;
    for (const auto& c: cells) n += c.metrics ? 0 : 1;
    return n;
}

SweepResult run_sweep(const SweepSpec& spec, unsigned jobs) {
    spec.validate();
    auto xs = spec.axis1.values();
    auto ys = spec.axis2.values();

    SweepResult result;
    result.spec = spec;
    result.version = std::string(version());
    result.cells.resize(xs.size()*ys.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t k = 0; k < ys.size(); ++k) {
            auto& cell = result.cells[i*ys.size() + k];
            cell.x1 = xs[i];
            cell.x2 = ys[k];
        }
    }

    parallel_for(result.cells.size(), jobs, [&](std::size_t i) {
        auto& cell = result.cells[i];
        try {
            cell.metrics = measure_response(spec.resolve(cell.x1, cell.x2), spec.scan, spec.integrator, 1, spec.tw_offset);
        }
        catch (const std::exception& e) {
            cell.error = e.what();
        }
    });

    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &utc);
    result.timestamp = stamp;
    return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
    out << "axis1,axis2,favorite_ist_ms,max_amplitude_mV,margin_mV,timewidth_ms,flags\n";
    for (const auto& c: result.cells) {
        out << detail::format_double(c.x1) << ',' << detail::format_double(c.x2) << ',';
        if (c.metrics) {
            const auto& m = *c.metrics;
            out << detail::format_double(m.favorite_ist) << ',' << detail::format_double(m.max_amplitude) << ','
                << detail::format_double(m.margin) << ',' << detail::format_double(m.timewidth) << ','
                << m.flag_string() << '\n';
        }
        else {
            out << "nan,nan,nan,nan,error\n";
        }
    }
}

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
    write_sweep_csv(out, result);
}

std::string sweep_metadata_json(const SweepResult& result) {
    Json j;
    j["spec"] = to_json(result.spec);
    j["axis1"] = to_string(result.spec.axis1.param);
    j["axis2"] = to_string(result.spec.axis2.param);
    j["shape"] = {result.spec.axis1.n, result.spec.axis2.n};
    j["cells"] = result.cells.size();
    Json failed = Json::array();
    for (const auto& c: result.cells) {
        if (!c.metrics) failed.push_back({{"axis1", c.x1}, {"axis2", c.x2}, {"error", c.error}});
    }
    j["failed_cells"] = std::move(failed);
    j["timestamp"] = result.timestamp;
    j["version"] = result.version;
    return j.dump(2);
}

} // namespace slif
