#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <slif/integrator.hpp>
#include <slif/neuron.hpp>
#include <slif/response.hpp>

namespace slif {

enum class SweepParam { c_m, g_l, tau_s };

std::string_view to_string(SweepParam param) noexcept;
std::optional<SweepParam> sweep_param_from_string(std::string_view name) noexcept;

double get(const NeuronParams& params, SweepParam which) noexcept;
void set(NeuronParams& params, SweepParam which, double value) noexcept;

// Log-spaced grid from min to max inclusive. min == max is allowed and gives
// n identical values.
struct SweepAxis {
    SweepParam param = SweepParam::c_m;
    double min = 0.0;
    double max = 0.0;
    int n = 25;

    std::vector<double> values() const;

    bool operator==(const SweepAxis&) const = default;
};

enum class Product { c_m_tau_s, g_l_tau_s, c_m_g_l };

std::string_view to_string(Product product) noexcept;
std::optional<Product> product_from_string(std::string_view name) noexcept;

struct ProductConstraint {
    Product product = Product::c_m_tau_s;
    double value = 0.0;

    bool operator==(const ProductConstraint&) const = default;
};

struct FixedValue {
    SweepParam param = SweepParam::c_m;
    double value = 0.0;

    bool operator==(const FixedValue&) const = default;
};

struct SweepSpec {
    NeuronParams base;                          // source of every parameter not set below
    SweepAxis axis1{SweepParam::c_m, 0.0, 0.0, 25};
    SweepAxis axis2{SweepParam::g_l, 0.0, 0.0, 25};
    std::optional<ProductConstraint> constraint; // binds the parameter not on an axis
    std::vector<FixedValue> fixed;               // explicit values, override base
    IstScan scan;
    std::optional<IntegratorConfig> integrator;  // per-cell defaults_for() when empty
    double tw_offset = default_tw_offset;

    // Throws Error(spec_inconsistent) when axes, constraint and fixed values
    // do not determine all three parameters exactly once, and
    // Error(invalid_config) for malformed grids.
    void validate() const;

    // Parameters at grid coordinates (x1, x2).
    NeuronParams resolve(double x1, double x2) const;
};

// Axes span +-1.5 decades around the reference value of each parameter,
// 25 points each; the third parameter comes from base.
SweepSpec default_sweep_spec(SweepParam axis1, SweepParam axis2);

struct SweepCell {
    double x1 = 0.0;
    double x2 = 0.0;
    std::optional<ResponseMetrics> metrics; // empty when the cell failed
    std::string error;                      // failure message, empty on success
};

struct SweepResult {
    SweepSpec spec;
    std::vector<SweepCell> cells; // axis1 outer, axis2 inner; one per grid point
    std::string timestamp;        // UTC, ISO 8601
    std::string version;

    std::size_t failures() const noexcept;
};

// Evaluates every grid point on up to `jobs` threads (0 = all cores). A cell
// that throws is recorded with its message instead of aborting the sweep.
SweepResult run_sweep(const SweepSpec& spec, unsigned jobs = 1);

// Long format: axis1,axis2,favorite_ist_ms,max_amplitude_mV,margin_mV,
// timewidth_ms,flags. Failed cells carry nan metrics and the flag "error".
void write_sweep_csv(std::ostream& out, const SweepResult& result);
void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result);

// Spec echo, axis names, grid shape, failure list, timestamp and version.
std::string sweep_metadata_json(const SweepResult& result);

} // namespace slif
