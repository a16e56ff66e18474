#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include <slif/error.hpp>
#include <slif/sweep.hpp>

using namespace slif;

namespace {

ErrorCode validate_code(const SweepSpec& spec) {
    try {
        spec.validate();
    }
    catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::io_error;
}

SweepSpec small_spec(int n) {
    SweepSpec spec = default_sweep_spec(SweepParam::c_m, SweepParam::g_l);
    spec.axis1.n = n;
    spec.axis2.n = n;
    spec.axis1.min = reference_c_m/2;
    spec.axis1.max = reference_c_m*2;
    spec.axis2.min = reference_g_l/2;
    spec.axis2.max = reference_g_l*2;
    spec.scan.n_points = 30;
    return spec;
}

// Five probes across +-0.2 decades of `which`, the other two parameters at
// their reference values unless a product constraint binds them.
std::vector<ResponseMetrics> slice(SweepParam which, std::optional<ProductConstraint> constraint = std::nullopt) {
    SweepParam other = which == SweepParam::g_l ? SweepParam::c_m : SweepParam::g_l;
    NeuronParams ref;
    SweepSpec spec;
    spec.axis1 = {which, get(ref, which)*std::pow(10.0, -0.2), get(ref, which)*std::pow(10.0, 0.2), 5};
    spec.axis2 = {other, get(ref, other), get(ref, other), 2};
    spec.constraint = constraint;
    auto result = run_sweep(spec, 2);
    std::vector<ResponseMetrics> out;
    for (std::size_t i = 0; i < result.cells.size(); i += 2) out.push_back(result.cells[i].metrics.value());
    return out;
}

template <typename Get>
bool strictly_increasing(const std::vector<ResponseMetrics>& ms, Get get) {
    for (std::size_t i = 1; i < ms.size(); ++i) {
        if (!(get(ms[i]) > get(ms[i-1]))) return false;
    }
    return true;
}

} // namespace

TEST(sweep, axis_values_are_log_spaced) {
    SweepAxis axis{SweepParam::tau_s, 1.0, 100.0, 5};
    auto v = axis.values();
    ASSERT_EQ(v.size(), 5u);
    EXPECT_EQ(v.front(), 1.0);
    EXPECT_EQ(v.back(), 100.0);
    EXPECT_NEAR(v[1], std::sqrt(10.0), 1e-12);
    EXPECT_NEAR(v[2], 10.0, 1e-12);
}

TEST(sweep, default_spec_spans_three_decades_around_reference) {
    auto spec = default_sweep_spec(SweepParam::c_m, SweepParam::tau_s);
    EXPECT_EQ(spec.axis1.n, 25);
    EXPECT_EQ(spec.axis2.n, 25);
    EXPECT_NEAR(std::log10(spec.axis1.max/spec.axis1.min), 3.0, 1e-12);
    EXPECT_NEAR(std::sqrt(spec.axis2.min*spec.axis2.max), reference_tau_s, 1e-9);
    EXPECT_NO_THROW(spec.validate());
}

TEST(sweep, constraint_binds_the_third_parameter) {
    SweepSpec spec = default_sweep_spec(SweepParam::c_m, SweepParam::g_l);
    spec.constraint = ProductConstraint{Product::c_m_tau_s, 1.0e-3};
    auto p = spec.resolve(2.0e-4, 5.0e-5);
    EXPECT_EQ(p.c_m, 2.0e-4);
    EXPECT_EQ(p.g_l, 5.0e-5);
    EXPECT_DOUBLE_EQ(p.tau_s, 5.0);

    spec = default_sweep_spec(SweepParam::tau_s, SweepParam::g_l);
    spec.constraint = ProductConstraint{Product::c_m_g_l, 1.0e-8};
    p = spec.resolve(3.0, 2.0e-4);
    EXPECT_DOUBLE_EQ(p.c_m, 5.0e-5);
    EXPECT_EQ(p.tau_s, 3.0);
}

TEST(sweep, fixed_value_overrides_base) {
    SweepSpec spec = default_sweep_spec(SweepParam::c_m, SweepParam::g_l);
    spec.fixed = {{SweepParam::tau_s, 4.0}};
    EXPECT_EQ(spec.resolve(1e-4, 1e-4).tau_s, 4.0);
}

TEST(sweep, inconsistent_specs) {
    SweepSpec spec = default_sweep_spec(SweepParam::c_m, SweepParam::g_l);
    spec.constraint = ProductConstraint{Product::c_m_tau_s, 1.0e-3};
    spec.fixed = {{SweepParam::tau_s, 4.0}};
    EXPECT_EQ(validate_code(spec), ErrorCode::spec_inconsistent);

    spec.fixed.clear();
    spec.constraint = ProductConstraint{Product::c_m_g_l, 1.0e-8};
    EXPECT_EQ(validate_code(spec), ErrorCode::spec_inconsistent);

    spec.constraint.reset();
    spec.fixed = {{SweepParam::c_m, 1.0e-4}};
    EXPECT_EQ(validate_code(spec), ErrorCode::spec_inconsistent);

    spec.fixed.clear();
    spec.axis2.param = SweepParam::c_m;
    EXPECT_EQ(validate_code(spec), ErrorCode::spec_inconsistent);

    spec = default_sweep_spec(SweepParam::c_m, SweepParam::g_l);
    spec.axis1.n = 1;
    EXPECT_EQ(validate_code(spec), ErrorCode::invalid_config);
}

TEST(sweep, degenerate_grid_gives_identical_records) {
    SweepSpec spec;
    spec.axis1 = {SweepParam::c_m, reference_c_m, reference_c_m, 2};
    spec.axis2 = {SweepParam::g_l, reference_g_l, reference_g_l, 2};
    auto result = run_sweep(spec, 2);
    ASSERT_EQ(result.cells.size(), 4u);
    for (const auto& c: result.cells) {
        ASSERT_TRUE(c.metrics);
        EXPECT_EQ(*c.metrics, *result.cells[0].metrics);
    }
    EXPECT_NEAR(result.cells[0].metrics->favorite_ist, 3.0, 0.06);
}

TEST(sweep, csv_layout_and_determinism) {
    auto spec = small_spec(3);
    auto a = run_sweep(spec, 1);
    auto b = run_sweep(spec, 3);
    std::ostringstream sa, sb;
    write_sweep_csv(sa, a);
    write_sweep_csv(sb, b);
    EXPECT_EQ(sa.str(), sb.str());

    std::istringstream in(sa.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "axis1,axis2,favorite_ist_ms,max_amplitude_mV,margin_mV,timewidth_ms,flags");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 9);
    // axis1 outer, axis2 inner
    EXPECT_EQ(a.cells[1].x1, a.cells[0].x1);
    EXPECT_GT(a.cells[1].x2, a.cells[0].x2);
}

TEST(sweep, failed_cells_are_isolated) {
    SweepSpec spec;
    spec.axis1 = {SweepParam::tau_s, 0.5, 50.0, 2};
    spec.axis2 = {SweepParam::g_l, reference_g_l, reference_g_l, 2};
    spec.scan = {0.1, 1.0, 10, IstSpacing::linear};
    IntegratorConfig cfg;
    cfg.dt = 1.0e-2;
    cfg.max_steps = 1500; // enough for the fast synapse only
    spec.integrator = cfg;
    auto result = run_sweep(spec, 2);
    ASSERT_EQ(result.cells.size(), 4u);
    EXPECT_TRUE(result.cells[0].metrics);
    EXPECT_TRUE(result.cells[1].metrics);
    ASSERT_EQ(result.failures(), 2u);
    std::ostringstream out;
    write_sweep_csv(out, result);
    EXPECT_NE(out.str().find(",nan,nan,nan,nan,error\n"), std::string::npos);
    for (const auto& c: result.cells) {
        if (!c.metrics) {
            EXPECT_NE(c.error.find("step-budget-exceeded"), std::string::npos);
        }
    }

    auto meta = nlohmann::json::parse(sweep_metadata_json(result));
    EXPECT_EQ(meta["failed_cells"].size(), result.failures());
}

TEST(sweep, metadata_echoes_the_spec) {
    auto spec = small_spec(2);
    spec.constraint = ProductConstraint{Product::c_m_tau_s, 1.0e-3};
    auto result = run_sweep(spec, 1);
    auto meta = nlohmann::json::parse(sweep_metadata_json(result));
    EXPECT_EQ(meta["axis1"], "c_m");
    EXPECT_EQ(meta["axis2"], "g_l");
    EXPECT_EQ(meta["shape"], nlohmann::json::array({2, 2}));
    EXPECT_EQ(meta["spec"]["constraint"]["product"], "c_m*tau_s");
    EXPECT_EQ(meta["spec"]["constraint"]["value_uF_ms_per_cm2"], 1.0e-3);
    EXPECT_EQ(meta["spec"]["axis1"]["n"], 2);
    EXPECT_TRUE(meta.contains("timestamp"));
    EXPECT_TRUE(meta.contains("version"));
    EXPECT_EQ(meta["timestamp"].get<std::string>().size(), 20u);
}

TEST(sweep, leak_slice_trends) {
    auto ms = slice(SweepParam::g_l);
    EXPECT_TRUE(strictly_increasing(ms, [](const ResponseMetrics& m) { return -m.margin; }));
    EXPECT_TRUE(strictly_increasing(ms, [](const ResponseMetrics& m) { return m.timewidth; }));
    EXPECT_TRUE(strictly_increasing(ms, [](const ResponseMetrics& m) { return -m.favorite_ist; }));
    // Margin and Timewidth improve together along g_l: their finite
    // differences have opposite signs on every interval.
    for (std::size_t i = 1; i < ms.size(); ++i) {
        double d_margin = ms[i].margin - ms[i-1].margin;
        double d_tw = ms[i].timewidth - ms[i-1].timewidth;
        EXPECT_LT(d_margin*d_tw, 0.0) << i;
    }
}

TEST(sweep, synaptic_slice_trend) {
    auto ms = slice(SweepParam::tau_s);
    EXPECT_TRUE(strictly_increasing(ms, [](const ResponseMetrics& m) { return m.timewidth; }));
}

TEST(sweep, constant_cm_tau_s_slice_trend) {
    auto ms = slice(SweepParam::c_m, ProductConstraint{Product::c_m_tau_s, 1.0e-3});
    for (std::size_t i = 1; i < ms.size(); ++i) EXPECT_GE(ms[i].favorite_ist, ms[i-1].favorite_ist);
    EXPECT_TRUE(strictly_increasing(ms, [](const ResponseMetrics& m) { return m.favorite_ist; }));
}
