#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include <slif/error.hpp>
#include <slif/json_io.hpp>

using namespace slif;

namespace {

std::string config_error(const std::function<void()>& fn) {
    try {
        fn();
    }
    catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::invalid_config) << e.what();
        return e.what();
    }
    ADD_FAILURE() << "no error thrown";
    return {};
}

} // namespace

TEST(json_io, neuron_round_trip_property) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> decade(-1.0, 1.0);
    for (int i = 0; i < 25; ++i) {
        NeuronParams p;
        p.c_m *= std::pow(10.0, decade(rng));
        p.g_l *= std::pow(10.0, decade(rng));
        p.tau_s *= std::pow(10.0, decade(rng));
        p.v_th = -65.0 + 10.0*(decade(rng) + 1.0);
        p.kind = i % 2 ? ModelKind::lif : ModelKind::slif;
        p.spike_mode = i % 3 ? SpikeMode::saturate : SpikeMode::incremental;
        auto text = to_json(p).dump();
        EXPECT_EQ(neuron_from_json(Json::parse(text)), p);
    }
}

TEST(json_io, missing_keys_keep_defaults) {
    auto p = neuron_from_json(Json::parse(R"({"tau_s_ms": 2.5})"));
    EXPECT_EQ(p.tau_s, 2.5);
    EXPECT_EQ(p.c_m, NeuronParams{}.c_m);
}

TEST(json_io, unknown_and_mistyped_keys_name_the_field) {
    auto msg = config_error([] { neuron_from_json(Json::parse(R"({"tau_s": 2.5})")); });
    EXPECT_NE(msg.find("neuron.tau_s: unknown key"), std::string::npos) << msg;
    msg = config_error([] { neuron_from_json(Json::parse(R"({"tau_s_ms": "fast"})")); });
    EXPECT_NE(msg.find("neuron.tau_s_ms: expected a number"), std::string::npos) << msg;
    msg = config_error([] { neuron_from_json(Json::parse(R"({"tau_s_ms": -1})")); });
    EXPECT_NE(msg.find("tau_s must be > 0"), std::string::npos) << msg;
    msg = config_error([] { scan_from_json(Json::parse(R"({"n_points": 2})")); });
    EXPECT_NE(msg.find("n_points must be >= 3"), std::string::npos) << msg;
    msg = config_error([] { integrator_from_json(Json::parse(R"({"scheme": "euler"})")); });
    EXPECT_NE(msg.find("integrator.scheme"), std::string::npos) << msg;
}

TEST(json_io, sweep_axes_carry_units) {
    SweepSpec defaults;
    auto spec = sweep_from_json(Json::parse(R"({
        "axis1": {"param": "tau_s", "min_ms": 1, "max_ms": 10, "n": 4},
        "axis2": {"param": "g_l", "n": 3},
        "constraint": {"product": "c_m*g_l", "value_uF_mS_per_cm4": 1e-8}
    })"), "sweep", defaults);
    EXPECT_EQ(spec.axis1.param, SweepParam::tau_s);
    EXPECT_EQ(spec.axis1.min, 1.0);
    EXPECT_EQ(spec.axis1.n, 4);
    EXPECT_NEAR(std::sqrt(spec.axis2.min*spec.axis2.max), reference_g_l, 1e-15);
    EXPECT_EQ(spec.axis2.n, 3);
    ASSERT_TRUE(spec.constraint);
    EXPECT_EQ(spec.constraint->value, 1e-8);

    auto msg = config_error([] {
        sweep_from_json(Json::parse(R"({"axis1": {"param": "c_m", "min_ms": 1, "max_ms": 2},
                                        "axis2": {"param": "g_l"}})"));
    });
    EXPECT_NE(msg.find("sweep.axis1.min_ms: unknown key"), std::string::npos) << msg;
}

TEST(json_io, sweep_spec_echo_reads_back) {
    SweepSpec spec = default_sweep_spec(SweepParam::c_m, SweepParam::g_l);
    spec.constraint = ProductConstraint{Product::c_m_tau_s, 1e-3};
    Json echo = to_json(spec);
    Json block;
    for (const char* key: {"axis1", "axis2", "constraint", "tw_offset_mV"}) block[key] = echo[key];
    auto back = sweep_from_json(block, "sweep", SweepSpec{});
    EXPECT_EQ(back.axis1, spec.axis1);
    EXPECT_EQ(back.axis2, spec.axis2);
    EXPECT_EQ(back.constraint, spec.constraint);
}

TEST(json_io, calibration_target_bounds) {
    auto t = calibration_target_from_json(Json::parse(R"({
        "target_favorite_ist_ms": 2.5,
        "tau_s_bounds_ms": [0.5, 50]
    })"));
    EXPECT_EQ(t.target_favorite_ist, 2.5);
    EXPECT_EQ(t.tau_s.lo, 0.5);
    EXPECT_EQ(t.tau_s.hi, 50.0);
    auto msg = config_error([] { calibration_target_from_json(Json::parse(R"({"tau_s_bounds_ms": [5, 1]})")); });
    EXPECT_NE(msg.find("tau_s bounds"), std::string::npos) << msg;
}
