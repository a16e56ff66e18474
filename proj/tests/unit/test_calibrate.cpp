#include <gtest/gtest.h>

#include <cmath>

#include <slif/calibrate.hpp>

using namespace slif;

namespace {

double rel(double a, double b) { return std::abs(a - b)/std::abs(b); }

int failing_stage(const CalibrationTarget& t) {
    try {
        calibrate(t);
    }
    catch (const CalibrationError& e) {
        EXPECT_EQ(e.code(), ErrorCode::infeasible_target);
        EXPECT_NE(std::string(e.what()).find("stage " + std::to_string(static_cast<int>(e.stage()))), std::string::npos);
        return static_cast<int>(e.stage());
    }
    return 0;
}

} // namespace

TEST(calibrate, reference_target_reproduces_the_stored_neuron) {
    auto report = calibrate(reference_calibration_target());
    EXPECT_TRUE(report.converged);
    EXPECT_LT(rel(report.params.c_m, reference_c_m), 1e-6);
    EXPECT_LT(rel(report.params.g_l, reference_g_l), 1e-6);
    EXPECT_LT(rel(report.params.tau_s, reference_tau_s), 1e-6);
    EXPECT_LT(rel(report.achieved.favorite_ist, 3.0), 0.02);
    EXPECT_GE(report.achieved.margin, 0.57*(1 - 5e-3));
    EXPECT_LE(report.achieved.timewidth, 3.4*(1 + 5e-3));
    EXPECT_EQ(report.params.g_max, default_g_max);
    EXPECT_GT(report.evaluations, 0);
}

TEST(calibrate, idempotent_on_a_calibrated_neuron) {
    auto first = calibrate(reference_calibration_target());
    CalibrationTarget t;
    t.target_favorite_ist = first.achieved.favorite_ist;
    t.min_margin = first.achieved.margin;
    t.max_timewidth = first.achieved.timewidth;
    auto again = calibrate(t);
    EXPECT_LT(rel(again.params.c_m, first.params.c_m), 0.01);
    EXPECT_LT(rel(again.params.g_l, first.params.g_l), 0.01);
    EXPECT_LT(rel(again.params.tau_s, first.params.tau_s), 0.01);

    // Metrics measured outside the calibrator, on the default scan.
    auto m = measure_response(first.params, IstScan{});
    t.target_favorite_ist = m.favorite_ist;
    t.min_margin = m.margin;
    t.max_timewidth = m.timewidth;
    again = calibrate(t);
    EXPECT_LT(rel(again.params.c_m, first.params.c_m), 0.01);
    EXPECT_LT(rel(again.params.g_l, first.params.g_l), 0.01);
    EXPECT_LT(rel(again.params.tau_s, first.params.tau_s), 0.01);
}

TEST(calibrate, keeps_the_non_searched_fields_of_base) {
    auto t = reference_calibration_target();
    t.base.v_th = -60.0;
    t.base.w = 1.0e-3;
    auto report = calibrate(t);
    EXPECT_EQ(report.params.v_th, -60.0);
    EXPECT_EQ(report.params.w, 1.0e-3);
    EXPECT_EQ(report.params.v_rest, t.base.v_rest);
}

TEST(calibrate, unreachable_margin_names_stage_2) {
    auto t = reference_calibration_target();
    t.min_margin = 5.0;
    EXPECT_EQ(failing_stage(t), 2);
}

TEST(calibrate, unreachable_timewidth_names_stage_3) {
    auto t = reference_calibration_target();
    t.max_timewidth = 0.5;
    EXPECT_EQ(failing_stage(t), 3);
}

TEST(calibrate, favorite_outside_the_scan_names_stage_1) {
    auto t = reference_calibration_target();
    t.c_m = {1.0e-6, 1.0e-5};
    EXPECT_EQ(failing_stage(t), 1);
}

TEST(calibrate, invalid_targets) {
    auto t = reference_calibration_target();
    t.target_favorite_ist = 0.0;
    EXPECT_THROW(calibrate(t), Error);
    t = reference_calibration_target();
    t.g_l = {1e-3, 1e-4};
    EXPECT_THROW(calibrate(t), Error);
    t = reference_calibration_target();
    t.base.kind = ModelKind::lif;
    try {
        calibrate(t);
        FAIL();
    }
    catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::invalid_config);
    }
}

TEST(calibrate, round_trip_from_a_perturbed_neuron) {
    NeuronParams p;
    p.c_m *= 1.2;
    p.g_l *= 0.85;
    p.tau_s *= 1.1;
    auto source = measure_response(p, IstScan{});
    CalibrationTarget t;
    t.target_favorite_ist = source.favorite_ist;
    t.min_margin = source.margin;
    t.max_timewidth = source.timewidth;
    auto got = calibrate(t).achieved;
    EXPECT_LT(rel(got.favorite_ist, source.favorite_ist), 0.05);
    EXPECT_LT(rel(got.margin, source.margin), 0.05);
    EXPECT_LT(rel(got.timewidth, source.timewidth), 0.05);
}

TEST(calibrate, stage_names) {
    EXPECT_EQ(to_string(CalibrationStage::membrane_capacitance), "c_m");
    EXPECT_EQ(to_string(CalibrationStage::leak_conductance), "g_l");
    EXPECT_EQ(to_string(CalibrationStage::synaptic_time_constant), "tau_s");
    CalibrationError e(CalibrationStage::leak_conductance, "no luck");
    EXPECT_STREQ(e.what(), "infeasible-target: stage 2 (g_l): no luck");
}
