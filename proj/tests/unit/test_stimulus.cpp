#include <gtest/gtest.h>

#include <sstream>
#include <vector>

#include <slif/error.hpp>
#include <slif/stimulus.hpp>

using namespace slif;

namespace {

template <typename Fn>
ErrorCode error_code(Fn&& fn) {
    try {
        fn();
    }
    catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no slif::Error thrown";
    return ErrorCode::io_error;
}

} // namespace

TEST(stimulus, pair_places_second_spike_after_ist) {
    auto t = pair(1.0, 3.0);
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t.front(), 1.0);
    EXPECT_EQ(t.back(), 4.0);
}

TEST(stimulus, pair_rejects_nonpositive_ist) {
    EXPECT_EQ(error_code([] { pair(1.0, 0.0); }), ErrorCode::nonpositive_ist);
    EXPECT_EQ(error_code([] { pair(1.0, -2.0); }), ErrorCode::nonpositive_ist);
}

TEST(stimulus, periodic_train) {
    auto t = periodic(0.5, 2.0, 4);
    std::vector<double> expected{0.5, 2.5, 4.5, 6.5};
    EXPECT_EQ(std::vector<double>(t.times().begin(), t.times().end()), expected);
    EXPECT_EQ(error_code([] { periodic(0.0, 0.0, 3); }), ErrorCode::nonpositive_period);
    EXPECT_EQ(error_code([] { periodic(0.0, 1.0, 0); }), ErrorCode::zero_count);
}

TEST(stimulus, unsorted_or_negative_times_are_rejected) {
    EXPECT_EQ(error_code([] { SpikeTrain({2.0, 1.0}); }), ErrorCode::unsorted_input);
    EXPECT_EQ(error_code([] { SpikeTrain({1.0, 1.0}); }), ErrorCode::unsorted_input);
    EXPECT_EQ(error_code([] { SpikeTrain({-0.5, 1.0}); }), ErrorCode::unsorted_input);
    EXPECT_TRUE(SpikeTrain{}.empty());
}

TEST(stimulus, reads_one_column_csv) {
    std::istringstream in("time_ms\n1.0\n2.5\r\n\n4\n");
    auto t = read_spike_train_csv(in);
    std::vector<double> expected{1.0, 2.5, 4.0};
    EXPECT_EQ(std::vector<double>(t.times().begin(), t.times().end()), expected);
}

TEST(stimulus, csv_errors) {
    std::istringstream no_header("1.0\n2.0\n");
    EXPECT_EQ(error_code([&] { read_spike_train_csv(no_header); }), ErrorCode::io_error);
    std::istringstream garbage("time_ms\n1.0\nabc\n");
    EXPECT_EQ(error_code([&] { read_spike_train_csv(garbage); }), ErrorCode::io_error);
    std::istringstream unsorted("time_ms\n3.0\n1.0\n");
    EXPECT_EQ(error_code([&] { read_spike_train_csv(unsorted); }), ErrorCode::unsorted_input);
}
