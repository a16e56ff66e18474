#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace slif {

// Ordered arrival times of input impulses [ms]. Strictly ascending, all >= 0.
class SpikeTrain {
public:
    SpikeTrain() = default;

    // Throws Error(unsorted_input) on non-ascending or negative times.
    explicit SpikeTrain(std::vector<double> times);

    std::span<const double> times() const noexcept { return times_; }
    std::size_t size() const noexcept { return times_.size(); }
    bool empty() const noexcept { return times_.empty(); }
    double front() const { return times_.front(); }
    double back() const { return times_.back(); }

    bool operator==(const SpikeTrain&) const = default;

private:
    std::vector<double> times_;
};

// [t0, t0 + ist]
SpikeTrain pair(double t0, double ist);

// [t0, t0 + period, ..., t0 + (count-1)*period]
SpikeTrain periodic(double t0, double period, int count);

// One-column CSV with header `time_ms`.
SpikeTrain read_spike_train_csv(std::istream& in);
SpikeTrain read_spike_train_csv(const std::filesystem::path& path);

} // namespace slif
