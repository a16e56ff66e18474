#include <slif/stimulus.hpp>

#include <cmath>
#include <fstream>
#include <istream>
#include <string>

#include <slif/error.hpp>
#include "text.hpp"

namespace slif {

SpikeTrain::SpikeTrain(std::vector<double> times): times_(std::move(times)) {
    for (std::size_t i = 0; i < times_.size(); ++i) {
        if (!std::isfinite(times_[i]) || times_[i] < 0) {
            throw Error(ErrorCode::unsorted_input, "spike time " + std::to_string(i) + " must be finite and >= 0");
        }
        if (i > 0 && !(times_[i] > times_[i-1])) {
            throw Error(ErrorCode::unsorted_input, "spike times must be strictly ascending (index " + std::to_string(i) + ")");
        }
    }
}

SpikeTrain pair(double t0, double ist) {
    if (!(ist > 0) || !std::isfinite(ist)) throw Error(ErrorCode::nonpositive_ist, "ist must be > 0");
    return SpikeTrain({t0, t0 + ist});
}

SpikeTrain periodic(double t0, double period, int count) {
    if (!(period > 0) || !std::isfinite(period)) throw Error(ErrorCode::nonpositive_period, "period must be > 0");
    if (count < 1) throw Error(ErrorCode::zero_count, "count must be >= 1");
    std::vector<double> times;
    times.reserve(count);
    for (int i = 0; i < count; ++i) times.push_back(t0 + i*period);
    return SpikeTrain(std::move(times));
}

SpikeTrain read_spike_train_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != "time_ms") {
        throw Error(ErrorCode::io_error, "spike train CSV must start with header 'time_ms'");
    }
    std::vector<double> times;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        auto field = detail::trim(line);
        if (field.empty()) continue;
        auto value = detail::parse_double(field);
        if (!value) {
            throw Error(ErrorCode::io_error, "line " + std::to_string(lineno) + ": not a number: " + std::string(field));
        }
        times.push_back(*value);
    }
    return SpikeTrain(std::move(times));
}

SpikeTrain read_spike_train_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
    return read_spike_train_csv(in);
}

} // namespace slif
