#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <slif/integrator.hpp>
#include <slif/neuron.hpp>

namespace slif {

// Onset of the first impulse of every two-spike probe [ms].
inline constexpr double default_pair_onset = 1.0;

// TW measurement level below the maximum amplitude [mV].
inline constexpr double default_tw_offset = 0.1;

enum class IstSpacing { linear, log };

struct IstScan {
    double ist_min = 0.1;  // [ms]
    double ist_max = 10.0; // [ms]
    int n_points = 100;
    IstSpacing spacing = IstSpacing::linear;

    void validate() const;
    std::vector<double> grid() const;

    bool operator==(const IstScan&) const = default;
};

struct ResponseCurve {
    std::vector<double> ists;       // [ms], strictly ascending
    std::vector<double> amplitudes; // [mV], peak amplitude per IST
};

struct ResponseMetrics {
    double favorite_ist = 0.0;  // [ms]
    double max_amplitude = 0.0; // [mV]
    double margin = 0.0;        // [mV]
    double timewidth = 0.0;     // [ms]
    double tw_low = 0.0;        // [ms]
    double tw_high = 0.0;       // [ms]
    bool non_unimodal = false;     // grid not unimodal; favorite left at the best grid point
    bool tw_low_saturated = false;  // level never crossed below favorite_ist
    bool tw_high_saturated = false; // level never crossed above favorite_ist

    // Pipe-separated flag names, or "ok".
    std::string flag_string() const;

    bool operator==(const ResponseMetrics&) const = default;
};

// Peak amplitude of the two-spike response at `ist`, firing disabled.
double pair_amplitude(const NeuronParams& params, double ist, const IntegratorConfig& cfg);

// Samples pair_amplitude on the scan grid; points are evaluated on up to
// `jobs` threads and assembled in grid order.
ResponseCurve response_curve(const NeuronParams& params, const IstScan& scan,
                             const IntegratorConfig& cfg, unsigned jobs = 1);

// Favorite IST by golden-section refinement around the best grid point,
// Timewidth bounds by bisection on amplitude = max - tw_offset, margin over
// the curve's range. Tolerance for both searches is `tolerance` ms.
ResponseMetrics metrics(const ResponseCurve& curve, const NeuronParams& params,
                        const IntegratorConfig& cfg, double tw_offset = default_tw_offset,
                        double tolerance = 1.0e-3);

// response_curve followed by metrics. Without an explicit integrator
// config, IntegratorConfig::defaults_for(params) is used.
ResponseMetrics measure_response(const NeuronParams& params, const IstScan& scan,
                                 const std::optional<IntegratorConfig>& cfg = std::nullopt,
                                 unsigned jobs = 1, double tw_offset = default_tw_offset,
                                 double tolerance = 1.0e-3);

// Whether the firing-enabled two-spike run emits at least one output spike.
bool fires(const NeuronParams& params, double ist, const IntegratorConfig& cfg);

// IST interval on which the amplitude reaches `level` [mV above rest], found
// by scanning `scan` then bisecting each edge to `tolerance`. Empty when the
// level is never reached on the grid.
struct IstBand {
    double low = 0.0;
    double high = 0.0;
};
std::optional<IstBand> amplitude_band(const ResponseCurve& curve, const NeuronParams& params,
                                      const IntegratorConfig& cfg, double level,
                                      double tolerance = 1.0e-3);

void write_response_csv(std::ostream& out, const ResponseCurve& curve);
void write_response_csv(const std::filesystem::path& path, const ResponseCurve& curve);

// Flat JSON object: the six metric fields plus the three flags.
std::string metrics_json(const ResponseMetrics& m);

} // namespace slif
