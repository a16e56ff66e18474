#pragma once

// JSON forms of the configuration and result types. Every physical quantity
// carries its unit in the key name (tau_s_ms, c_m_uF_per_cm2, ...). Readers
// start from a default value, override the keys present, reject unknown keys
// and report failures as Error(invalid_config) prefixed with `where`.

#include <string_view>

#include <nlohmann/json.hpp>

#include <slif/calibrate.hpp>
#include <slif/integrator.hpp>
#include <slif/neuron.hpp>
#include <slif/response.hpp>
#include <slif/sweep.hpp>

namespace slif {

using Json = nlohmann::ordered_json;

Json to_json(const NeuronParams& params);
Json to_json(const IntegratorConfig& cfg);
Json to_json(const IstScan& scan);
Json to_json(const ResponseMetrics& m);
Json to_json(const SweepSpec& spec);
Json to_json(const CalibrationTarget& target);
Json to_json(const CalibrationReport& report);

NeuronParams neuron_from_json(const Json& j, std::string_view where = "neuron",
                              const NeuronParams& defaults = {});
IntegratorConfig integrator_from_json(const Json& j, std::string_view where = "integrator",
                                      const IntegratorConfig& defaults = {});
IstScan scan_from_json(const Json& j, std::string_view where = "scan", const IstScan& defaults = {});

// Axes, constraint, fixed values and tw offset; base, scan and integrator
// are taken from `defaults`.
SweepSpec sweep_from_json(const Json& j, std::string_view where = "sweep", const SweepSpec& defaults = {});

// Targets and bounds; base and scan are taken from `defaults`.
CalibrationTarget calibration_target_from_json(const Json& j, std::string_view where = "calibration",
                                               const CalibrationTarget& defaults = {});

} // namespace slif
