#ifndef ROCCG_NEURAL_SERIALIZE_HPP_
#define ROCCG_NEURAL_SERIALIZE_HPP_

#include <string>

#include "json.hpp"
#include "neural/network.hpp"

namespace roccg::neural {

inline constexpr int kModelSchemaVersion = 1;

// Document layout:
//   {"format": "roccg-value-model", "schema_version": 1, "family", "target_mode",
//    "x_encoder": {"element": [layer...], "post": [layer...]}, "xi_encoder",
//    "value": [layer...],
//    "scalers": {"x": {"min", "max"}, "xi": {...}, "label": {"min", "max"}}}
// with layer = {"in", "out", "activation", "weights" (row-major), "bias"}.
// Doubles are written in shortest round-trip form, so save/load is exact.
nlohmann::json ModelToJson(const ValueModel& model);
// Throws InputError naming the offending field.
ValueModel ModelFromJson(const nlohmann::json& doc);

void SaveModel(const ValueModel& model, const std::string& path);
ValueModel LoadModel(const std::string& path);

}  // namespace roccg::neural

#endif  // ROCCG_NEURAL_SERIALIZE_HPP_
