#pragma once

#include <json.hpp>

#include "primwalk/measure.hpp"

namespace primwalk {

/// A measure spec is either a name ("eta1" | "eta2" | "eta3" | "nu") or an
/// inline object: {"support": [{"vector": [..], "weight": w}, ...],
/// "denominator": n}. nu takes its dimension from nu_dim.
StepDistribution measure_from_json(const nlohmann::json& spec, int nu_dim = 2);

/// Inline-form echo of a measure (support + denominator), used in config
/// echoes and manifests.
nlohmann::json measure_to_json(const StepDistribution& mu);

} // namespace primwalk
