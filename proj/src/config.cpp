#include "primwalk/config.hpp"

namespace primwalk {

using nlohmann::json;

StepDistribution measure_from_json(const json& spec, int nu_dim) {
    if (spec.is_string()) return named_measure(spec.get<std::string>(), nu_dim);
    if (!spec.is_object())
        throw std::invalid_argument("measure spec must be a name or an object");
    for (const auto& [key, value] : spec.items()) {
        (void)value;
        if (key != "support" && key != "denominator")
            throw std::invalid_argument("unknown key '" + key + "' in measure spec");
    }
    if (!spec.contains("support") || !spec.contains("denominator"))
        throw std::invalid_argument("inline measure needs 'support' and 'denominator'");
    std::vector<WeightedPoint> support;
    for (const auto& entry : spec.at("support")) {
        for (const auto& [key, value] : entry.items()) {
            (void)value;
            if (key != "vector" && key != "weight")
                throw std::invalid_argument("unknown key '" + key + "' in support entry");
        }
        WeightedPoint wp;
        wp.point = entry.at("vector").get<LatticePoint>();
        wp.weight = entry.at("weight").get<std::uint64_t>();
        support.push_back(std::move(wp));
    }
    StepDistribution mu(std::move(support), spec.at("denominator").get<std::uint64_t>());
    mu.validate_or_throw();
    return mu;
}

json measure_to_json(const StepDistribution& mu) {
    json support = json::array();
    for (const auto& wp : mu.support())
        support.push_back({{"vector", wp.point}, {"weight", wp.weight}});
    return json{{"support", std::move(support)}, {"denominator", mu.denominator()}};
}

} // namespace primwalk
