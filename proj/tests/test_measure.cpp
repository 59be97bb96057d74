#include <doctest.h>

#include <map>

#include <json.hpp>

#include "primwalk/config.hpp"
#include "primwalk/measure.hpp"

using namespace primwalk;
using nlohmann::json;

namespace {

StepDistribution make(std::vector<WeightedPoint> support, std::uint64_t denom) {
    return StepDistribution(std::move(support), denom);
}

} // namespace

TEST_SUITE("measure") {

TEST_CASE("named measures validate") {
    CHECK(eta1().validate().empty());
    CHECK(eta2().validate().empty());
    CHECK(eta3().validate().empty());
    CHECK(nu(2).validate().empty());
    CHECK(nu(5).validate().empty());

    CHECK(eta1().denominator() == 200);
    CHECK(eta2().denominator() == 305);
    CHECK(eta3().denominator() == 51);

    // Weight of -e3 in eta1 is 42/200.
    const auto e1_measure = eta1();
    std::uint64_t weight = 0;
    for (const auto& wp : e1_measure.support())
        if (wp.point == LatticePoint{0, 0, -1, 0}) weight = wp.weight;
    CHECK(weight == 42);

    const auto n3 = nu(3);
    CHECK(n3.support().size() == 6);
    for (const auto& wp : n3.support()) CHECK(wp.weight == 1);
    CHECK(n3.denominator() == 6);
}

TEST_CASE("validate reports violations") {
    const auto bad_sum = make({{{1, 0}, 1}, {{0, 1}, 1}}, 3);
    const auto errors = bad_sum.validate();
    REQUIRE(errors.size() == 1);
    CHECK(errors[0] == "weights sum 2 != 3");

    CHECK_FALSE(make({{{1, 0}, 1}, {{1, 0}, 1}}, 2).validate().empty());  // duplicate
    CHECK_FALSE(make({{{1, 0}, 0}, {{0, 1}, 2}}, 2).validate().empty());  // zero weight
    CHECK_FALSE(make({{{1}, 1}}, 1).validate().empty());                  // d = 1 rejected
    CHECK_FALSE(make({{{1, 0}, 1}, {{0, 1, 0}, 1}}, 2).validate().empty()); // dim mixup
    CHECK_THROWS_AS(make({{{1, 0}, 1}}, 2).validate_or_throw(), std::invalid_argument);
}

TEST_CASE("first moments") {
    CHECK(first_moment(nu(2), NormKind::L2) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(first_moment(dirac({0, 0}), NormKind::L2) == 0.0);
    CHECK(first_moment(eta3(), NormKind::L2) == doctest::Approx(1.0).epsilon(1e-15));

    // Mixed-norm inline measure: {(1,1): 1/2, (-1,0): 1/2}.
    const auto mu = make({{{1, 1}, 1}, {{-1, 0}, 1}}, 2);
    CHECK(first_moment_exact(mu, NormKind::L1) == Rational(3, 2));
    CHECK(first_moment_exact(mu, NormKind::Linf) == Rational(1));
    CHECK(first_moment(mu, NormKind::L1) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK_THROWS_AS(first_moment_exact(mu, NormKind::L2), std::invalid_argument);
}

TEST_CASE("generation_check") {
    CHECK(generation_check(nu(2)).verdict == GenerationVerdict::Generates);
    for (int d = 2; d <= 5; ++d)
        CHECK(generation_check(nu(d)).verdict == GenerationVerdict::Generates);

    // No inverses: group is Z^2 but the semigroup is a quadrant.
    const auto quadrant = make({{{1, 0}, 1}, {{0, 1}, 1}}, 2);
    CHECK(generation_check(quadrant).verdict == GenerationVerdict::Inconclusive);

    // Parity obstruction: index-2 sublattice.
    const auto parity = make({{{2, 0}, 1}, {{0, 1}, 1}, {{-2, 0}, 1}, {{0, -1}, 1}}, 4);
    const auto res = generation_check(parity);
    CHECK(res.verdict == GenerationVerdict::FailsGroup);
    CHECK(res.detail.find("index-2") != std::string::npos);

    // Rank-deficient support.
    const auto line = make({{{1, 1}, 1}, {{-1, -1}, 1}}, 2);
    CHECK(generation_check(line).verdict == GenerationVerdict::FailsGroup);

    // Half-space support with inverses on one axis only.
    const auto half = make({{{1, 0}, 1}, {{-1, 0}, 1}, {{0, 1}, 1}}, 3);
    CHECK(generation_check(half).verdict == GenerationVerdict::Inconclusive);
}

TEST_CASE("torus_coverage_check") {
    CHECK(torus_coverage_check(nu(2), 2));
    const auto even = make({{{2, 0}, 1}, {{0, 2}, 1}, {{-2, 0}, 1}, {{0, -2}, 1}}, 4);
    CHECK_FALSE(torus_coverage_check(even, 2));
    CHECK(torus_coverage_check(eta3(), 5));
    CHECK_THROWS_AS(torus_coverage_check(nu(2), 1), std::invalid_argument);
}

TEST_CASE("sampling") {
    RandomStream rng(5);
    const auto point = dirac({3, -4});
    for (int i = 0; i < 100; ++i) CHECK(point.sample(rng) == LatticePoint{3, -4});

    // Same seed, same draws.
    RandomStream a(99), b(99);
    const auto mu = eta1();
    for (int i = 0; i < 1000; ++i) CHECK(mu.sample(a) == mu.sample(b));

    // Every support point's frequency within 4 sigma over 1e6 draws
    // (e3 carries 35/200).
    RandomStream freq_rng(12345);
    const std::uint64_t draws = 1000000;
    std::map<LatticePoint, std::uint64_t> hits;
    for (std::uint64_t i = 0; i < draws; ++i) ++hits[mu.sample(freq_rng)];
    for (const auto& wp : mu.support()) {
        const double p = static_cast<double>(wp.weight) / 200.0;
        const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(draws));
        const double freq =
            static_cast<double>(hits[wp.point]) / static_cast<double>(draws);
        CHECK(std::fabs(freq - p) <= 4 * sigma);
    }
}

TEST_CASE("measure config round trip") {
    CHECK(measure_from_json(json("eta3")).denominator() == 51);
    CHECK(measure_from_json(json("nu"), 4).support().size() == 8);

    const json inline_spec = {
        {"support", json::array({{{"vector", {1, 1}}, {"weight", 3}},
                                 {{"vector", {-1, 0}}, {"weight", 1}}})},
        {"denominator", 4}};
    const auto mu = measure_from_json(inline_spec);
    CHECK(mu.denominator() == 4);
    CHECK(mu.support().size() == 2);
    CHECK(measure_from_json(measure_to_json(mu)).support().size() == 2);

    json unknown = inline_spec;
    unknown["extra"] = 1;
    CHECK_THROWS_AS(measure_from_json(unknown), std::invalid_argument);

    json bad = inline_spec;
    bad["denominator"] = 5;
    CHECK_THROWS_AS(measure_from_json(bad), std::invalid_argument);

    CHECK_THROWS_AS(measure_from_json(json("nope")), std::invalid_argument);
}

} // TEST_SUITE
