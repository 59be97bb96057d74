#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "primwalk/lattice.hpp"
#include "primwalk/rational.hpp"
#include "primwalk/rng.hpp"

namespace primwalk {

enum class NormKind { L1, L2, Linf };

const char* norm_name(NormKind norm);
NormKind norm_from_name(const std::string& name);
double norm_value(const LatticePoint& z, NormKind norm);

struct WeightedPoint {
    LatticePoint point;
    std::uint64_t weight;
};

/// A finitely supported probability measure on Z^d with exact rational
/// weights weight_i / denominator. Immutable once validated; safe to share
/// across threads.
class StepDistribution {
public:
    StepDistribution(std::vector<WeightedPoint> support, std::uint64_t denominator);

    const std::vector<WeightedPoint>& support() const { return support_; }
    std::uint64_t denominator() const { return denom_; }
    int dim() const { return support_.empty() ? 0 : static_cast<int>(support_.front().point.size()); }
    Rational probability(std::size_t i) const { return Rational::ratio(support_[i].weight, denom_); }

    /// All invariant violations, empty when the measure is well formed.
    std::vector<std::string> validate() const;
    void validate_or_throw() const;

    /// Cumulative-weight inversion over one 64-bit draw. Deterministic
    /// given the stream state.
    const LatticePoint& sample(RandomStream& rng) const;

private:
    std::vector<WeightedPoint> support_;
    std::uint64_t denom_;
    std::vector<std::uint64_t> cumulative_;
};

/// First moment of the norm: sum over the support of ||z|| * mu(z).
double first_moment(const StepDistribution& mu, NormKind norm);

/// Exact value for the integer-valued norms (L1, Linf). The L2 moment is
/// irrational in general; use first_moment for it.
Rational first_moment_exact(const StepDistribution& mu, NormKind norm);

enum class GenerationVerdict { Generates, FailsGroup, Inconclusive };

const char* verdict_name(GenerationVerdict v);

struct GenerationResult {
    GenerationVerdict verdict;
    std::string detail;
};

/// Decides what the support generates.
///   FailsGroup:   the group generated by the support is a proper subgroup
///                 of Z^d (exact integer row reduction).
///   Generates:    the group is Z^d and the origin is strictly interior to
///                 the convex hull of the support (exact facet-normal
///                 test), which makes the generated semigroup all of Z^d.
///   Inconclusive: group generation holds but the interior test fails;
///                 semigroup generation is unresolved and must not be
///                 assumed.
GenerationResult generation_check(const StepDistribution& mu);

/// True iff a breadth-first search over (Z/kZ)^d from the origin, stepping
/// by the support residues, reaches every residue class.
bool torus_coverage_check(const StepDistribution& mu, std::uint64_t k);

// The measures used for the published histograms, plus the uniform
// nearest-neighbour measure.
StepDistribution eta1();
StepDistribution eta2();
StepDistribution eta3();
StepDistribution nu(int d);

/// Named lookup: "eta1" | "eta2" | "eta3" | "nu" (nu takes the dimension).
StepDistribution named_measure(const std::string& name, int d = 2);

/// Dirac measure at z.
StepDistribution dirac(const LatticePoint& z);

} // namespace primwalk
