#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "primwalk/lattice.hpp"
#include "primwalk/measure.hpp"
#include "primwalk/rational.hpp"

namespace primwalk {

/// A sub-probability measure with exact rational masses.
struct ExactDistribution {
    std::map<LatticePoint, Rational> mass;

    Rational total() const {
        Rational t;
        for (const auto& [point, p] : mass) t += p;
        return t;
    }
    Rational at(const LatticePoint& z) const {
        const auto it = mass.find(z);
        return it == mass.end() ? Rational(0) : it->second;
    }
    static ExactDistribution dirac(const LatticePoint& z) {
        ExactDistribution d;
        d.mass.emplace(z, Rational(1));
        return d;
    }
};

/// One application of the transition operator: mass(x) * mu(a) accumulates
/// at step(mode, a, x). Exact; preserves total mass.
ExactDistribution propagate(const ExactDistribution& dist, const StepDistribution& mu,
                            const WalkMode& mode);

/// The n-step endpoint distribution of the walk from z, exactly (n-fold
/// propagate of the Dirac mass at z). Support grows like |supp mu|^n;
/// raises CapacityError past support_cap.
ExactDistribution exact_endpoint(const LatticePoint& z, const StepDistribution& mu,
                                 const WalkMode& mode, std::size_t n,
                                 std::size_t support_cap = 4'000'000);

enum class BoundaryPolicy { Substochastic, Reflecting };

const char* boundary_policy_name(BoundaryPolicy p);

/// Finite restriction of the chain to the mode-valid points of the L-inf
/// box [-R, R]^d. Reflecting adds out-of-box mass to the self-loop, so
/// every row sums to exactly 1; Substochastic drops it and reports the
/// deficit per state.
struct TruncatedChain {
    WalkMode mode = WalkMode::full_gcd();
    Coord radius = 0;
    BoundaryPolicy policy = BoundaryPolicy::Reflecting;
    std::uint64_t denom = 1;
    std::vector<LatticePoint> states; // sorted lexicographically
    std::vector<std::vector<std::pair<std::uint32_t, std::uint64_t>>> rows; // (target, weight)
    std::vector<std::uint64_t> escaped; // weight leaving the box before the policy is applied

    int dim() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }
    std::optional<std::size_t> index_of(const LatticePoint& z) const;
    Rational row_sum(std::size_t state) const;
    Rational deficit(std::size_t state) const;
};

TruncatedChain build_truncated_chain(const StepDistribution& mu, const WalkMode& mode,
                                     Coord radius, BoundaryPolicy policy,
                                     std::size_t state_cap = 2'000'000);

struct StationaryResult {
    std::vector<long double> pi; // aligned with chain.states
    long double residual = 0;    // total-variation norm of one further operator application
    std::uint64_t iterations = 0;
};

/// Stationary distribution of a Reflecting chain from the Cesaro sequence
/// of propagations of the Dirac mass at z0. Power-iteration and Cesaro
/// residuals are tracked side by side and the first iterate to reach tol
/// is returned (the Cesaro route covers periodic chains). High-precision
/// floating point with the achieved residual reported; exact rational
/// power iteration would blow up denominators.
StationaryResult stationary_cesaro(const TruncatedChain& chain, const LatticePoint& z0,
                                   std::uint64_t max_iters, long double tol);

struct ReturnTimeResult {
    long double value = 0;
    long double residual = 0;
    std::uint64_t sweeps = 0;
};

/// Expected return time to z0 on a Reflecting chain via the first-step
/// linear system for hitting times, solved by Gauss-Seidel sweeps.
/// Diverges (and throws ConvergenceError) when z0 is not recurrent within
/// the truncation.
ReturnTimeResult expected_return_time(const TruncatedChain& chain, const LatticePoint& z0,
                                      std::uint64_t max_sweeps = 1'000'000,
                                      long double tol = 1e-15L);

struct SccResult {
    std::vector<std::uint32_t> component; // component id per state
    std::uint32_t count = 0;              // all strongly connected components
    std::uint32_t closed_count = 0;       // components with no outgoing edges (recurrent classes)
    std::vector<char> closed;             // per component id
    bool single_scc = false;              // every state in one component
    // Unique recurrent class: exactly one closed component, which every
    // state therefore reaches. Box truncation strands a few boundary
    // states with no in-box predecessors, so this, not single_scc, is the
    // finite-volume verdict matching irreducibility of the full chain.
    bool irreducible = false;
};

/// Strongly connected components of the positive-transition digraph, with
/// the closed (recurrent) classes identified.
SccResult irreducibility_scc(const TruncatedChain& chain);

struct ConeCheckResult {
    Rational mass_full; // omega^0_{n,z}(cone)
    Rational mass_k;    // omega^k_{n,z}(cone)
    bool violated = false; // mass_full < mass_k observed
};

/// Compares the exact masses the two walks give to the cone generated by a
/// finite set of primitive points (all positive integer multiples,
/// intersected with each walk's state space). The comparison is reported,
/// never asserted: the inequality is a proof-sketch device and its
/// pathwise mechanism is not part of this library's contract.
ConeCheckResult cone_monotonicity_check(const LatticePoint& z, const StepDistribution& mu,
                                        std::size_t n, const std::vector<LatticePoint>& cone_base,
                                        std::uint64_t k, std::size_t support_cap = 4'000'000);

} // namespace primwalk
