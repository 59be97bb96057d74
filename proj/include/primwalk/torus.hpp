#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "primwalk/lattice.hpp"
#include "primwalk/measure.hpp"
#include "primwalk/rational.hpp"
#include "primwalk/rng.hpp"

namespace primwalk {

/// Partial sums of the ordinary (non-normalized) walk from z: no division
/// ever happens here. Returns positions after 1..n steps.
std::vector<LatticePoint> plain_walk(const StepDistribution& mu, const LatticePoint& z,
                                     std::size_t n, RandomStream& rng);

/// Number of positions in the path with every coordinate divisible by k
/// (the zero vector counts: it is "0 mod k" by convention).
std::uint64_t count_Y(std::span<const LatticePoint> path, std::uint64_t k);

/// 1 iff count_Y >= 1.
int indicator_M(std::span<const LatticePoint> path, std::uint64_t k);

/// 1 iff every torus starting point sees at least one hit within the
/// prefix: one pass over the prefix's partial-sum residues, which must
/// cover all k^d classes of (Z/kZ)^d.
int uniform_min_U(const StepSequence& prefix, std::uint64_t k);

/// Covering word and the constants attached to it.
struct TorusCalibration {
    std::uint64_t k = 0;
    std::size_t n0 = 0;       // covering word length
    StepSequence covering_word;
    std::optional<Rational> cylinder_bound_exact; // product of step probabilities, when representable
    double cylinder_bound = 0.0;                  // same value as double (certified lower bound for alpha)
    double log_cylinder_bound = 0.0;
    // Filled by estimate_EU:
    double alpha_hat = 0.0;
    double alpha_ci_lo = 0.0;
    double alpha_ci_hi = 0.0;
    std::uint64_t alpha_trials = 0;
};

/// Shortest-found word from the support whose partial-sum residues cover
/// (Z/kZ)^d. Exact shortest by BFS over (residue, visited-set) states when
/// the torus is small; a greedy nearest-unvisited construction otherwise
/// (k^d capped at 4096). Fails with SearchLimitError when no word within
/// max_len is found.
TorusCalibration find_covering_word(const StepDistribution& mu, std::uint64_t k,
                                    std::size_t max_len = 4096);

struct EUEstimate {
    double mean = 0.0;
    double ci_lo = 0.0; // 99% normal-approximation interval
    double ci_hi = 0.0;
    std::uint64_t trials = 0;
};

/// Monte Carlo estimate of E[U^k_n] over independent length-n prefixes.
EUEstimate estimate_EU(const StepDistribution& mu, std::uint64_t k, std::size_t n,
                       std::uint64_t trials, std::uint64_t seed, int threads = 1);

struct ChernoffRow {
    std::size_t n = 0;
    double threshold = 0.0;      // (1-eps) * alpha * n / (2*n0)
    double empirical_tail = 0.0; // fraction of trials with Y <= threshold
    double bound = 0.0;          // C_{eps,alpha} * exp(-alpha*eps^2*n / (2*n0))
    std::uint64_t trials = 0;
};

/// One row per n. The bound is evaluated with the certified cylinder lower
/// bound for alpha (a smaller alpha only weakens the bound, so the
/// comparison stays sound); the empirical alpha is reported separately in
/// the calibration.
std::vector<ChernoffRow> chernoff_experiment(const StepDistribution& mu, std::uint64_t k,
                                             const LatticePoint& z,
                                             const std::vector<std::size_t>& n_grid,
                                             double epsilon, std::uint64_t trials,
                                             std::uint64_t seed,
                                             const TorusCalibration& calibration,
                                             int threads = 1);

/// Exact P[Y^k_n <= threshold] by enumeration of all |supp|^n paths.
/// Test-oracle-sized inputs only.
Rational enumerate_tail_probability(const StepDistribution& mu, std::uint64_t k,
                                    const LatticePoint& z, std::size_t n, double threshold);

/// Exact E[U^k_n] by enumeration of all |supp|^n prefixes.
Rational enumerate_EU(const StepDistribution& mu, std::uint64_t k, std::size_t n);

} // namespace primwalk
