#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "primwalk/lattice.hpp"
#include "primwalk/measure.hpp"
#include "primwalk/rng.hpp"

namespace primwalk {

struct WalkConfig {
    WalkMode mode = WalkMode::full_gcd();
    LatticePoint z0;
    std::uint64_t steps = 0;
    std::uint64_t trials = 1;
    std::uint64_t seed = 0;
    NormKind norm = NormKind::L2;

    void validate_or_throw(const StepDistribution& mu) const;
};

/// Streaming statistics of a single trajectory.
struct TrajectoryStats {
    std::map<std::int64_t, std::uint64_t> norm_histogram; // bin -> count, bin = floor(norm / bin_width)
    double bin_width = 1.0;
    std::uint64_t division_events = 0;
    // Full mode: histogram of the gcd divided out; k mode: histogram of the
    // power p. Only steps that actually divided are recorded.
    std::map<std::uint64_t, std::uint64_t> divisor_histogram;
    std::map<LatticePoint, std::uint64_t> occupation;
    bool occupation_capped = false; // hit the cap; histogram-of-norms stays complete
    double max_norm = 0.0;
    LatticePoint final_state;
    std::uint64_t steps = 0;
};

/// Walk config.steps steps from config.z0 on a single derived stream and
/// stream every position (including the start) into the histograms.
TrajectoryStats run_walk(const StepDistribution& mu, const WalkConfig& config,
                         double bin_width = 1.0, std::uint64_t occupation_cap = 1'000'000);

/// Visit every position of a single trajectory: callback(index, point) with
/// index 0 at z0. For window statistics and custom scans.
void walk_trajectory(const StepDistribution& mu, const WalkConfig& config,
                     const std::function<void(std::uint64_t, const LatticePoint&)>& visit);

struct EmpiricalDistribution {
    std::map<LatticePoint, std::uint64_t> counts;
    std::uint64_t total = 0;

    double probability(const LatticePoint& z) const {
        const auto it = counts.find(z);
        return it == counts.end() || total == 0
                   ? 0.0
                   : static_cast<double>(it->second) / static_cast<double>(total);
    }
};

/// Endpoint frequencies of config.trials independent n-step walks.
/// Deterministic for a fixed (config, seed) under any thread count.
EmpiricalDistribution endpoint_distribution(const StepDistribution& mu, const WalkConfig& config,
                                            std::uint64_t n, int threads = 1);

enum class CesaroEstimator {
    PooledEndpoints, // pool positions 1..n across independent trials (unbiased Cesaro)
    Occupation       // single-path occupation frequencies (ergodic estimator)
};

EmpiricalDistribution cesaro_distribution(const StepDistribution& mu, const WalkConfig& config,
                                          std::uint64_t n, CesaroEstimator estimator,
                                          int threads = 1);

struct ReturnStats {
    std::map<std::uint64_t, std::uint64_t> completed_histogram; // return time -> count
    std::uint64_t completed = 0;
    std::uint64_t censored = 0;
    std::uint64_t cap = 0;
    std::optional<double> tau_hat; // mean of completed excursions; empty when none completed
    double tau_se = 0.0;
    bool censored_warning = false; // censored fraction > 1%

    double censored_fraction() const {
        const std::uint64_t total = completed + censored;
        return total == 0 ? 0.0 : static_cast<double>(censored) / static_cast<double>(total);
    }
};

/// config.trials excursions from z0, each stopped at the first return to z0
/// or at `cap` steps. Censored excursions are counted, never imputed.
ReturnStats estimate_return_time(const StepDistribution& mu, const WalkConfig& config,
                                 std::uint64_t cap, int threads = 1);

struct KacCheckResult {
    double omega_hat = 0.0; // occupation estimate of the stationary mass at z0
    double tau_hat = 0.0;
    double ratio = 0.0;     // omega_hat * tau_hat; 1 under Kac's formula
    double ci_lo = 0.0;     // normal-approximation 99% interval on the ratio
    double ci_hi = 0.0;
    std::uint64_t occupation_steps = 0;
    std::uint64_t excursions_completed = 0;
    double censored_fraction = 0.0;
};

/// Occupation estimator (config.steps single-path steps, stream 0) times
/// the return-time estimator (config.trials excursions, streams 1..) on
/// independent streams.
KacCheckResult kac_check(const StepDistribution& mu, const WalkConfig& config, std::uint64_t cap,
                         int threads = 1);

struct DriftCell {
    std::uint64_t n = 0;
    double mean = 0.0; // mean endpoint norm
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

struct DriftRow {
    LatticePoint z;
    double norm = 0.0;
    bool large = false; // in the top half by norm; used for the fit
    std::vector<DriftCell> cells;
};

struct DriftReport {
    bool contraction_found = false;
    double c_hat = 0.0;
    double m_hat = 0.0;
    double m_prime = 0.0; // 2*max(m_hat, kappa) + kappa*(n0_prime - 1)
    std::uint64_t n0_prime = 0;
    double kappa = 0.0;
    NormKind norm = NormKind::L2;
    std::uint64_t trials = 0;
    std::vector<DriftRow> rows;
};

/// Mean endpoint norms over a (z, n) grid with 99% intervals. n0_prime is
/// the smallest grid n at which every large-norm row decreases with CI
/// separation; (c_hat, m_hat) is the least-squares line through the
/// large-norm rows at that n. contraction_found = false when no grid n
/// qualifies.
DriftReport drift_estimate(const StepDistribution& mu, const WalkMode& mode,
                           const std::vector<LatticePoint>& z_samples,
                           const std::vector<std::uint64_t>& n_grid, std::uint64_t trials,
                           std::uint64_t seed, NormKind norm = NormKind::L2, int threads = 1);

struct RecurrenceReport {
    double epsilon = 0.0;
    double m_prime = 0.0;
    double radius = 0.0; // 2 * m_prime / epsilon
    std::vector<std::pair<std::uint64_t, double>> mass_by_n;
    std::optional<std::uint64_t> n_z; // least tested n from which every mass exceeds 1 - eps
};

/// Empirical endpoint mass of the ball {||x|| <= 2 M' / eps} for each n in
/// the grid.
RecurrenceReport recurrence_mass(const StepDistribution& mu, const WalkConfig& config,
                                 double epsilon, double m_prime,
                                 const std::vector<std::uint64_t>& n_grid, int threads = 1);

/// Total-variation distance between two empirical distributions.
double tv_distance(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

} // namespace primwalk
