#include "primwalk/walk.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "primwalk/errors.hpp"

namespace primwalk {

namespace {

constexpr double kZ99 = 2.5758293035489004; // 99% two-sided normal quantile

// Split [0, count) into contiguous chunks, one per worker, and run them.
// Results must be merged by trial index or with commutative reductions so
// any worker count reproduces the single-threaded output.
template <typename Body>
void parallel_chunks(std::uint64_t count, int threads, Body&& body) {
    const int workers = std::max(1, threads);
    if (workers == 1 || count < 2) {
        body(0, 0, count);
        return;
    }
    std::vector<std::thread> pool;
    const std::uint64_t chunk =
        (count + static_cast<std::uint64_t>(workers) - 1) / static_cast<std::uint64_t>(workers);
    for (int w = 0; w < workers; ++w) {
        const std::uint64_t lo = std::min(count, chunk * static_cast<std::uint64_t>(w));
        const std::uint64_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&body, w, lo, hi] { body(w, lo, hi); });
    }
    for (auto& th : pool) th.join();
}

void merge_counts(std::map<LatticePoint, std::uint64_t>& into,
                  const std::map<LatticePoint, std::uint64_t>& from) {
    for (const auto& [point, count] : from) into[point] += count;
}

} // namespace

void WalkConfig::validate_or_throw(const StepDistribution& mu) const {
    mu.validate_or_throw();
    if (static_cast<int>(z0.size()) != mu.dim())
        throw std::invalid_argument("z0 dimension " + std::to_string(z0.size()) +
                                    " does not match the measure's " + std::to_string(mu.dim()));
    if (z0.size() < 2) throw std::invalid_argument("dimension must be >= 2");
    if (!mode.valid_state(z0))
        throw std::invalid_argument("z0 = " + to_string(z0) + " is invalid for mode " +
                                    mode.label());
    if (trials == 0) throw std::invalid_argument("trials must be >= 1");
}

void walk_trajectory(const StepDistribution& mu, const WalkConfig& config,
                     const std::function<void(std::uint64_t, const LatticePoint&)>& visit) {
    config.validate_or_throw(mu);
    RandomStream rng = derive_stream(config.seed, 0);
    LatticePoint state = config.z0;
    visit(0, state);
    for (std::uint64_t i = 1; i <= config.steps; ++i) {
        apply_step(config.mode, mu.sample(rng), state);
        visit(i, state);
    }
}

TrajectoryStats run_walk(const StepDistribution& mu, const WalkConfig& config, double bin_width,
                         std::uint64_t occupation_cap) {
    config.validate_or_throw(mu);
    if (!(bin_width > 0)) throw std::invalid_argument("bin width must be positive");

    TrajectoryStats stats;
    stats.bin_width = bin_width;
    stats.steps = config.steps;

    RandomStream rng = derive_stream(config.seed, 0);
    LatticePoint state = config.z0;

    auto record = [&](const LatticePoint& z) {
        const double norm = norm_value(z, config.norm);
        stats.max_norm = std::max(stats.max_norm, norm);
        ++stats.norm_histogram[static_cast<std::int64_t>(std::floor(norm / bin_width))];
        if (!stats.occupation_capped) {
            if (stats.occupation.size() >= occupation_cap && !stats.occupation.contains(z))
                stats.occupation_capped = true;
            else
                ++stats.occupation[z];
        }
    };

    record(state);
    for (std::uint64_t i = 0; i < config.steps; ++i) {
        const StepOutcome outcome = apply_step(config.mode, mu.sample(rng), state);
        if (outcome.divisor > 1) {
            ++stats.division_events;
            ++stats.divisor_histogram[config.mode.is_full() ? outcome.divisor : outcome.power];
        }
        record(state);
    }
    stats.final_state = state;
    return stats;
}

EmpiricalDistribution endpoint_distribution(const StepDistribution& mu, const WalkConfig& config,
                                            std::uint64_t n, int threads) {
    config.validate_or_throw(mu);
    const int workers = std::max(1, threads);
    std::vector<std::map<LatticePoint, std::uint64_t>> partial(static_cast<std::size_t>(workers));
    parallel_chunks(config.trials, workers, [&](int w, std::uint64_t lo, std::uint64_t hi) {
        auto& local = partial[static_cast<std::size_t>(w)];
        LatticePoint state(config.z0.size());
        for (std::uint64_t t = lo; t < hi; ++t) {
            RandomStream rng = derive_stream(config.seed, t);
            state = config.z0;
            for (std::uint64_t i = 0; i < n; ++i) apply_step(config.mode, mu.sample(rng), state);
            ++local[state];
        }
    });
    EmpiricalDistribution dist;
    for (const auto& local : partial) merge_counts(dist.counts, local);
    dist.total = config.trials;
    return dist;
}

EmpiricalDistribution cesaro_distribution(const StepDistribution& mu, const WalkConfig& config,
                                          std::uint64_t n, CesaroEstimator estimator,
                                          int threads) {
    config.validate_or_throw(mu);
    if (n == 0) throw std::invalid_argument("cesaro average needs n >= 1");
    EmpiricalDistribution dist;
    if (estimator == CesaroEstimator::PooledEndpoints) {
        const int workers = std::max(1, threads);
        std::vector<std::map<LatticePoint, std::uint64_t>> partial(
            static_cast<std::size_t>(workers));
        parallel_chunks(config.trials, workers, [&](int w, std::uint64_t lo, std::uint64_t hi) {
            auto& local = partial[static_cast<std::size_t>(w)];
            LatticePoint state(config.z0.size());
            for (std::uint64_t t = lo; t < hi; ++t) {
                RandomStream rng = derive_stream(config.seed, t);
                state = config.z0;
                for (std::uint64_t i = 1; i <= n; ++i) {
                    apply_step(config.mode, mu.sample(rng), state);
                    ++local[state];
                }
            }
        });
        for (const auto& local : partial) merge_counts(dist.counts, local);
        dist.total = config.trials * n;
    } else {
        // Single-path occupation over positions 1..n, stream 0.
        RandomStream rng = derive_stream(config.seed, 0);
        LatticePoint state = config.z0;
        for (std::uint64_t i = 1; i <= n; ++i) {
            apply_step(config.mode, mu.sample(rng), state);
            ++dist.counts[state];
        }
        dist.total = n;
    }
    return dist;
}

namespace {

// One excursion from z0 on the given stream: steps until the state equals
// z0 again, or cap. Returns 0 when censored.
std::uint64_t one_excursion(const StepDistribution& mu, const WalkMode& mode,
                            const LatticePoint& z0, std::uint64_t cap, RandomStream& rng,
                            LatticePoint& scratch) {
    scratch = z0;
    for (std::uint64_t t = 1; t <= cap; ++t) {
        apply_step(mode, mu.sample(rng), scratch);
        if (scratch == z0) return t;
    }
    return 0;
}

} // namespace

ReturnStats estimate_return_time(const StepDistribution& mu, const WalkConfig& config,
                                 std::uint64_t cap, int threads) {
    config.validate_or_throw(mu);
    if (cap == 0) throw std::invalid_argument("excursion cap must be >= 1");
    const int workers = std::max(1, threads);
    std::vector<std::map<std::uint64_t, std::uint64_t>> partial(static_cast<std::size_t>(workers));
    std::vector<std::uint64_t> censored(static_cast<std::size_t>(workers), 0);
    parallel_chunks(config.trials, workers, [&](int w, std::uint64_t lo, std::uint64_t hi) {
        auto& local = partial[static_cast<std::size_t>(w)];
        LatticePoint scratch(config.z0.size());
        for (std::uint64_t t = lo; t < hi; ++t) {
            RandomStream rng = derive_stream(config.seed, t);
            const std::uint64_t len = one_excursion(mu, config.mode, config.z0, cap, rng, scratch);
            if (len == 0)
                ++censored[static_cast<std::size_t>(w)];
            else
                ++local[len];
        }
    });

    ReturnStats stats;
    stats.cap = cap;
    for (int w = 0; w < workers; ++w) {
        stats.censored += censored[static_cast<std::size_t>(w)];
        for (const auto& [len, count] : partial[static_cast<std::size_t>(w)])
            stats.completed_histogram[len] += count;
    }
    long double sum = 0, sumsq = 0;
    for (const auto& [len, count] : stats.completed_histogram) {
        stats.completed += count;
        sum += static_cast<long double>(len) * count;
        sumsq += static_cast<long double>(len) * len * count;
    }
    if (stats.completed > 0) {
        const long double mean = sum / stats.completed;
        stats.tau_hat = static_cast<double>(mean);
        if (stats.completed > 1) {
            const long double var =
                (sumsq - sum * mean) / static_cast<long double>(stats.completed - 1);
            stats.tau_se = static_cast<double>(
                std::sqrt(std::max(0.0L, var) / static_cast<long double>(stats.completed)));
        }
    }
    stats.censored_warning = stats.censored_fraction() > 0.01;
    return stats;
}

KacCheckResult kac_check(const StepDistribution& mu, const WalkConfig& config, std::uint64_t cap,
                         int threads) {
    config.validate_or_throw(mu);
    if (config.steps == 0) throw std::invalid_argument("kac check needs occupation steps >= 1");

    // Occupation estimate on stream 0.
    std::uint64_t visits = 0;
    {
        RandomStream rng = derive_stream(config.seed, 0);
        LatticePoint state = config.z0;
        for (std::uint64_t i = 1; i <= config.steps; ++i) {
            apply_step(config.mode, mu.sample(rng), state);
            if (state == config.z0) ++visits;
        }
    }

    // Return times on streams 1..trials (independent of the occupation
    // stream).
    WalkConfig returns_config = config;
    returns_config.seed = mix64(config.seed ^ 0x52455455524E53ULL); // tag: "RETURNS"
    const ReturnStats returns = estimate_return_time(mu, returns_config, cap, threads);
    if (!returns.tau_hat)
        throw ConvergenceError("kac check undefined: every excursion was censored");

    KacCheckResult res;
    res.occupation_steps = config.steps;
    res.excursions_completed = returns.completed;
    res.censored_fraction = returns.censored_fraction();
    res.omega_hat = static_cast<double>(visits) / static_cast<double>(config.steps);
    res.tau_hat = *returns.tau_hat;
    res.ratio = res.omega_hat * res.tau_hat;

    // Delta-method interval from the two independent estimators. The
    // occupation counts are mildly autocorrelated, so this is a guide, not
    // an exact coverage statement.
    const double p = res.omega_hat;
    const double se_omega =
        std::sqrt(std::max(0.0, p * (1.0 - p) / static_cast<double>(config.steps)));
    const double rel =
        std::sqrt(std::pow(se_omega / std::max(p, 1e-300), 2) +
                  std::pow(returns.tau_se / std::max(res.tau_hat, 1e-300), 2));
    res.ci_lo = res.ratio * (1.0 - kZ99 * rel);
    res.ci_hi = res.ratio * (1.0 + kZ99 * rel);
    return res;
}

DriftReport drift_estimate(const StepDistribution& mu, const WalkMode& mode,
                           const std::vector<LatticePoint>& z_samples,
                           const std::vector<std::uint64_t>& n_grid, std::uint64_t trials,
                           std::uint64_t seed, NormKind norm, int threads) {
    mu.validate_or_throw();
    if (z_samples.empty() || n_grid.empty())
        throw std::invalid_argument("drift estimate needs starting points and an n grid");
    if (trials == 0) throw std::invalid_argument("trials must be >= 1");
    for (const auto& z : z_samples)
        if (!mode.valid_state(z))
            throw std::invalid_argument("drift start " + to_string(z) + " invalid for mode " +
                                        mode.label());

    DriftReport report;
    report.kappa = first_moment(mu, norm);
    report.norm = norm;
    report.trials = trials;

    // Mark the top half of the starts (by norm) as the fit rows.
    std::vector<double> norms;
    for (const auto& z : z_samples) norms.push_back(norm_value(z, norm));
    std::vector<double> sorted = norms;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];

    // Per-trial endpoint norms are buffered and reduced in trial order so
    // that worker count cannot perturb the floating-point sums.
    std::vector<double> buffer(trials);
    for (std::size_t zi = 0; zi < z_samples.size(); ++zi) {
        DriftRow row;
        row.z = z_samples[zi];
        row.norm = norms[zi];
        row.large = norms[zi] >= median;
        for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
            const std::uint64_t n = n_grid[ni];
            const std::uint64_t cell = static_cast<std::uint64_t>(zi) * n_grid.size() + ni;
            parallel_chunks(trials, threads, [&](int, std::uint64_t lo, std::uint64_t hi) {
                LatticePoint state(row.z.size());
                for (std::uint64_t t = lo; t < hi; ++t) {
                    RandomStream rng = derive_stream(seed, cell * trials + t);
                    state = row.z;
                    for (std::uint64_t i = 0; i < n; ++i)
                        apply_step(mode, mu.sample(rng), state);
                    buffer[t] = norm_value(state, norm);
                }
            });
            long double sum = 0;
            for (std::uint64_t t = 0; t < trials; ++t) sum += buffer[t];
            DriftCell stat;
            stat.n = n;
            const long double mean = sum / trials;
            stat.mean = static_cast<double>(mean);
            long double se = 0;
            if (trials > 1) {
                long double ss = 0;
                for (std::uint64_t t = 0; t < trials; ++t) {
                    const long double dev = buffer[t] - mean;
                    ss += dev * dev;
                }
                const long double var = ss / static_cast<long double>(trials - 1);
                se = std::sqrt(var / static_cast<long double>(trials));
            }
            stat.ci_lo = static_cast<double>(mean - kZ99 * se);
            stat.ci_hi = static_cast<double>(mean + kZ99 * se);
            row.cells.push_back(stat);
        }
        report.rows.push_back(std::move(row));
    }

    // n0_prime: smallest grid n where every large-norm row shows a strict
    // CI-separated decrease.
    for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
        bool all_decrease = true;
        for (const auto& row : report.rows) {
            if (!row.large) continue;
            if (!(row.cells[ni].ci_hi < row.norm)) {
                all_decrease = false;
                break;
            }
        }
        if (all_decrease) {
            report.contraction_found = true;
            report.n0_prime = n_grid[ni];
            // Least squares of mean endpoint norm against ||z|| over the
            // large rows at this n.
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            int count = 0;
            for (const auto& row : report.rows) {
                if (!row.large) continue;
                sx += row.norm;
                sy += row.cells[ni].mean;
                sxx += row.norm * row.norm;
                sxy += row.norm * row.cells[ni].mean;
                ++count;
            }
            const double det = count * sxx - sx * sx;
            if (count >= 2 && det > 0) {
                report.c_hat = (count * sxy - sx * sy) / det;
                report.m_hat = (sy - report.c_hat * sx) / count;
            } else {
                // Single large row: attribute everything to the slope.
                report.c_hat = sy / sx;
                report.m_hat = 0.0;
            }
            // The contraction constant M is strictly positive; a fitted
            // intercept can be negative noise, so it is floored at the
            // one-step drift scale kappa before the geometric-series
            // constant M' = 2M + kappa*j (j <= n0'-1) is assembled.
            report.m_prime = 2.0 * std::max(report.m_hat, report.kappa) +
                             report.kappa * static_cast<double>(report.n0_prime - 1);
            break;
        }
    }
    return report;
}

RecurrenceReport recurrence_mass(const StepDistribution& mu, const WalkConfig& config,
                                 double epsilon, double m_prime,
                                 const std::vector<std::uint64_t>& n_grid, int threads) {
    config.validate_or_throw(mu);
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("recurrence mass requires 0 < epsilon < 1");
    if (!(m_prime > 0.0)) throw std::invalid_argument("recurrence mass requires M' > 0");

    RecurrenceReport report;
    report.epsilon = epsilon;
    report.m_prime = m_prime;
    report.radius = 2.0 * m_prime / epsilon;

    for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
        const std::uint64_t n = n_grid[ni];
        WalkConfig cell_config = config;
        cell_config.seed = mix64(config.seed ^ mix64(0x4D415353ULL + ni)); // per-n substream
        const EmpiricalDistribution dist =
            endpoint_distribution(mu, cell_config, n, threads);
        std::uint64_t inside = 0;
        for (const auto& [point, count] : dist.counts)
            if (norm_value(point, config.norm) <= report.radius) inside += count;
        report.mass_by_n.emplace_back(n, static_cast<double>(inside) /
                                             static_cast<double>(dist.total));
    }
    // n_z: least tested n from which every tested mass stays above 1 - eps.
    for (std::size_t i = 0; i < report.mass_by_n.size(); ++i) {
        bool all_good = true;
        for (std::size_t j = i; j < report.mass_by_n.size(); ++j)
            if (!(report.mass_by_n[j].second > 1.0 - epsilon)) all_good = false;
        if (all_good) {
            report.n_z = report.mass_by_n[i].first;
            break;
        }
    }
    return report;
}

double tv_distance(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
    if (a.total == 0 || b.total == 0)
        throw std::invalid_argument("tv distance of an empty distribution");
    double acc = 0;
    auto ia = a.counts.begin();
    auto ib = b.counts.begin();
    while (ia != a.counts.end() || ib != b.counts.end()) {
        double pa = 0, pb = 0;
        if (ib == b.counts.end() || (ia != a.counts.end() && ia->first < ib->first)) {
            pa = static_cast<double>(ia->second) / static_cast<double>(a.total);
            ++ia;
        } else if (ia == a.counts.end() || ib->first < ia->first) {
            pb = static_cast<double>(ib->second) / static_cast<double>(b.total);
            ++ib;
        } else {
            pa = static_cast<double>(ia->second) / static_cast<double>(a.total);
            pb = static_cast<double>(ib->second) / static_cast<double>(b.total);
            ++ia;
            ++ib;
        }
        acc += std::fabs(pa - pb);
    }
    return acc / 2.0;
}

} // namespace primwalk
