// Acceptance suite: every release criterion as an executable check with
// its tolerance pinned in code. One pass/fail line per criterion.
//
//   primwalk_acceptance                runs everything
//   primwalk_acceptance --criterion N  runs one criterion
//   primwalk_acceptance --list         lists criteria

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "primwalk/oracle.hpp"
#include "primwalk/report.hpp"
#include "primwalk/torus.hpp"
#include "primwalk/walk.hpp"

using namespace primwalk;
namespace fs = std::filesystem;

namespace {

struct Check {
    std::vector<std::string> failures;
    void require(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
};

std::string fmt(double v) { return format_double(v); }

// ---------------------------------------------------------------- shared

LatticePoint axis_start(int d, Coord lead) {
    LatticePoint z(static_cast<std::size_t>(d), 0);
    z[0] = lead;
    z[1] = 1;
    return z;
}

WalkConfig config_for(const WalkMode& mode, LatticePoint z0, std::uint64_t trials,
                      std::uint64_t seed) {
    WalkConfig config;
    config.mode = mode;
    config.z0 = std::move(z0);
    config.trials = trials;
    config.seed = seed;
    return config;
}

DriftReport acceptance_drift(const StepDistribution& mu, const WalkMode& mode, int d,
                             std::uint64_t seed, int threads) {
    const std::vector<LatticePoint> starts{axis_start(d, 100), axis_start(d, 1000),
                                           axis_start(d, 10000)};
    const std::vector<std::uint64_t> grid{1, 2, 4, 8, 16, 32, 64};
    return drift_estimate(mu, mode, starts, grid, 2000, seed, NormKind::L2, threads);
}

void check_drift_report(Check& check, const std::string& label, const DriftReport& report) {
    check.require(report.contraction_found, label + ": no contraction found in the grid");
    if (!report.contraction_found) return;
    check.require(report.c_hat < 1.0,
                  label + ": fitted c_hat " + fmt(report.c_hat) + " is not < 1");
    // Strict CI-separated decrease at the largest starting norm.
    const DriftRow* largest = &report.rows.front();
    for (const auto& row : report.rows)
        if (row.norm > largest->norm) largest = &row;
    bool separated = false;
    for (const auto& cell : largest->cells)
        if (cell.n == report.n0_prime) separated = cell.ci_hi < largest->norm;
    check.require(separated, label + ": largest-norm row is not CI-separated below its norm");
}

std::string digest_distribution(const EmpiricalDistribution& dist) {
    std::ostringstream out;
    for (const auto& [point, count] : dist.counts) out << to_string(point) << ":" << count << ";";
    out << "total=" << dist.total;
    return out.str();
}

std::string digest_drift(const DriftReport& report) {
    std::ostringstream out;
    out << fmt(report.c_hat) << "|" << fmt(report.m_hat) << "|" << fmt(report.m_prime) << "|"
        << report.n0_prime;
    for (const auto& row : report.rows)
        for (const auto& cell : row.cells)
            out << "|" << cell.n << ":" << fmt(cell.mean) << ":" << fmt(cell.ci_hi);
    return out.str();
}

const char* cli_path() { return std::getenv("PRIMWALK_CLI"); }

int run_cli(const std::string& args) {
    const std::string cmd = std::string(cli_path()) + " " + args + " >/dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("primwalk_acceptance_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

// ------------------------------------------------------------- criteria

// 1. Step-map correctness over >= 1e5 random (a, z, k).
void criterion1(Check& check) {
    RandomStream rng(0xACCE97);
    const std::uint64_t ks[] = {2, 3, 4, 5, 7, 12};
    std::uint64_t cases = 0;
    for (std::uint64_t i = 0; i < 120000; ++i) {
        const std::size_t d = 2 + rng.bounded(3);
        LatticePoint a(d), zr(d);
        for (auto& c : a) c = -1000000 + static_cast<Coord>(rng.bounded(2000001));
        for (auto& c : zr) c = -1000000 + static_cast<Coord>(rng.bounded(2000001));
        const LatticePoint z = normalize(zr);
        if (normalize(z) != z) {
            check.require(false, "normalize not idempotent at " + to_string(zr));
            return;
        }
        const LatticePoint full = hat_plus(a, z);
        if (!is_primitive(full)) {
            check.require(false, "hat_plus image not primitive at " + to_string(a));
            return;
        }
        const std::uint64_t k = ks[rng.bounded(6)];
        if (!is_coprime_to(z, k)) continue;
        const auto kres = hat_plus_k(a, z, k);
        if (!is_coprime_to(kres.point, k)) {
            check.require(false, "hat_plus_k image not coprime at " + to_string(a));
            return;
        }
        LatticePoint sum(d);
        bool zero = true;
        for (std::size_t c = 0; c < d; ++c) {
            sum[c] = a[c] + z[c];
            if (sum[c] != 0) zero = false;
        }
        if (!zero) {
            Coord scale = 1;
            for (std::uint32_t p = 0; p < kres.power; ++p)
                scale = checked_mul(scale, static_cast<Coord>(k));
            for (std::size_t c = 0; c < d; ++c)
                if (checked_mul(kres.point[c], scale) != sum[c]) {
                    check.require(false, "k-step reconstruction failed at " + to_string(a));
                    return;
                }
            bool divisible = true;
            for (Coord c : kres.point)
                if (c % static_cast<Coord>(k) != 0) divisible = false;
            if (divisible) {
                check.require(false, "k^p not maximal at " + to_string(a));
                return;
            }
        }
        ++cases;
    }
    check.require(cases >= 100000, "only " + std::to_string(cases) + " usable cases generated");
}

// 2. Monte Carlo endpoints within 4 sigma of the exact enumeration for nu,
// d=2, both modes, n = 1..4, including the frozen n=2 distribution.
void criterion2(Check& check, int threads) {
    const auto mu = nu(2);

    // Frozen two-step reference: {0: 1/4, diagonals: 1/8, units: 1/16}.
    const auto two = exact_endpoint({0, 0}, mu, WalkMode::full_gcd(), 2);
    check.require(two.at({0, 0}) == Rational(1, 4), "exact n=2 mass at origin != 1/4");
    check.require(two.at({1, 1}) == Rational(1, 8), "exact n=2 mass at (1,1) != 1/8");
    check.require(two.at({1, 0}) == Rational(1, 16), "exact n=2 mass at (1,0) != 1/16");
    check.require(two.mass.size() == 9, "exact n=2 support size != 9");

    const WalkMode modes[] = {WalkMode::full_gcd(), WalkMode::coprime_to(2)};
    for (const auto& mode : modes) {
        for (std::uint64_t n = 1; n <= 4; ++n) {
            const auto exact = exact_endpoint({0, 0}, mu, mode, n);
            const auto config = config_for(mode, {0, 0}, 100000, 0xC2 + n);
            const auto emp = endpoint_distribution(mu, config, n, threads);
            for (const auto& [point, count] : emp.counts) {
                (void)count;
                if (!(exact.at(point) > Rational(0))) {
                    check.require(false, mode.label() + " n=" + std::to_string(n) +
                                             ": empirical point " + to_string(point) +
                                             " outside the exact support");
                }
            }
            for (const auto& [point, mass] : exact.mass) {
                const double p = mass.to_double();
                const double sigma = std::sqrt(p * (1 - p) / 100000.0);
                const double diff = std::fabs(emp.probability(point) - p);
                if (diff > 4 * sigma)
                    check.require(false, mode.label() + " n=" + std::to_string(n) + " at " +
                                             to_string(point) + ": |" + fmt(diff) + "| > 4sigma");
            }
        }
    }
}

// 3. Exact Kac identity on the reflecting truncation at R = 50.
void criterion3(Check& check) {
    const auto chain =
        build_truncated_chain(nu(2), WalkMode::full_gcd(), 50, BoundaryPolicy::Reflecting);
    const auto stationary = stationary_cesaro(chain, {0, 0}, 500000, 1e-13L);
    const auto ret = expected_return_time(chain, {0, 0}, 1000000, 1e-16L);
    const auto origin = chain.index_of({0, 0});
    check.require(origin.has_value(), "origin missing from the chain");
    const long double product = stationary.pi[*origin] * ret.value;
    const double rel = std::fabs(static_cast<double>(product - 1.0L));
    check.require(rel <= 1e-8, "pi(0,0) * E[return] = " + fmt(static_cast<double>(product)) +
                                   " deviates by " + fmt(rel) + " > 1e-8");
}

// 4. Statistical Kac identity with >= 1e5 completed excursions.
void criterion4(Check& check, int threads) {
    auto config = config_for(WalkMode::full_gcd(), {0, 0}, 105000, 0xCAFE4);
    config.steps = 1000000;
    const auto result = kac_check(nu(2), config, 100000, threads);
    check.require(result.excursions_completed >= 100000,
                  "only " + std::to_string(result.excursions_completed) +
                      " completed excursions");
    check.require(result.ratio >= 0.9 && result.ratio <= 1.1,
                  "ratio " + fmt(result.ratio) + " outside [0.9, 1.1]");
}

// 5. Drift contraction for eta3 (k = 2) and eta1 (full).
void criterion5(Check& check, int threads) {
    check_drift_report(check, "eta3/k=2",
                       acceptance_drift(eta3(), WalkMode::coprime_to(2), 3, 0xD31F7, threads));
    check_drift_report(check, "eta1/full",
                       acceptance_drift(eta1(), WalkMode::full_gcd(), 4, 0xD31F8, threads));
}

// 6. Torus lower bound: covering word, cylinder bound, E[U] interval.
void criterion6(Check& check, int threads) {
    const auto cal = find_covering_word(nu(2), 2);
    check.require(cal.n0 >= 4, "covering word shorter than k^d");
    check.require(cal.n0 <= 8, "covering word too long for exact enumeration");
    const double four_pow = std::pow(4.0, -static_cast<double>(cal.n0));
    check.require(cal.cylinder_bound >= four_pow - 1e-18,
                  "cylinder bound " + fmt(cal.cylinder_bound) + " below 4^-L");
    const auto exact = enumerate_EU(nu(2), 2, cal.n0);
    const auto est = estimate_EU(nu(2), 2, cal.n0, 100000, 0xE0, threads);
    check.require(est.ci_lo > 0.0, "99% CI does not exclude 0");
    check.require(est.ci_lo <= exact.to_double() && exact.to_double() <= est.ci_hi,
                  "99% CI [" + fmt(est.ci_lo) + ", " + fmt(est.ci_hi) +
                      "] misses the enumerated E[U] = " + exact.str());
}

// 7. Chernoff domination with the certified cylinder alpha.
void criterion7(Check& check, int threads) {
    const auto cal = find_covering_word(nu(2), 2);
    const std::vector<std::size_t> grid{1, 2, 4, 8, 16, 32, 64, 128, 256};
    const double eps = 0.5;
    const auto rows =
        chernoff_experiment(nu(2), 2, {1, 1}, grid, eps, 10000, 0xC43F, cal, threads);
    for (const auto& row : rows) {
        if (row.empirical_tail > row.bound)
            check.require(false, "n=" + std::to_string(row.n) + ": tail " +
                                     fmt(row.empirical_tail) + " exceeds bound " +
                                     fmt(row.bound));
        const double reference =
            std::exp(cal.cylinder_bound * eps * eps / 2.0) *
            std::exp(-cal.cylinder_bound * eps * eps * static_cast<double>(row.n) /
                     (2.0 * static_cast<double>(cal.n0)));
        check.require(row.bound == reference, "bound column deviates from the formula");
    }
    // Tiny n: the threshold is below 1, so the tail is P[Y = 0]; compare to
    // the exact enumeration.
    const auto tiny = rows[1]; // n = 2
    const auto exact = enumerate_tail_probability(nu(2), 2, {1, 1}, tiny.n, tiny.threshold);
    const double p = exact.to_double();
    const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(tiny.trials));
    check.require(std::fabs(tiny.empirical_tail - p) <= 4 * sigma,
                  "tiny-n tail " + fmt(tiny.empirical_tail) + " vs exact " + fmt(p) +
                      " beyond 4 sigma");
}

// 8. Irreducibility: unique recurrent class containing 0 (d = 2 and 3,
// R = 10; box truncation strands transient boundary states, so the strict
// single-SCC reading is unattainable -- see the SccResult docs), plus 100
// replayed connect_to_zero paths.
void criterion8(Check& check) {
    for (int d : {2, 3}) {
        const auto chain = build_truncated_chain(nu(d), WalkMode::full_gcd(), 10,
                                                 BoundaryPolicy::Reflecting);
        const auto scc = irreducibility_scc(chain);
        check.require(scc.irreducible, "d=" + std::to_string(d) +
                                           ": recurrent classes = " +
                                           std::to_string(scc.closed_count) + ", expected 1");
        const auto origin = chain.index_of(LatticePoint(static_cast<std::size_t>(d), 0));
        check.require(origin.has_value() && scc.closed[scc.component[*origin]] == 1,
                      "d=" + std::to_string(d) + ": origin is not in the recurrent class");
    }
    RandomStream rng(0x5EED8);
    int replayed = 0;
    for (int d : {2, 3}) {
        int produced = 0;
        while (produced < 50) {
            LatticePoint x(static_cast<std::size_t>(d));
            for (auto& c : x) c = -50 + static_cast<Coord>(rng.bounded(101));
            x = normalize(x);
            if (norm_value(x, NormKind::L2) > 50.0) continue;
            const auto steps = connect_to_zero(x);
            const auto points = replay_path(steps, d);
            const LatticePoint end =
                points.empty() ? LatticePoint(static_cast<std::size_t>(d), 0) : points.back();
            if (end != x) {
                check.require(false, "replay of " + to_string(x) + " ends at " + to_string(end));
                return;
            }
            for (const auto& p : points)
                if (!is_primitive(p)) {
                    check.require(false, "non-primitive intermediate " + to_string(p));
                    return;
                }
            ++produced;
            ++replayed;
        }
    }
    check.require(replayed == 100, "replayed " + std::to_string(replayed) + " targets, not 100");
}

// 9. Non-action witness at d = 2, bound = 1, re-verified directly.
void criterion9(Check& check) {
    const auto witness = non_action_witness(2, 1);
    check.require(witness.has_value(), "no witness found within bound 1");
    if (!witness) return;
    const auto sequential = hat_plus(witness->a1, hat_plus(witness->a2, witness->z));
    LatticePoint sum(2);
    for (std::size_t c = 0; c < 2; ++c) sum[c] = witness->a1[c] + witness->a2[c];
    const auto combined = hat_plus(sum, witness->z);
    check.require(sequential != combined, "witness does not re-verify");
}

// 10. Figure panels complete and two disjoint 1e5-step windows of each
// trajectory have total-variation distance < 0.05 between their norm
// histograms.
void criterion10(Check& check) {
    struct Panel {
        const char* label;
        StepDistribution mu;
        WalkMode mode;
        std::string cli_args;
    };
    const std::vector<Panel> panels = {
        {"eta1/full", eta1(), WalkMode::full_gcd(), "--measure eta1 --mode full"},
        {"eta3/k=2", eta3(), WalkMode::coprime_to(2), "--measure eta3 --mode k --k 2"},
        {"eta3/k=5", eta3(), WalkMode::coprime_to(5), "--measure eta3 --mode k --k 5"},
    };
    TempDir dir;
    int panel_index = 0;
    for (const auto& panel : panels) {
        if (cli_path() != nullptr) {
            const fs::path out = dir.path / ("panel" + std::to_string(panel_index) + ".csv");
            const int code = run_cli("figure " + panel.cli_args + " --steps 1000000 --seed 42" +
                                     " --out " + out.string());
            check.require(code == 0, std::string(panel.label) + ": figure exited " +
                                         std::to_string(code));
            check.require(fs::exists(out), std::string(panel.label) + ": no output written");
        } else {
            check.require(false, "PRIMWALK_CLI not set");
        }

        WalkConfig config;
        config.mode = panel.mode;
        config.z0 = axis_start(panel.mu.dim(), 1);
        config.z0[1] = 0; // e_1
        config.steps = 1000000;
        config.seed = 42;
        EmpiricalDistribution early, late;
        walk_trajectory(panel.mu, config, [&](std::uint64_t i, const LatticePoint& z) {
            const auto bin = static_cast<Coord>(std::floor(norm_value(z, NormKind::L2)));
            if (i > 100000 && i <= 200000) {
                ++early.counts[{bin}];
                ++early.total;
            } else if (i > 900000 && i <= 1000000) {
                ++late.counts[{bin}];
                ++late.total;
            }
        });
        const double tv = tv_distance(early, late);
        check.require(tv < 0.05, std::string(panel.label) + ": window TV " + fmt(tv) +
                                     " >= 0.05");
        ++panel_index;
    }
}

// 11. Thread-count invariance: the parallel code paths behind criteria
// 2-10 (endpoint, cesaro, returns/kac, drift, E[U], chernoff, recurrence)
// and the figure command produce identical digests for 1 and N workers.
void criterion11(Check& check) {
    const int many = std::max(2u, std::thread::hardware_concurrency());
    const auto mu2 = nu(2);

    auto compare = [&](const std::string& label, const std::string& one,
                       const std::string& n) {
        check.require(one == n, label + ": digest differs between 1 and " +
                                    std::to_string(many) + " threads");
    };

    auto config = config_for(WalkMode::full_gcd(), {0, 0}, 30000, 0xD17);
    compare("endpoint",
            digest_distribution(endpoint_distribution(mu2, config, 4, 1)),
            digest_distribution(endpoint_distribution(mu2, config, 4, many)));
    compare("cesaro",
            digest_distribution(
                cesaro_distribution(mu2, config, 6, CesaroEstimator::PooledEndpoints, 1)),
            digest_distribution(
                cesaro_distribution(mu2, config, 6, CesaroEstimator::PooledEndpoints, many)));

    auto serialize_returns = [](const ReturnStats& stats) {
        std::ostringstream out;
        for (const auto& [len, count] : stats.completed_histogram)
            out << len << ":" << count << ";";
        out << stats.censored;
        return out.str();
    };
    compare("returns", serialize_returns(estimate_return_time(mu2, config, 10000, 1)),
            serialize_returns(estimate_return_time(mu2, config, 10000, many)));

    auto kac_config = config;
    kac_config.steps = 50000;
    auto serialize_kac = [](const KacCheckResult& result) {
        return fmt(result.omega_hat) + "|" + fmt(result.tau_hat) + "|" + fmt(result.ratio);
    };
    compare("kac", serialize_kac(kac_check(mu2, kac_config, 10000, 1)),
            serialize_kac(kac_check(mu2, kac_config, 10000, many)));

    compare("drift",
            digest_drift(acceptance_drift(eta3(), WalkMode::coprime_to(2), 3, 0xD31F7, 1)),
            digest_drift(acceptance_drift(eta3(), WalkMode::coprime_to(2), 3, 0xD31F7, many)));

    auto serialize_eu = [](const EUEstimate& est) {
        return fmt(est.mean) + "|" + fmt(est.ci_lo) + "|" + fmt(est.ci_hi);
    };
    compare("estimate_EU", serialize_eu(estimate_EU(mu2, 2, 8, 40000, 0xE11, 1)),
            serialize_eu(estimate_EU(mu2, 2, 8, 40000, 0xE11, many)));

    const auto cal = find_covering_word(mu2, 2);
    auto serialize_rows = [](const std::vector<ChernoffRow>& rows) {
        std::ostringstream out;
        for (const auto& row : rows)
            out << row.n << ":" << fmt(row.empirical_tail) << ":" << fmt(row.bound) << ";";
        return out.str();
    };
    const std::vector<std::size_t> grid{1, 4, 16, 64};
    compare("chernoff",
            serialize_rows(chernoff_experiment(mu2, 2, {1, 1}, grid, 0.5, 20000, 0xC11, cal, 1)),
            serialize_rows(
                chernoff_experiment(mu2, 2, {1, 1}, grid, 0.5, 20000, 0xC11, cal, many)));

    auto rec_config = config_for(WalkMode::full_gcd(), axis_start(4, 1), 2000, 0x12C);
    rec_config.z0[1] = 0;
    auto serialize_rec = [](const RecurrenceReport& report) {
        std::ostringstream out;
        for (const auto& [n, mass] : report.mass_by_n) out << n << ":" << fmt(mass) << ";";
        return out.str();
    };
    compare("recurrence",
            serialize_rec(recurrence_mass(eta1(), rec_config, 0.1, 10.0, {1, 4, 16}, 1)),
            serialize_rec(recurrence_mass(eta1(), rec_config, 0.1, 10.0, {1, 4, 16}, many)));

    if (cli_path() != nullptr) {
        TempDir dir;
        const fs::path out = dir.path / "panel.csv";
        const std::string args = "figure --measure eta3 --mode k --k 2 --steps 1000000 --seed 42";
        check.require(run_cli(args + " --threads 1 --out " + out.string()) == 0,
                      "figure --threads 1 failed");
        const std::uint64_t digest_one = fnv1a64_file(out);
        check.require(run_cli(args + " --threads " + std::to_string(many) + " --out " +
                              out.string()) == 0,
                      "figure --threads N failed");
        check.require(fnv1a64_file(out) == digest_one,
                      "figure output digest differs across thread counts");
    } else {
        check.require(false, "PRIMWALK_CLI not set");
    }
}

// 12. Recurrence mass with M' taken from criterion 5's eta1 drift report.
void criterion12(Check& check, int threads) {
    const auto drift = acceptance_drift(eta1(), WalkMode::full_gcd(), 4, 0xD31F8, threads);
    check.require(drift.contraction_found, "eta1 drift report has no contraction");
    if (!drift.contraction_found) return;
    auto config = config_for(WalkMode::full_gcd(), axis_start(4, 1), 2000, 0x12C12);
    config.z0[1] = 0; // e_1
    const std::vector<std::uint64_t> grid{1, 2, 4, 8, 16, 32, 64, 128};
    const double epsilon = 0.1;
    const auto report = recurrence_mass(eta1(), config, epsilon, drift.m_prime, grid, threads);
    check.require(report.radius == 2.0 * drift.m_prime / epsilon, "radius column mismatch");
    check.require(report.n_z.has_value(), "no n_z: mass never stabilizes above 1 - eps");
    if (report.n_z) {
        for (const auto& [n, mass] : report.mass_by_n)
            if (n >= *report.n_z)
                check.require(mass > 1.0 - epsilon, "mass " + fmt(mass) + " at n=" +
                                                        std::to_string(n) + " not > 1 - eps");
    }
}

struct Criterion {
    int id;
    const char* title;
    std::function<void(Check&)> body;
};

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--criterion" && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else if (arg == "--list") {
            for (int c = 1; c <= 12; ++c) std::cout << c << "\n";
            return 0;
        } else {
            std::cerr << "usage: primwalk_acceptance [--criterion N | --list]\n";
            return 2;
        }
    }

    const int threads = static_cast<int>(std::max(2u, std::thread::hardware_concurrency()));
    const std::vector<Criterion> criteria = {
        {1, "step-map property suite (>= 1e5 random triples)", criterion1},
        {2, "Monte Carlo endpoints within 4 sigma of the exact oracle",
         [&](Check& c) { criterion2(c, threads); }},
        {3, "exact Kac identity on the R=50 reflecting chain (1e-8)", criterion3},
        {4, "statistical Kac identity in [0.9, 1.1] with >= 1e5 excursions",
         [&](Check& c) { criterion4(c, threads); }},
        {5, "drift contraction for eta3 (k=2) and eta1 (full)",
         [&](Check& c) { criterion5(c, threads); }},
        {6, "covering word + E[U] interval against full enumeration",
         [&](Check& c) { criterion6(c, threads); }},
        {7, "Chernoff tail domination with the certified alpha",
         [&](Check& c) { criterion7(c, threads); }},
        {8, "unique recurrent class (d=2,3) and 100 replayed paths", criterion8},
        {9, "non-action witness at bound 1", criterion9},
        {10, "figure panels complete; window TV < 0.05", criterion10},
        {11, "thread-count invariance of criteria 2-10 outputs", criterion11},
        {12, "recurrence mass exceeds 1 - eps from n_z on",
         [&](Check& c) { criterion12(c, threads); }},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        if (only != 0 && criterion.id != only) continue;
        Check check;
        const auto start = std::chrono::steady_clock::now();
        try {
            criterion.body(check);
        } catch (const std::exception& e) {
            check.require(false, std::string("exception: ") + e.what());
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (check.failures.empty()) {
            std::cout << "[PASS] criterion " << criterion.id << ": " << criterion.title << " ("
                      << fmt(seconds) << "s)\n";
        } else {
            ++failures;
            std::cout << "[FAIL] criterion " << criterion.id << ": " << criterion.title << " ("
                      << fmt(seconds) << "s)\n";
            for (const auto& reason : check.failures)
                std::cout << "       - " << reason << "\n";
        }
    }
    return failures;
}
