#include "primwalk/torus.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <thread>

#include "primwalk/errors.hpp"

namespace primwalk {

std::vector<LatticePoint> plain_walk(const StepDistribution& mu, const LatticePoint& z,
                                     std::size_t n, RandomStream& rng) {
    if (static_cast<int>(z.size()) != mu.dim())
        throw std::invalid_argument("plain_walk: start dimension mismatch");
    std::vector<LatticePoint> path;
    path.reserve(n);
    LatticePoint cur = z;
    for (std::size_t i = 0; i < n; ++i) {
        const LatticePoint& a = mu.sample(rng);
        for (std::size_t c = 0; c < cur.size(); ++c) cur[c] = checked_add(cur[c], a[c]);
        path.push_back(cur);
    }
    return path;
}

namespace {

bool all_divisible(const LatticePoint& z, Coord k) {
    for (Coord c : z)
        if (c % k != 0) return false;
    return true;
}

} // namespace

std::uint64_t count_Y(std::span<const LatticePoint> path, std::uint64_t k) {
    if (k < 2) throw std::invalid_argument("count_Y requires k >= 2");
    const Coord kc = static_cast<Coord>(k);
    std::uint64_t y = 0;
    for (const auto& pos : path)
        if (all_divisible(pos, kc)) ++y;
    return y;
}

int indicator_M(std::span<const LatticePoint> path, std::uint64_t k) {
    const Coord kc = static_cast<Coord>(k);
    for (const auto& pos : path)
        if (all_divisible(pos, kc)) return 1;
    return 0;
}

namespace {

std::uint64_t torus_classes(std::uint64_t k, int d) {
    std::uint64_t classes = 1;
    for (int i = 0; i < d; ++i) {
        if (classes > (1ULL << 22) / k) throw CapacityError("torus has too many residue classes");
        classes *= k;
    }
    return classes;
}

std::uint64_t encode_residue(const LatticePoint& z, std::uint64_t k) {
    std::uint64_t code = 0;
    std::uint64_t mult = 1;
    const Coord kc = static_cast<Coord>(k);
    for (Coord c : z) {
        Coord m = c % kc;
        if (m < 0) m += kc;
        code += static_cast<std::uint64_t>(m) * mult;
        mult *= k;
    }
    return code;
}

} // namespace

int uniform_min_U(const StepSequence& prefix, std::uint64_t k) {
    if (k < 2) throw std::invalid_argument("uniform_min_U requires k >= 2");
    if (prefix.empty()) return 0;
    const int d = static_cast<int>(prefix.front().size());
    const std::uint64_t classes = torus_classes(k, d);
    std::vector<char> seen(classes, 0);
    std::uint64_t count = 0;
    LatticePoint sum(prefix.front().size(), 0);
    for (const auto& a : prefix) {
        for (std::size_t c = 0; c < sum.size(); ++c) sum[c] = checked_add(sum[c], a[c]);
        const std::uint64_t code = encode_residue(sum, k);
        if (!seen[code]) {
            seen[code] = 1;
            if (++count == classes) return 1;
        }
    }
    return 0;
}

namespace {

// Exact shortest covering word: BFS over (visited-mask, residue).
std::optional<StepSequence> covering_word_exact(const StepDistribution& mu, std::uint64_t k,
                                                std::uint64_t classes, std::size_t max_len) {
    const std::size_t n_states = static_cast<std::size_t>(classes) << classes;
    const std::size_t nsupp = mu.support().size();
    std::vector<std::uint64_t> step_code(nsupp);
    for (std::size_t s = 0; s < nsupp; ++s)
        step_code[s] = encode_residue(mu.support()[s].point, k);
    // Residue addition table is computed on the fly (digit-wise mod k).
    const int d = mu.dim();
    auto add_codes = [&](std::uint64_t a, std::uint64_t b) {
        std::uint64_t out = 0;
        std::uint64_t mult = 1;
        for (int i = 0; i < d; ++i) {
            out += ((a / mult % k + b / mult % k) % k) * mult;
            mult *= k;
        }
        return out;
    };
    std::vector<std::int32_t> parent(n_states, -2);   // -2 unseen, -1 root
    std::vector<std::uint8_t> via_step(n_states, 0);
    std::deque<std::uint32_t> queue;
    auto state_id = [&](std::uint32_t mask, std::uint32_t residue) {
        return (static_cast<std::uint32_t>(residue) << classes) | mask;
    };
    const std::uint32_t root = state_id(0, 0);
    parent[root] = -1;
    queue.push_back(root);
    const std::uint32_t full = static_cast<std::uint32_t>((1ULL << classes) - 1);
    std::uint32_t goal = 0;
    bool found = false;
    std::vector<std::size_t> depth(n_states, 0);
    while (!queue.empty()) {
        const std::uint32_t cur = queue.front();
        queue.pop_front();
        const std::uint32_t mask = cur & full;
        const std::uint32_t residue = cur >> classes;
        if (mask == full) {
            goal = cur;
            found = true;
            break;
        }
        if (depth[cur] >= max_len) continue;
        for (std::size_t s = 0; s < nsupp; ++s) {
            const std::uint32_t nr =
                static_cast<std::uint32_t>(add_codes(residue, step_code[s]));
            const std::uint32_t nm = mask | (1U << nr);
            const std::uint32_t nxt = state_id(nm, nr);
            if (parent[nxt] != -2) continue;
            parent[nxt] = static_cast<std::int32_t>(cur);
            via_step[nxt] = static_cast<std::uint8_t>(s);
            depth[nxt] = depth[cur] + 1;
            queue.push_back(nxt);
        }
    }
    if (!found) return std::nullopt;
    StepSequence word;
    std::uint32_t node = goal;
    while (parent[node] != -1) {
        word.push_back(mu.support()[via_step[node]].point);
        node = static_cast<std::uint32_t>(parent[node]);
    }
    std::reverse(word.begin(), word.end());
    return word;
}

// Greedy covering word: repeatedly BFS through the residue graph to the
// nearest unvisited class and append the steps along the way.
std::optional<StepSequence> covering_word_greedy(const StepDistribution& mu, std::uint64_t k,
                                                 std::uint64_t classes, std::size_t max_len) {
    const int d = mu.dim();
    const std::size_t nsupp = mu.support().size();
    std::vector<std::uint64_t> step_code(nsupp);
    for (std::size_t s = 0; s < nsupp; ++s)
        step_code[s] = encode_residue(mu.support()[s].point, k);
    auto add_codes = [&](std::uint64_t a, std::uint64_t b) {
        std::uint64_t out = 0;
        std::uint64_t mult = 1;
        for (int i = 0; i < d; ++i) {
            out += ((a / mult % k + b / mult % k) % k) * mult;
            mult *= k;
        }
        return out;
    };
    std::vector<char> covered(classes, 0);
    std::uint64_t covered_count = 0;
    std::uint64_t current = 0;
    StepSequence word;
    while (covered_count < classes) {
        // BFS from `current` to the nearest residue that is still uncovered
        // after its visit (the first step already moves us).
        std::vector<std::int64_t> prev(classes, -1);
        std::vector<std::uint8_t> via(classes, 0);
        std::vector<char> seen(classes, 0);
        std::deque<std::uint64_t> queue;
        seen[current] = 1;
        queue.push_back(current);
        std::int64_t target = -1;
        while (!queue.empty() && target < 0) {
            const std::uint64_t cur = queue.front();
            queue.pop_front();
            for (std::size_t s = 0; s < nsupp; ++s) {
                const std::uint64_t nr = add_codes(cur, step_code[s]);
                if (seen[nr]) continue;
                seen[nr] = 1;
                prev[nr] = static_cast<std::int64_t>(cur);
                via[nr] = static_cast<std::uint8_t>(s);
                if (!covered[nr]) {
                    target = static_cast<std::int64_t>(nr);
                    break;
                }
                queue.push_back(nr);
            }
        }
        if (target < 0) return std::nullopt; // not reachable: coverage check failed upstream
        StepSequence leg;
        std::uint64_t node = static_cast<std::uint64_t>(target);
        while (node != current) {
            leg.push_back(mu.support()[via[node]].point);
            node = static_cast<std::uint64_t>(prev[node]);
        }
        std::reverse(leg.begin(), leg.end());
        for (const auto& a : leg) {
            word.push_back(a);
            current = add_codes(current, encode_residue(a, k));
            if (!covered[current]) {
                covered[current] = 1;
                ++covered_count;
            }
            if (word.size() > max_len) return std::nullopt;
        }
    }
    return word;
}

} // namespace

TorusCalibration find_covering_word(const StepDistribution& mu, std::uint64_t k,
                                    std::size_t max_len) {
    mu.validate_or_throw();
    if (!torus_coverage_check(mu, k))
        throw std::invalid_argument("support residues do not reach every class of (Z/kZ)^d");
    const int d = mu.dim();
    const std::uint64_t classes = torus_classes(k, d);
    if (classes > 4096) throw CapacityError("covering-word search capped at k^d <= 4096");

    std::optional<StepSequence> word;
    if (classes <= 16)
        word = covering_word_exact(mu, k, classes, max_len);
    if (!word) word = covering_word_greedy(mu, k, classes, max_len);
    if (!word)
        throw SearchLimitError("no covering word within max_len = " + std::to_string(max_len));

    TorusCalibration cal;
    cal.k = k;
    cal.covering_word = std::move(*word);
    cal.n0 = cal.covering_word.size();

    // Cylinder bound: product of the step probabilities along the word.
    double log_bound = 0.0;
    std::optional<Rational> exact = Rational(1);
    std::map<LatticePoint, std::uint64_t> weight_of;
    for (const auto& wp : mu.support()) weight_of[wp.point] = wp.weight;
    for (const auto& a : cal.covering_word) {
        const std::uint64_t w = weight_of.at(a);
        log_bound += std::log(static_cast<double>(w)) -
                     std::log(static_cast<double>(mu.denominator()));
        if (exact) {
            try {
                *exact *= Rational::ratio(w, mu.denominator());
            } catch (const OverflowError&) {
                exact.reset();
            }
        }
    }
    cal.log_cylinder_bound = log_bound;
    cal.cylinder_bound = exact ? exact->to_double() : std::exp(log_bound);
    cal.cylinder_bound_exact = exact;
    return cal;
}

EUEstimate estimate_EU(const StepDistribution& mu, std::uint64_t k, std::size_t n,
                       std::uint64_t trials, std::uint64_t seed, int threads) {
    mu.validate_or_throw();
    if (k < 2) throw std::invalid_argument("estimate_EU requires k >= 2");
    if (trials == 0) throw std::invalid_argument("estimate_EU requires trials >= 1");
    torus_classes(k, mu.dim()); // capacity check

    const int workers = std::max(1, threads);
    std::vector<std::uint64_t> hits(static_cast<std::size_t>(workers), 0);
    auto run_range = [&](int w, std::uint64_t lo, std::uint64_t hi) {
        StepSequence prefix;
        std::uint64_t local = 0;
        for (std::uint64_t t = lo; t < hi; ++t) {
            RandomStream rng = derive_stream(seed, t);
            prefix.clear();
            for (std::size_t i = 0; i < n; ++i) prefix.push_back(mu.sample(rng));
            local += static_cast<std::uint64_t>(uniform_min_U(prefix, k));
        }
        hits[static_cast<std::size_t>(w)] = local;
    };
    if (workers == 1) {
        run_range(0, 0, trials);
    } else {
        std::vector<std::thread> pool;
        const std::uint64_t chunk = (trials + static_cast<std::uint64_t>(workers) - 1) /
                                    static_cast<std::uint64_t>(workers);
        for (int w = 0; w < workers; ++w) {
            const std::uint64_t lo = std::min(trials, chunk * static_cast<std::uint64_t>(w));
            const std::uint64_t hi = std::min(trials, lo + chunk);
            pool.emplace_back(run_range, w, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    std::uint64_t total_hits = 0;
    for (std::uint64_t h : hits) total_hits += h;

    EUEstimate est;
    est.trials = trials;
    est.mean = static_cast<double>(total_hits) / static_cast<double>(trials);
    const double z99 = 2.5758293035489004;
    const double se = std::sqrt(est.mean * (1.0 - est.mean) / static_cast<double>(trials));
    est.ci_lo = std::max(0.0, est.mean - z99 * se);
    est.ci_hi = std::min(1.0, est.mean + z99 * se);
    return est;
}

std::vector<ChernoffRow> chernoff_experiment(const StepDistribution& mu, std::uint64_t k,
                                             const LatticePoint& z,
                                             const std::vector<std::size_t>& n_grid,
                                             double epsilon, std::uint64_t trials,
                                             std::uint64_t seed,
                                             const TorusCalibration& calibration,
                                             int threads) {
    mu.validate_or_throw();
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("chernoff_experiment requires 0 < epsilon < 1");
    if (calibration.n0 == 0) throw std::invalid_argument("calibration has no covering word");
    const double alpha = calibration.cylinder_bound; // certified lower bound
    const double n0 = static_cast<double>(calibration.n0);
    const double c_eps_alpha = std::exp(alpha * epsilon * epsilon / 2.0);

    std::vector<ChernoffRow> rows;
    const int workers = std::max(1, threads);
    for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
        const std::size_t n = n_grid[gi];
        const double threshold =
            (1.0 - epsilon) * alpha * static_cast<double>(n) / (2.0 * n0);
        std::vector<std::uint64_t> tail_counts(static_cast<std::size_t>(workers), 0);
        auto run_range = [&](int w, std::uint64_t lo, std::uint64_t hi) {
            std::uint64_t local = 0;
            LatticePoint cur(z.size());
            const Coord kc = static_cast<Coord>(k);
            for (std::uint64_t t = lo; t < hi; ++t) {
                RandomStream rng = derive_stream(seed, gi * trials + t);
                cur = z;
                std::uint64_t y = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    const LatticePoint& a = mu.sample(rng);
                    for (std::size_t c = 0; c < cur.size(); ++c)
                        cur[c] = checked_add(cur[c], a[c]);
                    if (all_divisible(cur, kc)) ++y;
                }
                if (static_cast<double>(y) <= threshold) ++local;
            }
            tail_counts[static_cast<std::size_t>(w)] = local;
        };
        if (workers == 1) {
            run_range(0, 0, trials);
        } else {
            std::vector<std::thread> pool;
            const std::uint64_t chunk = (trials + static_cast<std::uint64_t>(workers) - 1) /
                                        static_cast<std::uint64_t>(workers);
            for (int w = 0; w < workers; ++w) {
                const std::uint64_t lo = std::min(trials, chunk * static_cast<std::uint64_t>(w));
                const std::uint64_t hi = std::min(trials, lo + chunk);
                pool.emplace_back(run_range, w, lo, hi);
            }
            for (auto& th : pool) th.join();
        }
        std::uint64_t tail = 0;
        for (std::uint64_t c : tail_counts) tail += c;

        ChernoffRow row;
        row.n = n;
        row.threshold = threshold;
        row.trials = trials;
        row.empirical_tail = static_cast<double>(tail) / static_cast<double>(trials);
        row.bound = c_eps_alpha *
                    std::exp(-alpha * epsilon * epsilon * static_cast<double>(n) / (2.0 * n0));
        rows.push_back(row);
    }
    return rows;
}

namespace {

// Depth-first enumeration over support^n with exact path probabilities.
template <typename Visit>
void enumerate_paths(const StepDistribution& mu, LatticePoint& cur, std::size_t depth,
                     std::size_t n, std::uint64_t y, const Coord kc, Rational prob,
                     Visit& visit) {
    if (depth == n) {
        visit(y, prob);
        return;
    }
    for (std::size_t s = 0; s < mu.support().size(); ++s) {
        const LatticePoint& a = mu.support()[s].point;
        for (std::size_t c = 0; c < cur.size(); ++c) cur[c] = checked_add(cur[c], a[c]);
        const std::uint64_t ny = y + (all_divisible(cur, kc) ? 1 : 0);
        enumerate_paths(mu, cur, depth + 1, n, ny, kc, prob * mu.probability(s), visit);
        for (std::size_t c = 0; c < cur.size(); ++c) cur[c] = checked_add(cur[c], -a[c]);
    }
}

} // namespace

namespace {

void check_enumeration_size(std::size_t branching, std::size_t n) {
    double total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= static_cast<double>(branching);
    if (n > 12 || total > 67108864.0)
        throw CapacityError("path enumeration capped at |supp|^n <= 2^26, n <= 12");
}

} // namespace

Rational enumerate_tail_probability(const StepDistribution& mu, std::uint64_t k,
                                    const LatticePoint& z, std::size_t n, double threshold) {
    mu.validate_or_throw();
    check_enumeration_size(mu.support().size(), n);
    Rational tail;
    LatticePoint cur = z;
    auto visit = [&](std::uint64_t y, const Rational& p) {
        if (static_cast<double>(y) <= threshold) tail += p;
    };
    enumerate_paths(mu, cur, 0, n, 0, static_cast<Coord>(k), Rational(1), visit);
    return tail;
}

Rational enumerate_EU(const StepDistribution& mu, std::uint64_t k, std::size_t n) {
    mu.validate_or_throw();
    check_enumeration_size(mu.support().size(), n);
    torus_classes(k, mu.dim()); // capacity check
    if (n == 0) return Rational(0);
    Rational eu;
    StepSequence prefix(n, LatticePoint(static_cast<std::size_t>(mu.dim()), 0));
    // Enumerate words rather than positions: U depends on the step prefix.
    auto recurse = [&](auto&& self, std::size_t depth, Rational prob) -> void {
        if (depth == n) {
            if (uniform_min_U(prefix, k) == 1) eu += prob;
            return;
        }
        for (std::size_t s = 0; s < mu.support().size(); ++s) {
            prefix[depth] = mu.support()[s].point;
            self(self, depth + 1, prob * mu.probability(s));
        }
    };
    recurse(recurse, 0, Rational(1));
    return eu;
}

} // namespace primwalk
