#include "primwalk/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "primwalk/errors.hpp"

namespace primwalk {

ExactDistribution propagate(const ExactDistribution& dist, const StepDistribution& mu,
                            const WalkMode& mode) {
    mu.validate_or_throw();
    ExactDistribution out;
    for (const auto& [point, mass] : dist.mass) {
        for (std::size_t s = 0; s < mu.support().size(); ++s) {
            const LatticePoint target = step(mode, mu.support()[s].point, point);
            out.mass[target] += mass * mu.probability(s);
        }
    }
    return out;
}

ExactDistribution exact_endpoint(const LatticePoint& z, const StepDistribution& mu,
                                 const WalkMode& mode, std::size_t n, std::size_t support_cap) {
    if (!mode.valid_state(z))
        throw std::invalid_argument("start " + to_string(z) + " is invalid for mode " + mode.label());
    ExactDistribution dist = ExactDistribution::dirac(z);
    for (std::size_t i = 0; i < n; ++i) {
        dist = propagate(dist, mu, mode);
        if (dist.mass.size() > support_cap)
            throw CapacityError("exact endpoint support exceeds cap at step " + std::to_string(i + 1));
    }
    return dist;
}

const char* boundary_policy_name(BoundaryPolicy p) {
    return p == BoundaryPolicy::Reflecting ? "reflecting" : "substochastic";
}

std::optional<std::size_t> TruncatedChain::index_of(const LatticePoint& z) const {
    const auto it = std::lower_bound(states.begin(), states.end(), z);
    if (it == states.end() || *it != z) return std::nullopt;
    return static_cast<std::size_t>(it - states.begin());
}

Rational TruncatedChain::row_sum(std::size_t state) const {
    std::uint64_t w = 0;
    for (const auto& [target, weight] : rows[state]) w += weight;
    return Rational::ratio(w, denom);
}

Rational TruncatedChain::deficit(std::size_t state) const {
    return policy == BoundaryPolicy::Substochastic ? Rational::ratio(escaped[state], denom)
                                                   : Rational(0);
}

TruncatedChain build_truncated_chain(const StepDistribution& mu, const WalkMode& mode,
                                     Coord radius, BoundaryPolicy policy,
                                     std::size_t state_cap) {
    mu.validate_or_throw();
    if (radius < 0) throw std::invalid_argument("radius must be >= 0");
    const int d = mu.dim();

    TruncatedChain chain;
    chain.mode = mode;
    chain.radius = radius;
    chain.policy = policy;
    chain.denom = mu.denominator();

    // Enumerate mode-valid states in the box, lexicographically.
    LatticePoint cursor(static_cast<std::size_t>(d), -radius);
    bool more = true;
    while (more) {
        if (mode.valid_state(cursor)) {
            chain.states.push_back(cursor);
            if (chain.states.size() > state_cap)
                throw CapacityError("truncated chain exceeds the state cap");
        }
        more = false;
        for (std::size_t i = cursor.size(); i-- > 0;) {
            if (cursor[i] < radius) {
                ++cursor[i];
                std::fill(cursor.begin() + static_cast<std::ptrdiff_t>(i) + 1, cursor.end(),
                          -radius);
                more = true;
                break;
            }
        }
    }

    chain.rows.resize(chain.states.size());
    chain.escaped.assign(chain.states.size(), 0);
    for (std::size_t si = 0; si < chain.states.size(); ++si) {
        std::map<std::uint32_t, std::uint64_t> row;
        std::uint64_t escaped = 0;
        for (std::size_t s = 0; s < mu.support().size(); ++s) {
            const LatticePoint target = step(mode, mu.support()[s].point, chain.states[si]);
            bool inside = true;
            for (Coord c : target)
                if (c > radius || c < -radius) inside = false;
            if (inside) {
                const auto ti = chain.index_of(target);
                row[static_cast<std::uint32_t>(*ti)] += mu.support()[s].weight;
            } else {
                escaped += mu.support()[s].weight;
            }
        }
        chain.escaped[si] = escaped;
        if (policy == BoundaryPolicy::Reflecting && escaped > 0)
            row[static_cast<std::uint32_t>(si)] += escaped;
        chain.rows[si].assign(row.begin(), row.end());
    }
    return chain;
}

namespace {

void apply_operator(const TruncatedChain& chain, const std::vector<long double>& x,
                    std::vector<long double>& out) {
    std::fill(out.begin(), out.end(), 0.0L);
    const long double denom = static_cast<long double>(chain.denom);
    for (std::size_t s = 0; s < chain.rows.size(); ++s) {
        if (x[s] == 0.0L) continue;
        const long double m = x[s];
        for (const auto& [target, weight] : chain.rows[s])
            out[target] += m * (static_cast<long double>(weight) / denom);
    }
}

long double tv_distance(const std::vector<long double>& a, const std::vector<long double>& b) {
    long double acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::fabs(a[i] - b[i]);
    return acc / 2;
}

} // namespace

StationaryResult stationary_cesaro(const TruncatedChain& chain, const LatticePoint& z0,
                                   std::uint64_t max_iters, long double tol) {
    if (chain.policy != BoundaryPolicy::Reflecting)
        throw std::invalid_argument("stationary measure needs the Reflecting chain");
    const auto start = chain.index_of(z0);
    if (!start) throw std::invalid_argument("start " + to_string(z0) + " outside the chain");

    const std::size_t n = chain.states.size();
    std::vector<long double> current(n, 0.0L); // omega_i
    current[*start] = 1.0L;
    std::vector<long double> first;            // omega_1, for the Cesaro residual
    std::vector<long double> cesaro(n, 0.0L);  // running sum of omega_1..omega_i
    std::vector<long double> next(n, 0.0L);
    long double prev_power_residual = -1.0L;

    for (std::uint64_t iter = 1; iter <= max_iters; ++iter) {
        apply_operator(chain, current, next);
        std::swap(current, next); // current = omega_iter, next = omega_{iter-1}
        if (iter == 1) first = current;

        // Cesaro residual of A_{iter-1} = (1/(iter-1)) sum_{j<iter} omega_j:
        // TV(A P, A) = TV(omega_iter, omega_1) / (iter-1). Checked before
        // the running sum absorbs omega_iter.
        if (iter >= 2) {
            long double diff = 0;
            for (std::size_t i = 0; i < n; ++i) diff += std::fabs(current[i] - first[i]);
            const long double cesaro_residual = diff / (2.0L * static_cast<long double>(iter - 1));
            if (cesaro_residual <= tol) {
                StationaryResult res;
                res.pi.resize(n);
                long double total = 0;
                for (std::size_t i = 0; i < n; ++i) total += cesaro[i];
                for (std::size_t i = 0; i < n; ++i) res.pi[i] = cesaro[i] / total;
                res.iterations = iter;
                apply_operator(chain, res.pi, next);
                res.residual = tv_distance(next, res.pi);
                return res;
            }
        }
        for (std::size_t i = 0; i < n; ++i) cesaro[i] += current[i];

        // Power-iteration stop: the distance to the fixed point is bounded
        // by residual / (1 - rho) with rho the geometric decay rate, which
        // is estimated from consecutive residuals.
        const long double power_residual = tv_distance(current, next);
        long double rho = 0.97L;
        if (prev_power_residual > 0 && power_residual < prev_power_residual)
            rho = std::min(0.9999L, power_residual / prev_power_residual);
        prev_power_residual = power_residual;
        if (power_residual / (1.0L - rho) <= tol) {
            StationaryResult res;
            res.pi = current;
            res.iterations = iter;
            apply_operator(chain, res.pi, next);
            res.residual = tv_distance(next, res.pi);
            return res;
        }
    }
    throw ConvergenceError("stationary iteration did not reach tol within " +
                           std::to_string(max_iters) + " iterations");
}

ReturnTimeResult expected_return_time(const TruncatedChain& chain, const LatticePoint& z0,
                                      std::uint64_t max_sweeps, long double tol) {
    if (chain.policy != BoundaryPolicy::Reflecting)
        throw std::invalid_argument("return times need the Reflecting chain");
    const auto start = chain.index_of(z0);
    if (!start) throw std::invalid_argument("state " + to_string(z0) + " outside the chain");
    const std::size_t target = *start;
    const std::size_t n = chain.states.size();
    const long double denom = static_cast<long double>(chain.denom);

    // The return time only involves states reachable from z0 before the
    // first return. Every one of them must be able to reach z0 back,
    // otherwise the expected return time is infinite.
    std::vector<char> reaches_target(n, 0);
    {
        std::vector<std::vector<std::uint32_t>> reverse(n);
        for (std::size_t s = 0; s < n; ++s)
            for (const auto& [t, w] : chain.rows[s]) {
                (void)w;
                reverse[t].push_back(static_cast<std::uint32_t>(s));
            }
        std::vector<std::uint32_t> stack{static_cast<std::uint32_t>(target)};
        reaches_target[target] = 1;
        while (!stack.empty()) {
            const std::uint32_t cur = stack.back();
            stack.pop_back();
            for (std::uint32_t prev : reverse[cur])
                if (!reaches_target[prev]) {
                    reaches_target[prev] = 1;
                    stack.push_back(prev);
                }
        }
    }
    std::vector<std::uint32_t> active; // forward closure of z0, excluding z0
    {
        std::vector<char> seen(n, 0);
        seen[target] = 1;
        std::vector<std::uint32_t> stack;
        for (const auto& [t, w] : chain.rows[target]) {
            (void)w;
            if (!seen[t]) {
                seen[t] = 1;
                stack.push_back(t);
            }
        }
        while (!stack.empty()) {
            const std::uint32_t cur = stack.back();
            stack.pop_back();
            if (!reaches_target[cur])
                throw ConvergenceError("hitting-time system is singular: " +
                                       to_string(chain.states[cur]) + " cannot return to " +
                                       to_string(z0) + " within the truncation");
            active.push_back(cur);
            for (const auto& [t, w] : chain.rows[cur]) {
                (void)w;
                if (!seen[t]) {
                    seen[t] = 1;
                    stack.push_back(t);
                }
            }
        }
        std::sort(active.begin(), active.end());
    }

    // h[s] = expected steps to hit `target` from s; h[target] fixed at 0.
    std::vector<long double> h(n, 0.0L);
    long double residual = 0;
    std::uint64_t sweep = 0;
    for (sweep = 1; sweep <= max_sweeps; ++sweep) {
        long double max_change = 0;
        long double max_h = 1;
        for (std::uint32_t s : active) {
            long double acc = 1.0L;
            for (const auto& [t, w] : chain.rows[s]) {
                if (t == target) continue;
                acc += (static_cast<long double>(w) / denom) * h[t];
            }
            max_change = std::max(max_change, std::fabs(acc - h[s]));
            h[s] = acc;
            max_h = std::max(max_h, std::fabs(acc));
        }
        if (max_change <= tol * max_h) break;
    }
    if (sweep > max_sweeps)
        throw ConvergenceError("hitting-time solve did not converge in " +
                               std::to_string(max_sweeps) + " sweeps");

    // Residual of the fixed-point equation, for reporting.
    for (std::uint32_t s : active) {
        long double acc = 1.0L;
        for (const auto& [t, w] : chain.rows[s]) {
            if (t == target) continue;
            acc += (static_cast<long double>(w) / denom) * h[t];
        }
        residual = std::max(residual, std::fabs(acc - h[s]));
    }

    ReturnTimeResult res;
    res.sweeps = sweep;
    res.residual = residual;
    res.value = 1.0L;
    for (const auto& [t, w] : chain.rows[target]) {
        if (t == target) continue;
        res.value += (static_cast<long double>(w) / denom) * h[t];
    }
    return res;
}

SccResult irreducibility_scc(const TruncatedChain& chain) {
    const std::size_t n = chain.states.size();
    SccResult res;
    res.component.assign(n, 0);

    // Iterative Tarjan.
    std::vector<std::int64_t> index(n, -1), low(n, 0);
    std::vector<char> on_stack(n, 0);
    std::vector<std::uint32_t> stack;
    std::int64_t next_index = 0;
    std::uint32_t components = 0;

    struct Frame {
        std::uint32_t node;
        std::size_t edge;
    };
    std::vector<Frame> call;
    for (std::uint32_t root = 0; root < n; ++root) {
        if (index[root] != -1) continue;
        call.push_back({root, 0});
        while (!call.empty()) {
            Frame& f = call.back();
            const std::uint32_t v = f.node;
            if (f.edge == 0) {
                index[v] = low[v] = next_index++;
                stack.push_back(v);
                on_stack[v] = 1;
            }
            bool descended = false;
            while (f.edge < chain.rows[v].size()) {
                const std::uint32_t w = chain.rows[v][f.edge].first;
                ++f.edge;
                if (index[w] == -1) {
                    call.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (on_stack[w]) low[v] = std::min(low[v], index[w]);
            }
            if (descended) continue;
            if (low[v] == index[v]) {
                for (;;) {
                    const std::uint32_t w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    res.component[w] = components;
                    if (w == v) break;
                }
                ++components;
            }
            call.pop_back();
            if (!call.empty()) {
                const std::uint32_t parent = call.back().node;
                low[parent] = std::min(low[parent], low[v]);
            }
        }
    }
    res.count = components;
    res.single_scc = components == 1;

    // A component is closed when no edge leaves it.
    res.closed.assign(components, 1);
    for (std::size_t s = 0; s < n; ++s)
        for (const auto& [t, w] : chain.rows[s]) {
            (void)w;
            if (res.component[s] != res.component[t]) res.closed[res.component[s]] = 0;
        }
    res.closed_count = 0;
    for (char c : res.closed)
        if (c) ++res.closed_count;
    res.irreducible = res.closed_count == 1;
    return res;
}

ConeCheckResult cone_monotonicity_check(const LatticePoint& z, const StepDistribution& mu,
                                        std::size_t n, const std::vector<LatticePoint>& cone_base,
                                        std::uint64_t k, std::size_t support_cap) {
    if (!is_primitive(z))
        throw std::invalid_argument("cone check needs a primitive start");
    if (!is_coprime_to(z, k))
        throw std::invalid_argument("cone check start must be coprime to k");
    std::set<LatticePoint> base;
    for (const auto& v : cone_base) {
        if (!is_primitive(v))
            throw std::invalid_argument("cone base point " + to_string(v) + " is not primitive");
        base.insert(v);
    }
    // x = m*v with v primitive and m >= 1 forces v = normalize(x); the zero
    // vector is in the cone only when it is in the base.
    auto in_cone = [&](const LatticePoint& x) {
        bool zero = true;
        for (Coord c : x)
            if (c != 0) zero = false;
        if (zero) return base.contains(x);
        return base.contains(normalize(x));
    };

    const auto full = exact_endpoint(z, mu, WalkMode::full_gcd(), n, support_cap);
    const auto kdist = exact_endpoint(z, mu, WalkMode::coprime_to(k), n, support_cap);
    ConeCheckResult res;
    for (const auto& [point, mass] : full.mass)
        if (in_cone(point)) res.mass_full += mass;
    for (const auto& [point, mass] : kdist.mass)
        if (in_cone(point)) res.mass_k += mass;
    res.violated = res.mass_full < res.mass_k;
    return res;
}

} // namespace primwalk
