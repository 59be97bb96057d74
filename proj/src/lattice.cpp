#include "primwalk/lattice.hpp"

#include <algorithm>
#include <cassert>
#include <cstdlib>
#include <deque>
#include <map>
#include <numeric>
#include <sstream>

namespace primwalk {

std::string to_string(const LatticePoint& z) {
    std::string out = "(";
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(z[i]);
    }
    out += ")";
    return out;
}

LatticePoint parse_point(const std::string& text) {
    LatticePoint out;
    std::string cleaned;
    for (char c : text)
        if (c != '(' && c != ')' && c != ' ') cleaned += c;
    std::stringstream ss(cleaned);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) throw std::invalid_argument("empty coordinate in '" + text + "'");
        std::size_t pos = 0;
        const long long v = std::stoll(item, &pos);
        if (pos != item.size()) throw std::invalid_argument("bad coordinate '" + item + "'");
        out.push_back(static_cast<Coord>(v));
    }
    if (out.empty()) throw std::invalid_argument("empty point '" + text + "'");
    return out;
}

Coord checked_add(Coord a, Coord b) {
    Coord r;
    if (__builtin_add_overflow(a, b, &r))
        throw OverflowError("coordinate addition overflows int64");
    return r;
}

Coord checked_mul(Coord a, Coord b) {
    Coord r;
    if (__builtin_mul_overflow(a, b, &r))
        throw OverflowError("coordinate multiplication overflows int64");
    return r;
}

std::uint64_t gcd_vec(const LatticePoint& z) {
    std::uint64_t g = 0;
    for (Coord c : z) {
        g = std::gcd(g, uabs(c));
        if (g == 1) return 1;
    }
    return g == 0 ? 1 : g;
}

namespace {

// Divide every coordinate by g (each must be divisible). Handles the
// corner where g = 2^63 does not fit in Coord.
void divide_exact(LatticePoint& z, std::uint64_t g) {
    if (g <= 1) return;
    if (g > static_cast<std::uint64_t>(std::numeric_limits<Coord>::max())) {
        // Only reachable when every coordinate is 0 or INT64_MIN.
        for (Coord& c : z) c = (c == 0) ? 0 : -1;
        return;
    }
    const Coord d = static_cast<Coord>(g);
    for (Coord& c : z) c /= d;
}

} // namespace

LatticePoint normalize(LatticePoint z) {
    divide_exact(z, gcd_vec(z));
    return z;
}

bool is_primitive(const LatticePoint& z) {
    return gcd_vec(z) == 1;
}

bool is_coprime_to(const LatticePoint& z, std::uint64_t k) {
    if (k < 2) throw std::invalid_argument("is_coprime_to requires k >= 2");
    return gcd_vec(z) % k != 0;
}

WalkMode WalkMode::coprime_to(std::uint64_t k) {
    if (k < 2)
        throw std::invalid_argument("coprime walk requires k >= 2 (k = 0 and 1 name the full-gcd walk)");
    if (k > static_cast<std::uint64_t>(std::numeric_limits<Coord>::max()))
        throw std::invalid_argument("k exceeds the coordinate range");
    return WalkMode(k);
}

bool WalkMode::valid_state(const LatticePoint& z) const {
    return is_full() ? is_primitive(z) : is_coprime_to(z, k_);
}

std::string WalkMode::label() const {
    return is_full() ? "full" : "k=" + std::to_string(k_);
}

namespace {

void check_dims(const LatticePoint& a, const LatticePoint& z) {
    if (a.size() != z.size())
        throw std::invalid_argument("dimension mismatch: " + std::to_string(a.size()) +
                                    " vs " + std::to_string(z.size()));
}

} // namespace

LatticePoint hat_plus(const LatticePoint& a, const LatticePoint& z) {
    check_dims(a, z);
    if (!is_primitive(z))
        throw std::invalid_argument("hat_plus: state " + to_string(z) + " is not primitive");
    LatticePoint sum(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) sum[i] = checked_add(a[i], z[i]);
    divide_exact(sum, gcd_vec(sum));
    return sum;
}

KStepResult hat_plus_k(const LatticePoint& a, const LatticePoint& z, std::uint64_t k) {
    check_dims(a, z);
    if (!is_coprime_to(z, k))
        throw std::invalid_argument("hat_plus_k: state " + to_string(z) +
                                    " is not coprime to " + std::to_string(k));
    KStepResult out;
    out.point.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out.point[i] = checked_add(a[i], z[i]);
    out.power = 0;
    const Coord kc = static_cast<Coord>(k);
    for (;;) {
        bool all_zero = true;
        bool divisible = true;
        for (Coord c : out.point) {
            if (c != 0) all_zero = false;
            if (c % kc != 0) {
                divisible = false;
                break;
            }
        }
        if (all_zero || !divisible) break;
        for (Coord& c : out.point) c /= kc;
        ++out.power;
    }
    return out;
}

LatticePoint step(const WalkMode& mode, const LatticePoint& a, const LatticePoint& z) {
    if (mode.is_full()) return hat_plus(a, z);
    return hat_plus_k(a, z, mode.k()).point;
}

StepOutcome apply_step(const WalkMode& mode, const LatticePoint& a, LatticePoint& z) {
    assert(a.size() == z.size());
    assert(mode.valid_state(z));
    StepOutcome out{1, 0};
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = checked_add(a[i], z[i]);
    if (mode.is_full()) {
        const std::uint64_t g = gcd_vec(z);
        divide_exact(z, g);
        if (g > 1) {
            out.divisor = g;
            out.power = 1;
        }
    } else {
        const Coord kc = static_cast<Coord>(mode.k());
        for (;;) {
            bool all_zero = true;
            bool divisible = true;
            for (Coord c : z) {
                if (c != 0) all_zero = false;
                if (c % kc != 0) {
                    divisible = false;
                    break;
                }
            }
            if (all_zero || !divisible) break;
            for (Coord& c : z) c /= kc;
            ++out.power;
        }
        if (out.power > 0) {
            std::uint64_t divisor = 1;
            for (std::uint32_t p = 0; p < out.power; ++p) divisor *= mode.k();
            out.divisor = divisor;
        }
    }
    assert(mode.valid_state(z));
    return out;
}

namespace {

// Odometer over the box [-bound, bound]^d in lexicographic order.
bool next_in_box(LatticePoint& v, Coord bound) {
    for (std::size_t i = v.size(); i-- > 0;) {
        if (v[i] < bound) {
            ++v[i];
            std::fill(v.begin() + static_cast<std::ptrdiff_t>(i) + 1, v.end(), -bound);
            return true;
        }
    }
    return false;
}

} // namespace

std::optional<NonActionWitness> non_action_witness(int d, Coord bound) {
    if (d < 2) throw std::invalid_argument("dimension must be >= 2");
    if (bound < 1) throw std::invalid_argument("bound must be >= 1");
    const std::size_t dim = static_cast<std::size_t>(d);
    LatticePoint a1(dim, -bound);
    do {
        LatticePoint a2(dim, -bound);
        do {
            LatticePoint sum(dim);
            for (std::size_t i = 0; i < dim; ++i) sum[i] = checked_add(a1[i], a2[i]);
            LatticePoint z(dim, -bound);
            do {
                if (!is_primitive(z)) continue;
                const LatticePoint sequential = hat_plus(a1, hat_plus(a2, z));
                const LatticePoint combined = hat_plus(sum, z);
                if (sequential != combined)
                    return NonActionWitness{a1, a2, z, sequential, combined};
            } while (next_in_box(z, bound));
        } while (next_in_box(a2, bound));
    } while (next_in_box(a1, bound));
    return std::nullopt;
}

bool is_prime_u64(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % p == 0) return n == p;
    }
    // Deterministic Miller-Rabin for 64-bit integers with the standard
    // 12-base certificate.
    const std::uint64_t d0 = n - 1;
    int s = 0;
    std::uint64_t d = d0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    auto mulmod = [n](std::uint64_t a, std::uint64_t b) {
        return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % n);
    };
    auto powmod = [&](std::uint64_t a, std::uint64_t e) {
        std::uint64_t r = 1;
        a %= n;
        while (e) {
            if (e & 1) r = mulmod(r, a);
            a = mulmod(a, a);
            e >>= 1;
        }
        return r;
    };
    for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        std::uint64_t x = powmod(a, d);
        if (x == 1 || x == d0) continue;
        bool witness = true;
        for (int r = 1; r < s; ++r) {
            x = mulmod(x, x);
            if (x == d0) {
                witness = false;
                break;
            }
        }
        if (witness) return false;
    }
    return true;
}

namespace {

LatticePoint unit(std::size_t d, std::size_t axis, Coord sign) {
    LatticePoint e(d, 0);
    e[axis] = sign;
    return e;
}

void append_units(StepSequence& seq, std::size_t d, std::size_t axis, Coord target_delta) {
    const Coord sign = target_delta >= 0 ? 1 : -1;
    for (std::uint64_t i = 0; i < uabs(target_delta); ++i) seq.push_back(unit(d, axis, sign));
}

// gcd of coordinates 2..d (raw; 0 when that slice is all zero).
std::uint64_t tail_gcd_raw(const LatticePoint& y) {
    std::uint64_t g = 0;
    for (std::size_t i = 1; i < y.size(); ++i) g = std::gcd(g, uabs(y[i]));
    return g;
}

// A point is directly routable from the origin when the staged unit-step
// construction below passes only through primitive points.
bool directly_routable(const LatticePoint& y) {
    if (y[0] == 1) return true;
    const std::uint64_t g = tail_gcd_raw(y);
    if (g == 1) return true;
    if (g == 0) return uabs(y[0]) <= 1; // (+-1, 0, ..., 0) or the origin
    return false;
}

// Route the origin to y: e_1 first, then build coordinates 2..d while the
// first coordinate pins the gcd at 1, then slide the first coordinate from
// 1 to y_1 (safe because the tail is coprime, or degenerate).
StepSequence direct_route(const LatticePoint& y) {
    const std::size_t d = y.size();
    StepSequence seq;
    bool all_zero = true;
    for (Coord c : y)
        if (c != 0) all_zero = false;
    if (all_zero) return seq;
    seq.push_back(unit(d, 0, 1));
    for (std::size_t i = 1; i < d; ++i) append_units(seq, d, i, y[i]);
    append_units(seq, d, 0, checked_add(y[0], -1));
    return seq;
}

// BFS over primitive points from x until a directly routable point is
// found. Returns the step sequence x -> y along primitive points, and y.
std::pair<StepSequence, LatticePoint> bfs_to_routable(const LatticePoint& x, std::size_t node_cap) {
    const std::size_t d = x.size();
    std::map<LatticePoint, std::pair<LatticePoint, LatticePoint>> parent; // node -> (prev, step)
    std::deque<LatticePoint> queue;
    parent.emplace(x, std::make_pair(LatticePoint{}, LatticePoint{}));
    queue.push_back(x);
    while (!queue.empty()) {
        LatticePoint cur = queue.front();
        queue.pop_front();
        if (directly_routable(cur)) {
            StepSequence back;
            LatticePoint node = cur;
            while (node != x) {
                const auto& [prev, st] = parent.at(node);
                back.push_back(st);
                node = prev;
            }
            std::reverse(back.begin(), back.end());
            return {back, cur};
        }
        if (parent.size() > node_cap)
            throw SearchLimitError("connect_to_zero: BFS node cap exceeded");
        for (std::size_t axis = 0; axis < d; ++axis) {
            for (Coord sign : {Coord{1}, Coord{-1}}) {
                LatticePoint nxt = cur;
                nxt[axis] = checked_add(nxt[axis], sign);
                if (!is_primitive(nxt)) continue;
                if (parent.contains(nxt)) continue;
                parent.emplace(nxt, std::make_pair(cur, unit(d, axis, sign)));
                queue.push_back(nxt);
            }
        }
    }
    throw SearchLimitError("connect_to_zero: no routable point reachable");
}

StepSequence connect_dim2(const LatticePoint& x, std::uint64_t prime_search_limit) {
    // Reduce by the sign and swap symmetries of the step map: work with
    // 0 <= a <= b, then map the steps back.
    const bool flip1 = x[0] < 0;
    const bool flip2 = x[1] < 0;
    Coord a = flip1 ? checked_mul(x[0], -1) : x[0];
    Coord b = flip2 ? checked_mul(x[1], -1) : x[1];
    const bool swapped = a > b;
    if (swapped) std::swap(a, b);

    StepSequence seq;
    if (a == 0 && b == 0) {
        // origin: empty path
    } else if (a == 0) {
        seq.push_back(unit(2, 1, 1)); // (0, 1)
    } else if (a == 1) {
        seq.push_back(unit(2, 0, 1));
        append_units(seq, 2, 1, b);
    } else {
        // Prime p = n*b + 1 with b >= a >= 2 guarantees p > n*a, so the
        // first-coordinate sweep from (1, p) to (n*a, p) never crosses a
        // multiple of p and both legs stay primitive. The single division
        // happens at the last step: (n*a, p) + (0, -1) = n*(a, b).
        Coord n = 0;
        Coord p = 0;
        for (std::uint64_t cand = 1; cand <= prime_search_limit; ++cand) {
            const Coord value = checked_add(checked_mul(b, static_cast<Coord>(cand)), 1);
            if (is_prime_u64(static_cast<std::uint64_t>(value))) {
                n = static_cast<Coord>(cand);
                p = value;
                break;
            }
        }
        if (n == 0)
            throw SearchLimitError("connect_to_zero: no prime p = n*x2 + 1 within " +
                                   std::to_string(prime_search_limit) + " candidates");
        seq.push_back(unit(2, 0, 1));
        append_units(seq, 2, 1, p);
        append_units(seq, 2, 0, checked_add(checked_mul(n, a), -1));
        seq.push_back(unit(2, 1, -1));
    }

    for (LatticePoint& s : seq) {
        if (swapped) std::swap(s[0], s[1]);
        if (flip1) s[0] = -s[0];
        if (flip2) s[1] = -s[1];
    }
    return seq;
}

} // namespace

std::vector<LatticePoint> replay_path(const StepSequence& steps, int d) {
    std::vector<LatticePoint> points;
    points.reserve(steps.size());
    LatticePoint cur(static_cast<std::size_t>(d), 0);
    for (const LatticePoint& s : steps) {
        cur = hat_plus(s, cur);
        points.push_back(cur);
    }
    return points;
}

StepSequence connect_to_zero(const LatticePoint& x, std::uint64_t prime_search_limit) {
    const std::size_t d = x.size();
    if (d < 2) throw std::invalid_argument("connect_to_zero requires dimension >= 2");
    if (!is_primitive(x))
        throw std::invalid_argument("connect_to_zero: " + to_string(x) + " is not primitive");

    StepSequence seq;
    if (d == 2) {
        seq = connect_dim2(x, prime_search_limit);
    } else if (directly_routable(x)) {
        seq = direct_route(x);
    } else {
        auto [detour, y] = bfs_to_routable(x, 500'000);
        seq = direct_route(y);
        // Descend the detour in reverse; every node on it is primitive, so
        // no division occurs.
        for (std::size_t i = detour.size(); i-- > 0;) {
            LatticePoint back = detour[i];
            for (Coord& c : back) c = -c;
            seq.push_back(back);
        }
    }

    // The construction is replayed before being returned; a mismatch would
    // mean the routing above is wrong for this input.
    const auto points = replay_path(seq, static_cast<int>(d));
    const LatticePoint end = points.empty() ? LatticePoint(d, 0) : points.back();
    if (end != x)
        throw std::logic_error("connect_to_zero: replay ends at " + to_string(end) +
                               ", expected " + to_string(x));
    return seq;
}

} // namespace primwalk
