#include "primwalk/measure.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <set>

#include "primwalk/errors.hpp"

namespace primwalk {

const char* norm_name(NormKind norm) {
    switch (norm) {
        case NormKind::L1: return "l1";
        case NormKind::L2: return "l2";
        case NormKind::Linf: return "linf";
    }
    return "?";
}

NormKind norm_from_name(const std::string& name) {
    if (name == "l1") return NormKind::L1;
    if (name == "l2") return NormKind::L2;
    if (name == "linf") return NormKind::Linf;
    throw std::invalid_argument("unknown norm '" + name + "' (expected l1|l2|linf)");
}

double norm_value(const LatticePoint& z, NormKind norm) {
    switch (norm) {
        case NormKind::L1: {
            long double s = 0;
            for (Coord c : z) s += static_cast<long double>(uabs(c));
            return static_cast<double>(s);
        }
        case NormKind::L2: {
            long double s = 0;
            for (Coord c : z) {
                const long double v = static_cast<long double>(c);
                s += v * v;
            }
            return static_cast<double>(std::sqrt(s));
        }
        case NormKind::Linf: {
            std::uint64_t m = 0;
            for (Coord c : z) m = std::max(m, uabs(c));
            return static_cast<double>(m);
        }
    }
    return 0;
}

StepDistribution::StepDistribution(std::vector<WeightedPoint> support, std::uint64_t denominator)
    : support_(std::move(support)), denom_(denominator) {
    cumulative_.reserve(support_.size());
    std::uint64_t acc = 0;
    for (const auto& wp : support_) {
        acc += wp.weight; // validated (exactly the denominator) in validate()
        cumulative_.push_back(acc);
    }
}

std::vector<std::string> StepDistribution::validate() const {
    std::vector<std::string> errors;
    if (support_.empty()) {
        errors.push_back("empty support");
        return errors;
    }
    if (denom_ == 0) errors.push_back("denominator is zero");
    const std::size_t d = support_.front().point.size();
    if (d < 2) errors.push_back("dimension " + std::to_string(d) + " < 2");
    std::uint64_t sum = 0;
    bool overflow = false;
    std::set<LatticePoint> seen;
    for (const auto& wp : support_) {
        if (wp.point.size() != d)
            errors.push_back("support point " + to_string(wp.point) + " has mismatched dimension");
        if (wp.weight == 0)
            errors.push_back("support point " + to_string(wp.point) + " has zero weight");
        if (!seen.insert(wp.point).second)
            errors.push_back("duplicate support point " + to_string(wp.point));
        if (__builtin_add_overflow(sum, wp.weight, &sum)) overflow = true;
    }
    if (overflow)
        errors.push_back("weights overflow 64 bits");
    else if (sum != denom_)
        errors.push_back("weights sum " + std::to_string(sum) + " != " + std::to_string(denom_));
    return errors;
}

void StepDistribution::validate_or_throw() const {
    const auto errors = validate();
    if (errors.empty()) return;
    std::string joined;
    for (const auto& e : errors) {
        if (!joined.empty()) joined += "; ";
        joined += e;
    }
    throw std::invalid_argument("invalid step distribution: " + joined);
}

const LatticePoint& StepDistribution::sample(RandomStream& rng) const {
    const std::uint64_t r = rng.bounded(denom_);
    // Supports are small; linear scan beats binary search here.
    for (std::size_t i = 0; i < cumulative_.size(); ++i)
        if (r < cumulative_[i]) return support_[i].point;
    return support_.back().point; // unreachable on a validated measure
}

double first_moment(const StepDistribution& mu, NormKind norm) {
    long double acc = 0;
    for (const auto& wp : mu.support())
        acc += static_cast<long double>(norm_value(wp.point, norm)) * wp.weight;
    return static_cast<double>(acc / mu.denominator());
}

Rational first_moment_exact(const StepDistribution& mu, NormKind norm) {
    if (norm == NormKind::L2)
        throw std::invalid_argument("the L2 first moment is irrational in general; use first_moment");
    Rational acc;
    for (const auto& wp : mu.support()) {
        std::uint64_t n = 0;
        for (Coord c : wp.point)
            n = (norm == NormKind::L1) ? n + uabs(c) : std::max(n, uabs(c));
        acc += Rational::ratio(n, 1) * Rational::ratio(wp.weight, mu.denominator());
    }
    return acc;
}

const char* verdict_name(GenerationVerdict v) {
    switch (v) {
        case GenerationVerdict::Generates: return "Generates";
        case GenerationVerdict::FailsGroup: return "FailsGroup";
        case GenerationVerdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}

namespace {

// Reduce the stacked support vectors to a triangular lattice basis by
// exact integer row operations; returns the rank and, when the rank is
// full, the index of the generated subgroup in Z^d (product of pivots).
struct LatticeBasis {
    int rank;
    std::uint64_t index; // meaningful when rank == d
};

LatticeBasis lattice_of_rows(std::vector<LatticePoint> rows, int d) {
    int rank = 0;
    std::uint64_t index = 1;
    for (int col = 0; col < d && rank < static_cast<int>(rows.size()); ++col) {
        const std::size_t c = static_cast<std::size_t>(col);
        // Euclid over the column entries below the current pivot row until a
        // single nonzero pivot remains.
        for (;;) {
            int pivot = -1;
            for (std::size_t r = static_cast<std::size_t>(rank); r < rows.size(); ++r) {
                if (rows[r][c] == 0) continue;
                if (pivot < 0 || uabs(rows[r][c]) < uabs(rows[static_cast<std::size_t>(pivot)][c]))
                    pivot = static_cast<int>(r);
            }
            if (pivot < 0) break; // column empty below the pivot rows
            std::swap(rows[static_cast<std::size_t>(rank)], rows[static_cast<std::size_t>(pivot)]);
            const std::size_t pr = static_cast<std::size_t>(rank);
            bool cleared = true;
            for (std::size_t r = pr + 1; r < rows.size(); ++r) {
                if (rows[r][c] == 0) continue;
                const Coord q = rows[r][c] / rows[pr][c];
                for (std::size_t cc = 0; cc < static_cast<std::size_t>(d); ++cc)
                    rows[r][cc] = checked_add(rows[r][cc], checked_mul(-q, rows[pr][cc]));
                if (rows[r][c] != 0) cleared = false;
            }
            if (cleared) {
                index = checked_mul(static_cast<Coord>(index),
                                    static_cast<Coord>(uabs(rows[pr][c])));
                ++rank;
                break;
            }
        }
    }
    // A full-rank triangular basis has one pivot per column; the subgroup
    // index is the product of the pivots.
    return {rank, rank == d ? index : 0};
}

// Determinant of a k x k integer matrix by fraction-free (Bareiss)
// elimination in 128-bit arithmetic. Support coordinates are small.
__int128 det_bareiss(std::vector<std::vector<__int128>> m) {
    const std::size_t n = m.size();
    __int128 prev = 1;
    int sign = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (m[k][k] == 0) {
            std::size_t swap_row = k + 1;
            while (swap_row < n && m[swap_row][k] == 0) ++swap_row;
            if (swap_row == n) return 0;
            std::swap(m[k], m[swap_row]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j)
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            m[i][k] = 0;
        }
        prev = m[k][k];
    }
    return sign * m[n - 1][n - 1];
}

// The integer normal of the hyperplane spanned by d-1 independent rows:
// generalized cross product via signed cofactors.
std::vector<__int128> hyperplane_normal(const std::vector<LatticePoint>& rows, int d) {
    std::vector<__int128> normal(static_cast<std::size_t>(d), 0);
    for (int skip = 0; skip < d; ++skip) {
        std::vector<std::vector<__int128>> minor;
        minor.reserve(rows.size());
        for (const auto& row : rows) {
            std::vector<__int128> r;
            r.reserve(static_cast<std::size_t>(d) - 1);
            for (int c = 0; c < d; ++c)
                if (c != skip) r.push_back(row[static_cast<std::size_t>(c)]);
            minor.push_back(std::move(r));
        }
        const __int128 cof = minor.empty() ? 1 : det_bareiss(std::move(minor));
        normal[static_cast<std::size_t>(skip)] = (skip % 2 == 0) ? cof : -cof;
    }
    return normal;
}

// True iff the positive hull of the support is all of R^d, equivalently
// the origin is strictly interior to the convex hull. Exact: every facet
// of a full-dimensional pointed obstruction cone is spanned by d-1
// linearly independent support points, so it suffices to test the normals
// of all (d-1)-subsets.
bool origin_interior(const std::vector<WeightedPoint>& support, int d) {
    std::vector<LatticePoint> pts;
    for (const auto& wp : support) pts.push_back(wp.point);

    // Full linear span is necessary.
    {
        auto basis = lattice_of_rows(pts, d);
        if (basis.rank < d) return false;
    }

    const std::size_t n = pts.size();
    std::vector<LatticePoint> subset;
    auto test_combination = [&](const std::vector<std::size_t>& sel) -> bool {
        subset.clear();
        for (std::size_t i : sel) subset.push_back(pts[i]);
        const auto normal = hyperplane_normal(subset, d);
        bool zero = true;
        for (const auto& v : normal)
            if (v != 0) zero = false;
        if (zero) return true; // degenerate subset, no facet
        bool all_nonneg = true;
        bool all_nonpos = true;
        for (const auto& p : pts) {
            __int128 dot = 0;
            for (int c = 0; c < d; ++c)
                dot += normal[static_cast<std::size_t>(c)] * p[static_cast<std::size_t>(c)];
            if (dot > 0) all_nonpos = false;
            if (dot < 0) all_nonneg = false;
        }
        // A closed halfspace containing all support points is an
        // obstruction to the origin being interior.
        return !(all_nonneg || all_nonpos);
    };

    bool ok = true;
    std::vector<std::size_t> sel(static_cast<std::size_t>(d - 1));
    auto recurse = [&](auto&& self, std::size_t start, std::size_t depth) -> void {
        if (!ok) return;
        if (depth == sel.size()) {
            if (!test_combination(sel)) ok = false;
            return;
        }
        for (std::size_t i = start; i < n; ++i) {
            sel[depth] = i;
            self(self, i + 1, depth + 1);
        }
    };
    recurse(recurse, 0, 0);
    return ok;
}

} // namespace

GenerationResult generation_check(const StepDistribution& mu) {
    mu.validate_or_throw();
    const int d = mu.dim();
    std::vector<LatticePoint> rows;
    for (const auto& wp : mu.support()) rows.push_back(wp.point);
    const auto basis = lattice_of_rows(rows, d);
    if (basis.rank < d)
        return {GenerationVerdict::FailsGroup,
                "support spans a rank-" + std::to_string(basis.rank) + " sublattice of Z^" +
                    std::to_string(d)};
    if (basis.index != 1)
        return {GenerationVerdict::FailsGroup,
                "support generates an index-" + std::to_string(basis.index) + " sublattice"};
    if (origin_interior(mu.support(), d))
        return {GenerationVerdict::Generates,
                "group is Z^" + std::to_string(d) + " and 0 is interior to the support hull"};
    return {GenerationVerdict::Inconclusive,
            "group is Z^" + std::to_string(d) +
                " but 0 is not interior to the support hull; semigroup generation unresolved"};
}

bool torus_coverage_check(const StepDistribution& mu, std::uint64_t k) {
    mu.validate_or_throw();
    if (k < 2) throw std::invalid_argument("torus coverage requires k >= 2");
    const int d = mu.dim();
    std::uint64_t classes = 1;
    for (int i = 0; i < d; ++i) {
        if (classes > (1ULL << 22) / k)
            throw CapacityError("torus has too many residue classes (k^d cap)");
        classes *= k;
    }
    // Support residues.
    std::vector<std::vector<std::uint64_t>> residues;
    for (const auto& wp : mu.support()) {
        std::vector<std::uint64_t> r;
        for (Coord c : wp.point) {
            const std::int64_t m = c % static_cast<Coord>(k);
            r.push_back(static_cast<std::uint64_t>(m < 0 ? m + static_cast<Coord>(k) : m));
        }
        residues.push_back(std::move(r));
    }
    std::vector<char> visited(classes, 0);
    std::deque<std::uint64_t> queue;
    visited[0] = 1;
    queue.push_back(0);
    std::uint64_t count = 1;
    auto encode_step = [&](std::uint64_t code, const std::vector<std::uint64_t>& r) {
        std::uint64_t out = 0;
        std::uint64_t mult = 1;
        for (int i = 0; i < d; ++i) {
            const std::uint64_t digit = (code / mult) % k;
            out += ((digit + r[static_cast<std::size_t>(i)]) % k) * mult;
            mult *= k;
        }
        return out;
    };
    while (!queue.empty() && count < classes) {
        const std::uint64_t cur = queue.front();
        queue.pop_front();
        for (const auto& r : residues) {
            const std::uint64_t nxt = encode_step(cur, r);
            if (!visited[nxt]) {
                visited[nxt] = 1;
                ++count;
                queue.push_back(nxt);
            }
        }
    }
    return count == classes;
}

namespace {

StepDistribution signed_basis_measure(int d, const std::vector<std::uint64_t>& plus,
                                      const std::vector<std::uint64_t>& minus,
                                      std::uint64_t denom) {
    std::vector<WeightedPoint> support;
    for (int i = 0; i < d; ++i) {
        LatticePoint e(static_cast<std::size_t>(d), 0);
        e[static_cast<std::size_t>(i)] = 1;
        support.push_back({e, plus[static_cast<std::size_t>(i)]});
    }
    for (int i = 0; i < d; ++i) {
        LatticePoint e(static_cast<std::size_t>(d), 0);
        e[static_cast<std::size_t>(i)] = -1;
        support.push_back({e, minus[static_cast<std::size_t>(i)]});
    }
    StepDistribution mu(std::move(support), denom);
    mu.validate_or_throw();
    return mu;
}

} // namespace

StepDistribution eta1() {
    return signed_basis_measure(4, {13, 3, 35, 36}, {36, 30, 42, 5}, 200);
}

StepDistribution eta2() {
    return signed_basis_measure(6, {13, 3, 35, 36, 5, 42}, {16, 36, 4, 49, 36, 30}, 305);
}

StepDistribution eta3() {
    return signed_basis_measure(3, {11, 12, 8}, {9, 2, 9}, 51);
}

StepDistribution nu(int d) {
    if (d < 2) throw std::invalid_argument("nu requires dimension >= 2");
    return signed_basis_measure(d, std::vector<std::uint64_t>(static_cast<std::size_t>(d), 1),
                                std::vector<std::uint64_t>(static_cast<std::size_t>(d), 1),
                                2 * static_cast<std::uint64_t>(d));
}

StepDistribution named_measure(const std::string& name, int d) {
    if (name == "eta1") return eta1();
    if (name == "eta2") return eta2();
    if (name == "eta3") return eta3();
    if (name == "nu") return nu(d);
    throw std::invalid_argument("unknown measure '" + name + "' (expected eta1|eta2|eta3|nu)");
}

StepDistribution dirac(const LatticePoint& z) {
    StepDistribution mu({{z, 1}}, 1);
    return mu;
}

} // namespace primwalk
