#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "primwalk/errors.hpp"

namespace primwalk {

using Coord = std::int64_t;

/// A point of Z^d, d >= 2. All arithmetic is exact; operations that would
/// leave the 64-bit range throw OverflowError.
using LatticePoint = std::vector<Coord>;

/// A finite prefix of an infinite step sequence.
using StepSequence = std::vector<LatticePoint>;

std::string to_string(const LatticePoint& z);
LatticePoint parse_point(const std::string& text);

Coord checked_add(Coord a, Coord b);
Coord checked_mul(Coord a, Coord b);

/// |c| as an unsigned value; well defined for INT64_MIN.
inline std::uint64_t uabs(Coord c) {
    return c < 0 ? ~static_cast<std::uint64_t>(c) + 1 : static_cast<std::uint64_t>(c);
}

/// gcd of the coordinate absolute values, with gcd(0,...,0) = 1.
std::uint64_t gcd_vec(const LatticePoint& z);

/// z / gcd_vec(z). The zero vector maps to itself. Idempotent.
LatticePoint normalize(LatticePoint z);

bool is_primitive(const LatticePoint& z);

/// k does not divide gcd(z). The zero vector is coprime to every k
/// (gcd convention). Requires k >= 2.
bool is_coprime_to(const LatticePoint& z, std::uint64_t k);

/// Selects the walk variant: divide out the whole gcd, or only powers of
/// a fixed k >= 2.
class WalkMode {
public:
    static WalkMode full_gcd() { return WalkMode(0); }
    static WalkMode coprime_to(std::uint64_t k);

    bool is_full() const { return k_ == 0; }
    std::uint64_t k() const { return k_; }

    bool valid_state(const LatticePoint& z) const;
    std::string label() const;

    bool operator==(const WalkMode&) const = default;

private:
    explicit WalkMode(std::uint64_t k) : k_(k) {}
    std::uint64_t k_;
};

/// The gcd-normalized step: (a + z) / gcd(a + z). z must be primitive.
LatticePoint hat_plus(const LatticePoint& a, const LatticePoint& z);

struct KStepResult {
    LatticePoint point;
    std::uint32_t power; // largest p with k^p dividing every coordinate of a+z
};

/// The k-power step: (a + z) / k^p with p maximal. z must be coprime to k.
/// When a + z = 0 the image is the zero vector with p = 0 (the maximal p
/// is unbounded there; the zero vector is coprime to every k, so this
/// keeps the map inside the state space).
KStepResult hat_plus_k(const LatticePoint& a, const LatticePoint& z, std::uint64_t k);

/// Dispatch over the two step maps.
LatticePoint step(const WalkMode& mode, const LatticePoint& a, const LatticePoint& z);

struct StepOutcome {
    std::uint64_t divisor; // gcd divided out (full mode) or k^p (k mode); 1 = no division
    std::uint32_t power;   // p for k mode, 1/0 for full mode
};

/// In-place step for hot loops; z becomes the next state.
StepOutcome apply_step(const WalkMode& mode, const LatticePoint& a, LatticePoint& z);

struct NonActionWitness {
    LatticePoint a1, a2, z;
    LatticePoint sequential; // a1 ^+ (a2 ^+ z)
    LatticePoint combined;   // (a1 + a2) ^+ z
};

/// Exhaustive search over coordinates in [-bound, bound] for a triple with
/// a1 ^+ (a2 ^+ z) != (a1 + a2) ^+ z, demonstrating that the step map is
/// not an action. Returns nullopt if no witness exists within the bound.
std::optional<NonActionWitness> non_action_witness(int d, Coord bound);

/// Steps from {+-e_1, ..., +-e_d} whose hat_plus replay from the origin ends
/// at x, with every intermediate point primitive. The only step at which a
/// division can occur is the final one of the d = 2 construction.
///
/// d = 2 uses a prime p = n*x2 + 1 (deterministic Miller-Rabin, at most
/// prime_search_limit candidates n); d >= 3 routes through points whose
/// coordinates 2..d are coprime, with a bounded BFS detour through
/// primitive points when the target needs adjusting first.
StepSequence connect_to_zero(const LatticePoint& x,
                             std::uint64_t prime_search_limit = 1'000'000);

/// Replay a step sequence from the origin; returns every position
/// (excluding the origin itself).
std::vector<LatticePoint> replay_path(const StepSequence& steps, int d);

bool is_prime_u64(std::uint64_t n);

} // namespace primwalk
