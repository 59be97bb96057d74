#pragma once

#include <stdexcept>
#include <string>

namespace primwalk {

/// Coordinate arithmetic would leave the representable 64-bit range.
/// Raised instead of wrapping: a silent wraparound would corrupt every
/// downstream statistic.
class OverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

/// A state-space or support-size cap was exceeded (exact enumeration,
/// truncated chain construction, torus tables).
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterative solver did not reach its tolerance within the iteration
/// budget, or the linear system has no finite solution.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A bounded combinatorial search (covering word, prime search, BFS
/// rerouting) hit its configured cap. Signals the cap, not nonexistence.
class SearchLimitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace primwalk
