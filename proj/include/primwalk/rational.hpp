#pragma once

#include <cstdint>
#include <compare>
#include <string>

#include "primwalk/errors.hpp"

namespace primwalk {

/// Exact rational on 128-bit integers. Enough headroom for n-step
/// transition probabilities with denominators up to denom^n ~ 10^36;
/// anything beyond raises OverflowError rather than losing exactness.
class Rational {
public:
    using Int = __int128;

    Rational() : num_(0), den_(1) {}
    Rational(std::int64_t n) : num_(n), den_(1) {}
    Rational(Int num, Int den) : num_(num), den_(den) { reduce(); }

    static Rational ratio(std::uint64_t num, std::uint64_t den) {
        return Rational(static_cast<Int>(num), static_cast<Int>(den));
    }

    Int num() const { return num_; }
    Int den() const { return den_; }

    bool is_zero() const { return num_ == 0; }

    Rational operator+(const Rational& o) const {
        // a/b + c/d with cross reduction g = gcd(b, d).
        const Int g = gcd128(den_, o.den_);
        const Int b1 = den_ / g;
        const Int d1 = o.den_ / g;
        const Int lhs = checked_mul(num_, d1);
        const Int rhs = checked_mul(o.num_, b1);
        return Rational(checked_add(lhs, rhs), checked_mul(den_, d1));
    }

    Rational operator-(const Rational& o) const {
        return *this + Rational(-o.num_, o.den_);
    }

    Rational operator*(const Rational& o) const {
        const Int g1 = gcd128(abs128(num_), o.den_);
        const Int g2 = gcd128(abs128(o.num_), den_);
        return Rational(checked_mul(num_ / g1, o.num_ / g2),
                        checked_mul(den_ / g2, o.den_ / g1));
    }

    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }

    bool operator==(const Rational& o) const {
        return num_ == o.num_ && den_ == o.den_;
    }
    std::strong_ordering operator<=>(const Rational& o) const {
        // Cross-multiplied comparison; overflow-checked.
        const Int lhs = checked_mul(num_, o.den_);
        const Int rhs = checked_mul(o.num_, den_);
        if (lhs < rhs) return std::strong_ordering::less;
        if (lhs > rhs) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    double to_double() const {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }
    long double to_long_double() const {
        return static_cast<long double>(num_) / static_cast<long double>(den_);
    }

    std::string str() const {
        if (den_ == 1) return int_to_string(num_);
        return int_to_string(num_) + "/" + int_to_string(den_);
    }

    static std::string int_to_string(Int v) {
        if (v == 0) return "0";
        const bool neg = v < 0;
        unsigned __int128 u = neg ? (~static_cast<unsigned __int128>(v) + 1)
                                  : static_cast<unsigned __int128>(v);
        std::string out;
        while (u != 0) {
            out.insert(out.begin(), static_cast<char>('0' + static_cast<int>(u % 10)));
            u /= 10;
        }
        if (neg) out.insert(out.begin(), '-');
        return out;
    }

private:
    static Int abs128(Int v) { return v < 0 ? -v : v; }

    static Int gcd128(Int a, Int b) {
        a = abs128(a);
        b = abs128(b);
        while (b != 0) {
            const Int t = a % b;
            a = b;
            b = t;
        }
        return a == 0 ? 1 : a;
    }

    static Int checked_add(Int a, Int b) {
        Int r;
        if (__builtin_add_overflow(a, b, &r))
            throw OverflowError("rational addition overflows 128 bits");
        return r;
    }
    static Int checked_mul(Int a, Int b) {
        Int r;
        if (__builtin_mul_overflow(a, b, &r))
            throw OverflowError("rational multiplication overflows 128 bits");
        return r;
    }

    void reduce() {
        if (den_ == 0) throw std::invalid_argument("rational with zero denominator");
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        const Int g = gcd128(num_, den_);
        num_ /= g;
        den_ /= g;
    }

    Int num_;
    Int den_;
};

} // namespace primwalk
