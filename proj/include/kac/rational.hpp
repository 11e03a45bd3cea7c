#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include "kac/errors.hpp"

namespace kac {

// Exact arithmetic used for every operator and kernel coefficient.  Values are
// converted to double only when matrices / state vectors are assembled.
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline BigInt factorial(int n) {
    if (n < 0) throw domain_error("factorial: negative argument");
    BigInt f = 1;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

// (-1)!! = 0!! = 1
inline BigInt double_factorial(int n) {
    if (n < -1) throw domain_error("double_factorial: argument < -1");
    BigInt f = 1;
    for (int k = n; k >= 2; k -= 2) f *= k;
    return f;
}

inline BigInt binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    BigInt num = 1;
    for (int i = 0; i < k; ++i) num *= (n - i);
    return num / factorial(k);
}

// 2^e for signed exponent
inline Rational pow2(long e) {
    BigInt p = BigInt(1) << static_cast<unsigned>(e < 0 ? -e : e);
    return e >= 0 ? Rational(p) : Rational(1, p);
}

inline Rational rational_pow(const Rational& x, int e) {
    Rational r = 1;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

} // namespace kac
