#include "kac/collision_kernel.hpp"

#include <map>
#include <mutex>

#include "kac/errors.hpp"

namespace kac {

Rational trig_integral(int a, int b, int max_sum) {
    if (a < 0 || b < 0) throw domain_error("trig_integral: negative exponent");
    if (a + b > max_sum)
        throw size_error("trig_integral: a+b exceeds maximum " + std::to_string(max_sum));

    static std::map<std::pair<int, int>, Rational> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_pair(a, b);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    Rational v(double_factorial(2 * a - 1) * double_factorial(2 * b - 1),
               double_factorial(2 * (a + b)));
    cache.emplace(key, v);
    return v;
}

PowerExpansion p_power_expansion(int m, int max_degree) {
    if (m < 1) throw domain_error("p_power_expansion: degree must be positive");
    if (m > max_degree)
        throw size_error("p_power_expansion: degree exceeds maximum " +
                         std::to_string(max_degree));
    PowerExpansion out;
    out.degree = m;
    out.coeff.assign(m + 1, Rational(0));
    // Multinomial expansion of (-sin^2 e_i + 2 cos sin v_i v_j + sin^2 e_j)^m.
    // Odd powers of the cross term integrate to zero; an even cross power h
    // contributes e_i^{h/2} e_j^{h/2} and the angle factor I_{m-h/2, h/2}.
    for (int k = 0; k <= m; ++k) {
        for (int h = 0; k + h <= m; h += 2) {
            int ei_exp = k + h / 2;
            Rational w(factorial(m), factorial(k) * factorial(h) * factorial(m - k - h));
            w *= pow2(h);
            if (k % 2) w = -w;
            w *= trig_integral(m - h / 2, h / 2);
            out.coeff[ei_exp] += w;
        }
    }
    return out;
}

PowerExpansion q_power_expansion(int m, int max_degree) {
    PowerExpansion p = p_power_expansion(m, max_degree);
    PowerExpansion out;
    out.degree = m;
    out.coeff.assign(m + 1, Rational(0));
    for (int a = 0; a <= m; ++a) out.coeff[a] = p.coeff[m - a];
    return out;
}

Rational c_coeff(int l, int a) {
    if (l < 1) throw domain_error("c_coeff: l must be positive");
    if (a < 0 || a > l) throw domain_error("c_coeff: a out of [0, l]");
    Rational total = 0;
    for (int l1 = std::max(0, 2 * a - l); l1 <= a; ++l1) {
        Rational term = pow2(2 * a - 2 * l1 - 2 * l);
        term *= Rational(factorial(2 * l + 2 * l1 - 2 * a),
                         factorial(l + l1 - 2 * a) * factorial(l1) * factorial(a - l1) *
                             factorial(l - a + l1));
        if (l1 % 2) term = -term;
        total += term;
    }
    return total;
}

Rational a_n_coeff(int n) {
    if (n < 1) throw domain_error("a_n_coeff: n must be positive");
    return 2 * (1 - 2 * trig_integral(n, 0));
}

Rational beta_coeff(int n, long long N) {
    if (n < 2) throw domain_error("beta_coeff: n must be at least 2");
    if (n > N) throw domain_error("beta_coeff: n exceeds particle count");
    return Rational(3, 2) * Rational(N + 1 - n, N - 1);
}

} // namespace kac
