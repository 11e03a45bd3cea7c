#include "kac/initial_data.hpp"

#include <cmath>
#include <numeric>

#include "kac/errors.hpp"

namespace kac {

Rational uniform_sphere_moment(long long N, const MultiIndex& q) {
    if (N < 2) throw domain_error("uniform_sphere_moment: N must be at least 2");
    int total = 0;
    BigInt numer = 1;
    for (int qi : q) {
        if (qi < 0) throw domain_error("uniform_sphere_moment: negative exponent");
        total += qi;
        numer *= double_factorial(2 * qi - 1);  // (1/2)_k = (2k-1)!!/2^k
    }
    if (total == 0) return Rational(1);
    // N^n * prod (2q_i-1)!!/2^n  /  prod_{j<n} (N+2j)/2^n
    BigInt denom = 1;
    for (int j = 0; j < total; ++j) denom *= (N + 2 * j);
    BigInt npow = 1;
    for (int j = 0; j < total; ++j) npow *= N;
    return Rational(npow * numer, denom);
}

Rational uniform_sphere_cumulant(long long N, const Classifier& r) {
    LabelSequence target = canonical_label_sequence(r.parts());
    BlockLookup<Rational> moment = [N](const LabelSequence& labels) {
        Classifier c = Classifier::of_labels(labels);
        return uniform_sphere_moment(N, c.parts());
    };
    return moments_to_cumulants<Rational>(moment, target);
}

namespace {

// Sum over tuples of distinct indices of prod_a base[j_a]^{q_a}, via Moebius
// inversion on the merge lattice: sum over set partitions of the positions,
// each block contributing (-1)^{|A|-1}(|A|-1)! p_{sum of merged exponents},
// where p_m is the m-th power sum of the base energies.
double distinct_tuple_sum(std::span<const double> energies, const std::vector<int>& exps) {
    const int k = static_cast<int>(exps.size());
    int max_total = std::accumulate(exps.begin(), exps.end(), 0);
    std::vector<double> power_sum(max_total + 1, 0.0);
    for (int m = 1; m <= max_total; ++m)
        for (double e : energies) power_sum[m] += std::pow(e, m);

    double total = 0.0;
    for_each_set_partition(k, [&](std::span<const int> rgs) {
        int nblocks = *std::max_element(rgs.begin(), rgs.end()) + 1;
        double term = 1.0;
        for (int b = 0; b < nblocks; ++b) {
            int merged = 0, size = 0;
            for (int i = 0; i < k; ++i)
                if (rgs[i] == b) { merged += exps[i]; ++size; }
            double moebius = 1.0;
            for (int j = 1; j < size; ++j) moebius *= -j;
            term *= moebius * power_sum[merged];
        }
        total += term;
    });
    return total;
}

} // namespace

double symmetrized_dirac_moment(std::span<const double> base, const MultiIndex& q) {
    const long long N = static_cast<long long>(base.size());
    std::vector<int> exps;
    for (int qi : q)
        if (qi > 0) exps.push_back(qi);
    if (exps.empty()) return 1.0;
    const int k = static_cast<int>(exps.size());
    if (k > N) throw domain_error("symmetrized_dirac_moment: more labels than particles");
    double falling = 1.0;
    for (int j = 0; j < k; ++j) falling *= static_cast<double>(N - j);
    return distinct_tuple_sum(base, exps) / falling;
}

double symmetrized_dirac_cumulant(std::span<const double> base, const Classifier& r) {
    LabelSequence target = canonical_label_sequence(r.parts());
    BlockLookup<double> moment = [&base](const LabelSequence& labels) {
        Classifier c = Classifier::of_labels(labels);
        return symmetrized_dirac_moment(base, c.parts());
    };
    return moments_to_cumulants<double>(moment, target);
}

std::vector<double> dirac_peak_base(long long N) {
    std::vector<double> v(N, 0.0);
    v[0] = std::sqrt(static_cast<double>(N));
    return v;
}

std::vector<double> dirac_gauss_quantile_base(long long N) {
    std::vector<double> v(N);
    for (long long i = 0; i < N; ++i)
        v[i] = inverse_normal_cdf((static_cast<double>(i) + 0.5) / static_cast<double>(N));
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    double scale = std::sqrt(static_cast<double>(N) / norm2);
    for (double& x : v) x *= scale;
    return v;
}

std::vector<double> base_energies(std::span<const double> base_velocities) {
    std::vector<double> e(base_velocities.size());
    for (size_t i = 0; i < e.size(); ++i) e[i] = base_velocities[i] * base_velocities[i];
    return e;
}

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw domain_error("inverse_normal_cdf: p outside (0,1)");
    // Acklam's rational approximation.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    } else if (p <= 1 - plow) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
    } else {
        double q = std::sqrt(-2 * std::log(1 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    // One Halley step against the exact CDF via erfc.
    double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    x = x - u / (1.0 + x * u / 2.0);
    return x;
}

} // namespace kac
