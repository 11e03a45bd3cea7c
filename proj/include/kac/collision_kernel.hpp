#pragma once

#include <vector>

#include "kac/rational.hpp"

namespace kac {

inline constexpr int kMaxTrigIntegralSum = 64;
inline constexpr int kMaxPowerExpansionDegree = 24;

/// I_{a,b} = (1/2pi) integral over (-pi,pi] of sin^{2a} cos^{2b}, exactly
/// (2a-1)!!(2b-1)!!/(2a+2b)!!.  Symmetric in (a,b).
Rational trig_integral(int a, int b, int max_sum = kMaxTrigIntegralSum);

/// Angle average of the energy collision polynomial power:
///   (1/2pi) int P_theta(v_i,v_j)^m dtheta  =  sum_a coeff[a] e_i^a e_j^{m-a}.
struct PowerExpansion {
    int degree = 0;
    std::vector<Rational> coeff;  // indexed by the e_i exponent a in [0, degree]
};

PowerExpansion p_power_expansion(int m, int max_degree = kMaxPowerExpansionDegree);

/// Same for Q_theta(v_j,v_i)^m as a polynomial in (e_i, e_j); equals the
/// P expansion with a <-> m-a swapped.
PowerExpansion q_power_expansion(int m, int max_degree = kMaxPowerExpansionDegree);

/// C(l,a): coefficient of e_1^a e_2^{l-a} in the angle average of P_theta^l,
/// computed from the closed-form factorial sum.  Must agree with
/// p_power_expansion(l).coeff[a]; both routes are kept and cross-checked.
Rational c_coeff(int l, int a);

/// a_n = 2(1 - 2 I_{n,0}); the damping rate of the fully repeated cumulant.
Rational a_n_coeff(int n);

/// beta_{n,N} = (3/2)(N+1-n)/(N-1): coupling of the non-repeated cumulant
/// into the (2,1,...,1) row of the repeated hierarchy.
Rational beta_coeff(int n, long long N);

} // namespace kac
