#pragma once

#include <span>
#include <vector>

#include "kac/partitions.hpp"
#include "kac/rational.hpp"

namespace kac {

// Initial-data cumulant generators for the hierarchy, plus the exact
// stationary law used to cross-check every stationary computation.

/// Exact joint energy moment under the uniform measure on the sphere of
/// radius sqrt(N): the normalized energies (e_i/N) are Dirichlet(1/2,...,1/2)
/// distributed, so for a multi-index q with distinct labels,
///   E[prod_i e_i^{q_i}] = N^{|q|} prod_i (1/2)_{q_i} / (N/2)_{|q|},
/// with rising factorials (x)_k.
Rational uniform_sphere_moment(long long N, const MultiIndex& q);

/// Exact joint energy cumulant of the classifier r under the uniform sphere
/// measure, by the signed partition sum over the moments above.
Rational uniform_sphere_cumulant(long long N, const Classifier& r);

/// Joint energy moments/cumulants of the symmetrized Dirac measure obtained
/// by permuting a fixed base vector of energies (sum = N).  Exact up to
/// double rounding in the power sums of the base.
double symmetrized_dirac_moment(std::span<const double> base_energies, const MultiIndex& q);
double symmetrized_dirac_cumulant(std::span<const double> base_energies, const Classifier& r);

/// Base velocity vectors for the symmetrized Dirac construction, rescaled to
/// |v|^2 = N.  "peak" concentrates all energy in one particle; the Gaussian
/// quantile base spreads it smoothly (a chaotic, c = 0 family).
std::vector<double> dirac_peak_base(long long N);
std::vector<double> dirac_gauss_quantile_base(long long N);

/// Energies of a base velocity vector.
std::vector<double> base_energies(std::span<const double> base_velocities);

/// Inverse standard normal CDF (Acklam rational approximation plus one
/// Halley refinement; ~1e-15 absolute over (0,1)).
double inverse_normal_cdf(double p);

} // namespace kac
