#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "kac/collision_kernel.hpp"
#include "kac/partitions.hpp"

namespace kac {

struct HierarchyParams {
    long long N = 2;     // particle count
    int n_star = 2;      // maximal cumulant order
    double alpha = 0.5;  // chaos-norm exponent in (0,1)
    double c = 0.0;      // chaos-bound exponent >= 0

    void validate() const {
        if (N < 2) throw domain_error("HierarchyParams: N must be at least 2");
        if (n_star < 1) throw domain_error("HierarchyParams: n_star must be positive");
        if (2 * n_star > N) throw domain_error("HierarchyParams: n_star must satisfy n_star <= N/2");
        if (!(alpha > 0.0 && alpha < 1.0)) throw domain_error("HierarchyParams: alpha outside (0,1)");
        if (c < 0.0) throw domain_error("HierarchyParams: c must be nonnegative");
    }
};

/// Canonical classifier basis of one order; enumeration order is
/// lexicographically decreasing, so 1_n is always the last entry.
struct ClassifierBasis {
    int order = 0;
    std::vector<Classifier> all;  // C_n
    int index_of(const Classifier& r) const;
    int nonrepeated_index() const { return static_cast<int>(all.size()) - 1; }
    int repeated_count() const { return static_cast<int>(all.size()) - 1; }
};

const ClassifierBasis& order_basis(int n);

/// Joint energy cumulants per order, indexed by the canonical basis of each
/// order.  Order-1 (index 0 in values[0]) is the conserved mean energy.
struct CumulantState {
    double time = 0.0;
    std::vector<std::vector<double>> values;  // values[n-1] over order_basis(n).all

    static CumulantState zeros(int n_star);
    int max_order() const { return static_cast<int>(values.size()); }
    double at(int order, int index) const { return values[order - 1][index]; }
    double& at(int order, int index) { return values[order - 1][index]; }
    double value(int order, const Classifier& r) const;
    double nonrepeated(int order) const;
    double& nonrepeated(int order);
};

CumulantState uniform_sphere_state(int n_star, long long N);
CumulantState symmetrized_dirac_state(std::span<const double> base_velocities, int n_star);

/// Linear part of the order-n repeated hierarchy over C'_n, split into the
/// N-independent main matrix and the O(1/(N-1)) perturbation, plus the
/// coupling of the non-repeated cumulant into the (2,1,...,1) row and the
/// cached nonlinear terms (products of lower-order cumulants).
struct HierarchyOperator {
    int order = 0;
    long long N = 0;
    std::vector<Classifier> repeated;  // C'_n, same index order as order_basis(n).all
    Eigen::MatrixXd m_main;            // M_n
    Eigen::MatrixXd r_pert;            // R_{n,N}
    int source_row = -1;               // row of (2,1,...,1)
    double source_coeff = 0.0;         // beta_{n,N}

    struct Term {
        double coeff;
        std::vector<std::pair<int, int>> factors;  // (order, basis index), all orders < n
    };
    std::vector<std::vector<Term>> nonlinear;  // per repeated row
};

HierarchyOperator build_linear_operator(int n, long long N);

/// Cached-operator evaluation of the nonlinear source at order n.
std::vector<double> nonlinear_term(int n, const CumulantState& state, long long N);

double dissipation_coeff(int n, long long N);  // D_{n,N}; D_{1,N} = 0
double a_mn_coeff(int m, int n);               // A_{m,n} = 2(n-2)!/((m-1)!(n-m-1)!)

/// d/dt of the order-n non-repeated cumulant given kappa^nr_1..kappa^nr_n
/// (nr_values[m-1] = order m).
double nonrepeated_rhs(int n, std::span<const double> nr_values, long long N);

/// h^alpha_n = (-1)^{n-1} (N-1)^{alpha(n-1)} / (n-1)! * kappa^nr_n, and back.
std::vector<double> rescale_h(std::span<const double> nr_values, double alpha, long long N);
std::vector<double> rescale_h_inverse(std::span<const double> h_values, double alpha, long long N);

/// Stationary rescaled non-repeated cumulants h-bar_1..h-bar_{n_max} from the
/// quadratic recursion.
std::vector<double> stationary_nonrepeated(int n_max, long long N);

/// a_n = 2^n/(4(2n-1)) (2n)!/(n!)^2 = 2^{n-1} Catalan(n-1), majorizing |h-bar_n|.
Rational catalan_majorant(int n);

/// Stationary repeated cumulants at order n given all lower orders (solves
/// the linear system with the nonlinear and non-repeated sources frozen).
std::vector<double> stationary_repeated(int n, long long N, const CumulantState& lower);

/// Full stationary state assembled order by order up to n_star.
CumulantState stationary_state(int n_star, long long N);

struct Trajectory {
    std::vector<double> times;
    std::vector<CumulantState> states;
    double dt = 0.0;
    double tolerance = 0.0;  // effective accuracy estimate for downstream checks
};

/// Classical fixed-step 4th order integration of the coupled hierarchy:
/// the closed non-repeated subsystem plus, per order, the repeated linear
/// operator, nonlinear source and non-repeated coupling.  States are sampled
/// every sample_dt (and at t_end).
Trajectory integrate_hierarchy(const CumulantState& initial, const HierarchyParams& params,
                               double t_end, double dt, double sample_dt);

struct AlphaNormReport {
    int order = 0;
    double norm = 0.0;
    std::vector<std::pair<Classifier, double>> weighted;  // |kappa_r| (N-1)^{alpha(len-1)}
};

/// Weighted supremum over C'_n: max |kappa_r| (N-1)^{alpha(len(r)-1)}.
AlphaNormReport alpha_norm(std::span<const double> repeated_values, double alpha, int n,
                           long long N);

/// Induced alpha-operator norm of exp(t M) on the weighted-sup space at each
/// grid time (max absolute row sums after diagonal weight conjugation).
std::vector<double> semigroup_norm_curve(const Eigen::MatrixXd& m,
                                         const std::vector<Classifier>& repeated, double alpha,
                                         long long N, std::span<const double> t_grid);

/// Smallest particle count for which the 10 e^{-t/2} envelope of exp(t M_n)
/// is guaranteed: the least N_0 with 80 n* 5^{n*} / N_0^alpha <= 9.
long long semigroup_threshold_n0(int n_star, double alpha);

/// Least-squares exponential rate of |value - floor| over the largest
/// contiguous suffix of samples above 10x the integration tolerance.
double decay_rate_fit(std::span<const double> times, std::span<const double> values, double floor,
                      double tolerance = 1e-8);

namespace detail {

// Mechanically generated expansion of the order-n evolution, kept per row of
// the full basis (including 1_n, which the integrator handles through the
// closed non-repeated formula but tests check against the raw expansion).
struct SymbolicTerm {
    Rational coeff;
    std::vector<std::pair<int, Classifier>> factors;  // sorted; (order, classifier)
};
struct SymbolicRow {
    Classifier s;
    int len = 0;
    std::vector<SymbolicTerm> brk, fuse, ex;
};
struct SymbolicOrder {
    int n = 0;
    std::vector<SymbolicRow> rows;  // aligned with order_basis(n).all
};

const SymbolicOrder& symbolic_order(int n);

/// Direct evaluation of the mechanically generated T(s) for any row of the
/// full basis (linear and nonlinear parts together, N prefactors applied).
double evaluate_row_rhs(int n, int row_index, const CumulantState& state, long long N);

const HierarchyOperator& cached_operator(int n, long long N);

} // namespace detail

} // namespace kac
