#pragma once

#include <span>
#include <vector>

#include "kac/hierarchy.hpp"

namespace kac {

/// Cumulants kappa^n(e_1) of the one-particle energy law under the
/// Boltzmann-Kac evolution; values[n-1] holds order n.
struct OneParticleCumulants {
    double time = 0.0;
    std::vector<double> values;
    int max_order() const { return static_cast<int>(values.size()); }
};

/// d/dt kappa^n from the closed one-particle hierarchy: expectations over the
/// product measure drop every mixed block, so only single-variable clusters
/// survive and the rate depends on kappa^1..kappa^n alone.  The linear
/// coefficient of kappa^n is exactly -a_n.
double kinetic_rhs(int n, const OneParticleCumulants& cumulants);

struct KineticTrajectory {
    std::vector<double> times;
    std::vector<OneParticleCumulants> states;
    double dt = 0.0;
    double tolerance = 0.0;
};

KineticTrajectory integrate_kinetic(const OneParticleCumulants& initial, double t_end, double dt,
                                    double sample_dt);

/// Integrates the closed energy-moment hierarchy and verifies the normalized
/// moments Q_n(t) = E[e^n]/(C^{n-1}(n-1)!) stay below 1, with
/// C = max(2B, max_n 2^5 ln(n/2)/sqrt(n)).
struct MomentBoundReport {
    bool ok = true;
    double c_used = 0.0;
    double max_q = 0.0;            // worst Q_n(t) observed
    double first_violation_time = -1.0;
    int violating_order = 0;
    std::vector<double> final_moments;
};

MomentBoundReport moment_bound_check(std::span<const double> initial_moments, double B,
                                     double t_end, double dt);

/// Raw moment hierarchy trajectory (for cross-checks against the cumulant
/// integrator).
std::vector<std::vector<double>> integrate_moment_hierarchy(std::span<const double> initial_moments,
                                                            std::span<const double> sample_times,
                                                            double dt);

/// Side-by-side accuracy comparison: evolve the N-particle hierarchy, start the
/// kinetic hierarchy from the fully repeated cumulants at t0, and track
/// delta_{n,N}(T) plus the raw magnitudes of the non-fully-repeated cumulants.
struct AccuracyReport {
    long long N = 0;
    int n_star = 0;
    double t0 = 0.0;
    double alpha = 0.0;
    double c_fit = 0.0;  // smallest C with sup_T |delta_n| <= 2 (N-1)^{-alpha} C^{n^2} n!
    std::vector<double> T_grid;
    std::vector<std::vector<double>> delta;  // delta[n-1][ti]
    std::vector<std::pair<Classifier, std::vector<double>>> offdiagonal;  // |kappa_r| series
    double band(int n) const;  // 2 (N-1)^{-alpha} c_fit^{n^2} n!, reported not asserted
    double sup_delta(int n) const;
};

AccuracyReport accuracy_experiment(const CumulantState& initial, const HierarchyParams& params,
                                   double t0, double T_end, double dt, double sample_dt);

/// Default waiting time t0 = 4 c (n*-1) ln N, long enough for the chaotic
/// transient of order-n* cumulants to flatten before the comparison starts.
double default_t0(const HierarchyParams& params);

} // namespace kac
