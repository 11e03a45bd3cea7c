#include "kac/kinetic.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace kac {

// ---------------------------------------------------------------------------
// Closed one-particle cumulant hierarchy
// ---------------------------------------------------------------------------

namespace {

// Expansion of d/dt kappa^n = 2 sum_l binom(n,l) sum_a C(l,a)
// <e_1^a e_2^{l-a} :e_1^{n-l}:> over the product measure: partitions with a
// mixed block vanish, every block must meet the plain part, and each block of
// size m contributes kappa^m.  Aggregated by the multiset of factor orders.
struct KineticExpansion {
    // terms[k]: coefficient and factor orders (sorted); single factor {n} is linear
    std::vector<std::pair<double, std::vector<int>>> terms;
};

KineticExpansion build_kinetic_expansion(int n) {
    std::map<std::vector<int>, Rational> acc;
    for (int l = 1; l <= n; ++l) {
        Rational bin = Rational(binomial(n, l));
        for (int a = 0; a <= l; ++a) {
            Rational w = 2 * bin * c_coeff(l, a);
            if (w == 0) continue;
            // positions: n-l wick (color 1), a plain (color 1), l-a plain (color 2)
            const int wick = n - l;
            const int total = n;
            std::vector<int> color(total), plain(total);
            for (int i = 0; i < total; ++i) {
                color[i] = (i < wick + a) ? 1 : 2;
                plain[i] = (i >= wick);
            }
            for_each_set_partition(total, [&](std::span<const int> rgs) {
                int nblocks = *std::max_element(rgs.begin(), rgs.end()) + 1;
                std::vector<int> sizes(nblocks, 0), colors(nblocks, 0), meets(nblocks, 0);
                for (int i = 0; i < total; ++i) {
                    ++sizes[rgs[i]];
                    if (colors[rgs[i]] == 0)
                        colors[rgs[i]] = color[i];
                    else if (colors[rgs[i]] != color[i])
                        colors[rgs[i]] = -1;  // mixed block: cross-cumulant vanishes
                    if (plain[i]) meets[rgs[i]] = 1;
                }
                for (int b = 0; b < nblocks; ++b)
                    if (colors[b] == -1 || !meets[b]) return;
                std::vector<int> orders(sizes);
                std::sort(orders.begin(), orders.end());
                acc[orders] += w;
            });
        }
    }
    KineticExpansion out;
    for (auto& [orders, coeff] : acc)
        if (coeff != 0) out.terms.emplace_back(to_double(coeff), orders);
    return out;
}

const KineticExpansion& kinetic_expansion(int n) {
    static std::map<int, std::unique_ptr<KineticExpansion>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, std::make_unique<KineticExpansion>(build_kinetic_expansion(n))).first;
    return *it->second;
}

} // namespace

double kinetic_rhs(int n, const OneParticleCumulants& cumulants) {
    if (n < 1) throw domain_error("kinetic_rhs: order must be positive");
    if (cumulants.max_order() < n)
        throw incomplete_input_error("kinetic_rhs: cumulants not populated up to order n");
    if (n == 1) return 0.0;  // mean energy is conserved
    const auto& exp = kinetic_expansion(n);
    double total = 0.0;
    for (const auto& [coeff, orders] : exp.terms) {
        double prod = coeff;
        for (int m : orders) prod *= cumulants.values[m - 1];
        total += prod;
    }
    return total;
}

KineticTrajectory integrate_kinetic(const OneParticleCumulants& initial, double t_end, double dt,
                                    double sample_dt) {
    if (dt <= 0.0) throw domain_error("integrate_kinetic: dt must be positive");
    const int n_star = initial.max_order();
    const long steps = static_cast<long>(std::ceil(t_end / dt - 1e-12));
    const long stride = std::max<long>(1, std::lround(sample_dt / dt));

    auto rhs = [&](const OneParticleCumulants& y, std::vector<double>& dy) {
        for (int n = 1; n <= n_star; ++n) dy[n - 1] = kinetic_rhs(n, y);
    };

    KineticTrajectory traj;
    traj.dt = dt;
    OneParticleCumulants y = initial;
    y.time = 0.0;
    traj.times.push_back(0.0);
    traj.states.push_back(y);

    std::vector<double> k1(n_star), k2(n_star), k3(n_star), k4(n_star);
    OneParticleCumulants tmp = y;
    double max_abs = 1.0;
    for (long step = 0; step < steps; ++step) {
        double h = std::min(dt, t_end - step * dt);
        rhs(y, k1);
        for (int i = 0; i < n_star; ++i) tmp.values[i] = y.values[i] + h / 2 * k1[i];
        rhs(tmp, k2);
        for (int i = 0; i < n_star; ++i) tmp.values[i] = y.values[i] + h / 2 * k2[i];
        rhs(tmp, k3);
        for (int i = 0; i < n_star; ++i) tmp.values[i] = y.values[i] + h * k3[i];
        rhs(tmp, k4);
        for (int i = 0; i < n_star; ++i)
            y.values[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        y.time = (step + 1 < steps) ? (step + 1) * dt : t_end;
        for (double v : y.values) {
            if (!std::isfinite(v))
                throw divergence_error("integrate_kinetic: non-finite value at t = " +
                                       std::to_string(y.time));
            max_abs = std::max(max_abs, std::abs(v));
        }
        if ((step + 1) % stride == 0 || step + 1 == steps) {
            traj.times.push_back(y.time);
            traj.states.push_back(y);
        }
    }
    traj.tolerance = std::max(1e-12, std::pow(dt, 4) * std::max(t_end, 1.0)) * max_abs;
    return traj;
}

// ---------------------------------------------------------------------------
// Moment hierarchy and propagation of exponential moments
// ---------------------------------------------------------------------------

namespace {

void moment_rhs(std::span<const double> e, std::vector<double>& de) {
    const int n_max = static_cast<int>(e.size());
    for (int n = 1; n <= n_max; ++n) {
        double lin = 2.0 * (2.0 * to_double(trig_integral(n, 0)) - 1.0) * e[n - 1];
        double quad = 0.0;
        for (int k = 1; k <= n - 1; ++k)
            quad += to_double(Rational(binomial(2 * n, 2 * k)) * trig_integral(n - k, k)) *
                    e[k - 1] * e[n - k - 1];
        de[n - 1] = lin + 2.0 * quad;
    }
}

} // namespace

std::vector<std::vector<double>> integrate_moment_hierarchy(std::span<const double> initial_moments,
                                                            std::span<const double> sample_times,
                                                            double dt) {
    const int n_max = static_cast<int>(initial_moments.size());
    std::vector<double> y(initial_moments.begin(), initial_moments.end());
    std::vector<double> k1(n_max), k2(n_max), k3(n_max), k4(n_max), tmp(n_max);
    std::vector<std::vector<double>> out;
    double t = 0.0;
    for (double t_sample : sample_times) {
        while (t < t_sample - 1e-12) {
            double h = std::min(dt, t_sample - t);
            moment_rhs(y, k1);
            for (int i = 0; i < n_max; ++i) tmp[i] = y[i] + h / 2 * k1[i];
            moment_rhs(tmp, k2);
            for (int i = 0; i < n_max; ++i) tmp[i] = y[i] + h / 2 * k2[i];
            moment_rhs(tmp, k3);
            for (int i = 0; i < n_max; ++i) tmp[i] = y[i] + h * k3[i];
            moment_rhs(tmp, k4);
            for (int i = 0; i < n_max; ++i) y[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
            for (double v : y)
                if (!std::isfinite(v))
                    throw divergence_error("integrate_moment_hierarchy: non-finite moment");
            t += h;
        }
        out.push_back(y);
    }
    return out;
}

MomentBoundReport moment_bound_check(std::span<const double> initial_moments, double B,
                                     double t_end, double dt) {
    const int n_max = static_cast<int>(initial_moments.size());
    if (n_max > 10) throw domain_error("moment_bound_check: n_max above 10");
    if (B <= 0.0) throw domain_error("moment_bound_check: B must be positive");

    MomentBoundReport report;
    double c_rule = 0.0;
    for (int n = 2; n <= 10000; ++n)
        c_rule = std::max(c_rule, 32.0 * std::log(n / 2.0) / std::sqrt(static_cast<double>(n)));
    report.c_used = std::max(2.0 * B, c_rule);

    std::vector<double> scale(n_max);
    for (int n = 1; n <= n_max; ++n)
        scale[n - 1] = std::pow(report.c_used, n - 1) * to_double(Rational(factorial(n - 1)));

    std::vector<double> y(initial_moments.begin(), initial_moments.end());
    std::vector<double> k1(n_max), k2(n_max), k3(n_max), k4(n_max), tmp(n_max);
    const long steps = static_cast<long>(std::ceil(t_end / dt - 1e-12));
    auto check = [&](double t) {
        for (int n = 1; n <= n_max; ++n) {
            double q = y[n - 1] / scale[n - 1];
            report.max_q = std::max(report.max_q, q);
            if (q > 1.0 + 1e-12 && report.ok) {
                report.ok = false;
                report.first_violation_time = t;
                report.violating_order = n;
            }
        }
    };
    check(0.0);
    for (long step = 0; step < steps; ++step) {
        double h = std::min(dt, t_end - step * dt);
        moment_rhs(y, k1);
        for (int i = 0; i < n_max; ++i) tmp[i] = y[i] + h / 2 * k1[i];
        moment_rhs(tmp, k2);
        for (int i = 0; i < n_max; ++i) tmp[i] = y[i] + h / 2 * k2[i];
        moment_rhs(tmp, k3);
        for (int i = 0; i < n_max; ++i) tmp[i] = y[i] + h * k3[i];
        moment_rhs(tmp, k4);
        for (int i = 0; i < n_max; ++i) y[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        check((step + 1) * dt);
    }
    report.final_moments = y;
    return report;
}

// ---------------------------------------------------------------------------
// Accuracy of the kinetic hierarchy against the N-particle hierarchy
// ---------------------------------------------------------------------------

double default_t0(const HierarchyParams& params) {
    return 4.0 * params.c * (params.n_star - 1) * std::log(static_cast<double>(params.N));
}

double AccuracyReport::band(int n) const {
    return 2.0 * std::pow(static_cast<double>(N - 1), -alpha) * std::pow(c_fit, n * n) *
           to_double(Rational(factorial(n)));
}

double AccuracyReport::sup_delta(int n) const {
    double sup = 0.0;
    for (double d : delta[n - 1]) sup = std::max(sup, std::abs(d));
    return sup;
}

AccuracyReport accuracy_experiment(const CumulantState& initial, const HierarchyParams& params,
                                   double t0, double T_end, double dt, double sample_dt) {
    params.validate();
    if (t0 < 0.0) throw domain_error("accuracy_experiment: t0 must be nonnegative");

    CumulantState at_t0 = initial;
    if (t0 > 0.0) {
        Trajectory warmup = integrate_hierarchy(initial, params, t0, dt, t0);
        at_t0 = warmup.states.back();
    }

    // kinetic initial data: the one-particle marginal's cumulants are the
    // fully repeated joint cumulants
    OneParticleCumulants k0;
    k0.values.resize(params.n_star);
    for (int n = 1; n <= params.n_star; ++n)
        k0.values[n - 1] = at_t0.value(n, Classifier(std::vector<int>{n}));

    Trajectory particle = integrate_hierarchy(at_t0, params, T_end, dt, sample_dt);
    KineticTrajectory kinetic = integrate_kinetic(k0, T_end, dt, sample_dt);
    if (particle.times.size() != kinetic.times.size())
        throw error("accuracy_experiment: sample grids misaligned");

    AccuracyReport report;
    report.N = params.N;
    report.n_star = params.n_star;
    report.t0 = t0;
    report.alpha = params.alpha;
    report.T_grid = particle.times;
    report.delta.assign(params.n_star, {});
    for (size_t ti = 0; ti < particle.times.size(); ++ti)
        for (int n = 1; n <= params.n_star; ++n)
            report.delta[n - 1].push_back(
                particle.states[ti].value(n, Classifier(std::vector<int>{n})) -
                kinetic.states[ti].values[n - 1]);

    for (int n = 2; n <= params.n_star; ++n) {
        const auto& basis = order_basis(n);
        for (int idx = 0; idx < basis.repeated_count(); ++idx) {
            if (basis.all[idx].length() == 1) continue;  // fully repeated handled above
            std::vector<double> series;
            series.reserve(particle.times.size());
            for (const auto& state : particle.states)
                series.push_back(std::abs(state.at(n, idx)));
            report.offdiagonal.emplace_back(basis.all[idx], std::move(series));
        }
    }

    for (int n = 2; n <= params.n_star; ++n) {
        double scaled = report.sup_delta(n) /
                        (2.0 * std::pow(static_cast<double>(params.N - 1), -params.alpha) *
                         to_double(Rational(factorial(n))));
        if (scaled > 0.0) report.c_fit = std::max(report.c_fit, std::pow(scaled, 1.0 / (n * n)));
    }
    return report;
}

} // namespace kac
