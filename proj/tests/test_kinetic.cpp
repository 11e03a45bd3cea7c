#include <doctest.h>

#include <cmath>

#include "kac/initial_data.hpp"
#include "kac/kinetic.hpp"

using namespace kac;

namespace {

// cumulants of a chi-squared(1) energy: kappa^m = 2^{m-1} (m-1)!
// (the N -> infinity limit of the one-particle marginal on the sphere);
// validated below as a fixed point before any other use
OneParticleCumulants chi2_cumulants(int n_star) {
    OneParticleCumulants c;
    c.values.resize(n_star);
    double v = 1.0;
    for (int m = 1; m <= n_star; ++m) {
        c.values[m - 1] = v;
        v *= 2.0 * m;
    }
    return c;
}

} // namespace

TEST_CASE("kinetic rhs basic structure") {
    OneParticleCumulants c = chi2_cumulants(6);
    SUBCASE("order 1 conserves the mean energy") { CHECK(kinetic_rhs(1, c) == 0.0); }
    SUBCASE("linear coefficient is -a_n") {
        // perturb kappa^n and difference the rhs: the linear response is -a_n
        for (int n = 2; n <= 6; ++n) {
            OneParticleCumulants base = chi2_cumulants(6);
            double r0 = kinetic_rhs(n, base);
            OneParticleCumulants bumped = base;
            const double h = 1.0;
            bumped.values[n - 1] += h;
            double r1 = kinetic_rhs(n, bumped);
            double expect = -to_double(a_n_coeff(n));
            CHECK((r1 - r0) / h == doctest::Approx(expect).epsilon(1e-12));
        }
    }
    SUBCASE("closed lower-triangular structure: higher orders do not feed back") {
        OneParticleCumulants bumped = chi2_cumulants(6);
        bumped.values[5] += 100.0;  // kappa^6
        for (int n = 1; n <= 5; ++n)
            CHECK(kinetic_rhs(n, bumped) == doctest::Approx(kinetic_rhs(n, c)).epsilon(1e-13));
    }
    SUBCASE("chi-squared cumulants are a fixed point") {
        for (int n = 1; n <= 4; ++n) CHECK(std::abs(kinetic_rhs(n, c)) < 1e-8);
    }
    CHECK_THROWS_AS(kinetic_rhs(7, c), kac::incomplete_input_error);
}

TEST_CASE("kinetic integration") {
    SUBCASE("fixed point stays fixed and kappa^1 is constant") {
        OneParticleCumulants c0 = chi2_cumulants(4);
        auto traj = integrate_kinetic(c0, 5.0, 1e-3, 0.5);
        for (const auto& s : traj.states) {
            CHECK(s.values[0] == c0.values[0]);
            for (int n = 2; n <= 4; ++n)
                CHECK(std::abs(s.values[n - 1] - c0.values[n - 1]) < 1e-8);
        }
    }
    SUBCASE("order-2 closed form: relaxation at rate a_2 = 1/2") {
        OneParticleCumulants c0;
        c0.values = {1.0, 5.0};
        auto traj = integrate_kinetic(c0, 8.0, 1e-3, 0.25);
        // d kappa^2/dt = -1/2 kappa^2 + kappa1^2 with kappa1 frozen at 1
        for (size_t ti = 0; ti < traj.times.size(); ++ti) {
            double t = traj.times[ti];
            double expect = std::exp(-0.5 * t) * (5.0 - 2.0) + 2.0;
            CHECK(traj.states[ti].values[1] == doctest::Approx(expect).epsilon(1e-8));
            CHECK(traj.states[ti].values[0] == 1.0);
        }
    }
}

TEST_CASE("moment hierarchy") {
    SUBCASE("E[e] constant and unit moments stay bounded") {
        std::vector<double> init(8, 1.0);  // deterministic e = 1: E[e^n] = 1, B = 1
        auto report = moment_bound_check(init, 1.0, 20.0, 1e-3);
        CHECK(report.ok);
        CHECK(report.max_q <= 1.0 + 1e-12);
        CHECK(report.final_moments[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(report.c_used >= 2.0);
    }
    SUBCASE("moment and cumulant integrators agree through the conversion") {
        // start from the chi-squared law and integrate both representations
        const int n_max = 4;
        OneParticleCumulants c0;
        c0.values = {1.0, 1.5, 3.0, 10.0};  // an off-equilibrium state
        std::vector<double> sample_times;
        for (int i = 1; i <= 10; ++i) sample_times.push_back(0.3 * i);

        // initial moments from the cumulants
        std::map<LabelSequence, double> ctab;
        for (int m = 1; m <= n_max; ++m) ctab[LabelSequence(m, 1)] = c0.values[m - 1];
        std::vector<double> m0;
        for (int m = 1; m <= n_max; ++m)
            m0.push_back(cumulants_to_moments(ctab, LabelSequence(m, 1)));

        auto moment_traj = integrate_moment_hierarchy(m0, sample_times, 1e-3);
        auto cum_traj = integrate_kinetic(c0, 3.0, 1e-3, 0.3);
        REQUIRE(cum_traj.times.size() >= sample_times.size());
        // map sample times onto the cumulant trajectory grid
        for (size_t si = 0; si < sample_times.size(); ++si) {
            size_t ci = 0;
            while (ci < cum_traj.times.size() &&
                   std::abs(cum_traj.times[ci] - sample_times[si]) > 1e-9)
                ++ci;
            REQUIRE(ci < cum_traj.times.size());
            std::map<LabelSequence, double> ct;
            for (int m = 1; m <= n_max; ++m)
                ct[LabelSequence(m, 1)] = cum_traj.states[ci].values[m - 1];
            for (int m = 1; m <= n_max; ++m) {
                double from_cumulants = cumulants_to_moments(ct, LabelSequence(m, 1));
                double direct = moment_traj[si][m - 1];
                CHECK(std::abs(from_cumulants - direct) <=
                      1e-6 * std::max(1.0, std::abs(direct)));
            }
        }
    }
}

TEST_CASE("accuracy experiment") {
    const long long N = 64;
    HierarchyParams params{.N = N, .n_star = 3, .alpha = 0.5, .c = 0.0};
    CHECK(default_t0(params) == 0.0);
    CumulantState s0 = symmetrized_dirac_state(dirac_gauss_quantile_base(N), 3);
    auto report = accuracy_experiment(s0, params, 0.0, 5.0, 1e-3, 0.25);
    SUBCASE("delta vanishes at T = 0 and for n = 1 everywhere") {
        for (int n = 1; n <= 3; ++n)
            CHECK(std::abs(report.delta[n - 1][0]) < 1e-12);
        for (double d : report.delta[0]) CHECK(std::abs(d) < 1e-12);
    }
    SUBCASE("order-2 discrepancy is O(N^{-alpha}) and the fitted band covers it") {
        CHECK(report.sup_delta(2) > 0.0);
        // the N^{-alpha}-shaped envelope with C = 1 already covers the measured error
        double band_c1 = 2.0 * std::pow(static_cast<double>(N - 1), -0.5) * 2.0;
        CHECK(report.sup_delta(2) < band_c1);
        CHECK(report.c_fit > 0.0);
        for (int n = 2; n <= 3; ++n)
            CHECK(report.sup_delta(n) <= report.band(n) * (1 + 1e-12));
    }
    SUBCASE("off-diagonal classifiers are tracked") {
        CHECK(!report.offdiagonal.empty());
        for (const auto& [r, series] : report.offdiagonal) {
            CHECK(r.length() > 1);
            CHECK(series.size() == report.T_grid.size());
        }
    }
}

TEST_CASE("delta_2 approaches its band at rate at least 1/2") {
    // Start the N-particle hierarchy at its fixed point; the kinetic side then
    // relaxes toward the chi-squared values at exactly a_2 = 1/2, so delta_2
    // approaches its limit at that rate.
    const long long N = 64;
    HierarchyParams params{.N = N, .n_star = 2, .alpha = 0.5, .c = 0.0};
    CumulantState s0 = stationary_state(2, N);
    auto report = accuracy_experiment(s0, params, 0.0, 20.0, 1e-3, 0.1);
    // kappa^2 relaxes to 2 kappa_1^2 = 2, so delta_2 tends to kappa-bar[(2)] - 2
    double limit = s0.value(2, Classifier({2})) - 2.0;
    double rate = decay_rate_fit(report.T_grid, report.delta[1], limit, 1e-9);
    CHECK(rate >= 0.5 * (1 - 0.02));
    CHECK(rate <= 0.5 * (1 + 0.02));
}

TEST_CASE("accuracy experiment with waiting time") {
    const long long N = 32;
    HierarchyParams params{.N = N, .n_star = 2, .alpha = 0.5, .c = 1.0};
    CHECK(default_t0(params) == doctest::Approx(4.0 * std::log(32.0)));
    CumulantState s0 = symmetrized_dirac_state(dirac_peak_base(N), 2);
    auto report = accuracy_experiment(s0, params, 2.0, 3.0, 1e-3, 0.5);
    CHECK(report.t0 == 2.0);
    CHECK(std::abs(report.delta[1][0]) < 1e-12);  // matched at T = 0 by construction
    CHECK(report.sup_delta(1) < 1e-12);
}
