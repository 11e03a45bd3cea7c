#include <doctest.h>

#include <cmath>
#include <sstream>

#include "kac/initial_data.hpp"
#include "kac/io.hpp"
#include "kac/simulator.hpp"

using namespace kac;

TEST_CASE("philox reference vectors") {
    // published known-answer vectors for philox4x32-10
    auto zero = SeededRng::philox_block({0, 0, 0, 0}, {0, 0});
    CHECK(zero == std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    auto ones = SeededRng::philox_block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                        {0xffffffffu, 0xffffffffu});
    CHECK(ones == std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    auto pi = SeededRng::philox_block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                      {0xa4093822u, 0x299f31d0u});
    CHECK(pi == std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("seeded rng determinism and stream independence") {
    SeededRng a(42, 7), b(42, 7), c(42, 8);
    bool streams_differ = false;
    for (int i = 0; i < 100; ++i) {
        auto x = a.next_u64();
        CHECK(x == b.next_u64());
        if (x != c.next_u64()) streams_differ = true;
    }
    CHECK(streams_differ);
    for (int i = 0; i < 1000; ++i) {
        double u = a.next_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    for (int i = 0; i < 1000; ++i) {
        double t = a.next_angle();
        CHECK(t > -M_PI - 1e-15);
        CHECK(t <= M_PI);
    }
}

TEST_CASE("collision step") {
    ParticleState s;
    s.v = {1.0, 2.0, -3.0, 1.0 + std::sqrt(2.0)};  // any vector works for the rotation itself
    SUBCASE("theta = 0 is the identity") {
        ParticleState before = s;
        collision_step(s, {0, 2, 0.0});
        for (size_t i = 0; i < s.v.size(); ++i) CHECK(s.v[i] == before.v[i]);
    }
    SUBCASE("pair energy and total energy are preserved") {
        SeededRng rng(1, 1);
        double total = s.total_energy();
        for (int rep = 0; rep < 1000; ++rep) {
            int i = static_cast<int>(rng.next_below(4));
            int j = static_cast<int>(rng.next_below(3));
            if (j >= i) ++j;
            double pair = s.energy(i) + s.energy(j);
            collision_step(s, {i, j, rng.next_angle()});
            CHECK(s.energy(i) + s.energy(j) == doctest::Approx(pair).epsilon(1e-12));
            CHECK(s.total_energy() == doctest::Approx(total).epsilon(1e-12));
        }
    }
    SUBCASE("equal indices are rejected") {
        CHECK_THROWS_AS(collision_step(s, {1, 1, 0.3}), kac::domain_error);
    }
}

TEST_CASE("uniform sphere sampler") {
    const long long N = 24;
    SeededRng rng(2024, 0);
    for (int rep = 0; rep < 50; ++rep) {
        ParticleState s = sample_uniform_sphere(N, rng);
        CHECK(s.total_energy() == doctest::Approx(static_cast<double>(N)).epsilon(1e-12));
    }
    const int samples = 100000;
    double sum_e = 0.0, sum_e2 = 0.0, sum_cross = 0.0;
    for (int rep = 0; rep < samples; ++rep) {
        ParticleState s = sample_uniform_sphere(N, rng);
        sum_e += s.energy(0);
        sum_e2 += s.energy(0) * s.energy(0);
        sum_cross += s.energy(0) * s.energy(1);
    }
    double m1 = sum_e / samples, m2 = sum_e2 / samples, m11 = sum_cross / samples;
    double expect_m2 = 3.0 * N / (N + 2.0);
    CHECK(std::abs(m1 - 1.0) < 3.0 * std::sqrt(2.0 / samples));
    CHECK(std::abs(m2 - expect_m2) < 3.0 * std::sqrt(24.0 / samples));
    double kappa11 = m11 - m1 * m1;
    CHECK(std::abs(kappa11 - (-2.0 / (N + 2))) < 3.0 * std::sqrt(2.0 / samples));
}

TEST_CASE("symmetrized dirac sampler") {
    const long long N = 16;
    SeededRng rng(7, 3);
    SUBCASE("peak base covariances") {
        auto base = dirac_peak_base(N);
        const int samples = 60000;
        double s11 = 0.0, s12 = 0.0;
        for (int rep = 0; rep < samples; ++rep) {
            ParticleState s = sample_symmetrized_dirac(base, rng);
            s11 += s.energy(0) * s.energy(0);
            s12 += s.energy(0) * s.energy(1);
        }
        double var = s11 / samples - 1.0, cov = s12 / samples - 1.0;
        CHECK(std::abs(var - (N - 1.0)) < 3.0 * N * std::sqrt(1.0 * N) / std::sqrt(samples));
        CHECK(std::abs(cov - (-1.0)) < 3.0 * N / std::sqrt(samples));
    }
    SUBCASE("constant base is deterministic") {
        std::vector<double> base(N, 1.0);
        ParticleState s = sample_symmetrized_dirac(base, rng);
        for (double x : s.v) CHECK(x == 1.0);
    }
    SUBCASE("off-sphere base is rejected") {
        std::vector<double> base(N, 1.1);
        CHECK_THROWS_AS(sample_symmetrized_dirac(base, rng), kac::domain_error);
    }
}

TEST_CASE("simulate: basic contracts") {
    const long long N = 16;
    SeededRng rng(99, 0);
    ParticleState initial = sample_uniform_sphere(N, rng);
    SUBCASE("t = 0 returns the initial state") {
        std::vector<double> times{0.0};
        auto snaps = simulate(initial, times, rng);
        REQUIRE(snaps.size() == 1);
        for (long long i = 0; i < N; ++i) CHECK(snaps[0].v[i] == initial.v[i]);
    }
    SUBCASE("identical seeds give identical trajectories") {
        std::vector<double> times{0.5, 1.0, 2.0};
        SeededRng r1(5, 17), r2(5, 17);
        auto s1 = simulate(initial, times, r1);
        auto s2 = simulate(initial, times, r2);
        for (size_t ti = 0; ti < times.size(); ++ti)
            for (long long i = 0; i < N; ++i) CHECK(s1[ti].v[i] == s2[ti].v[i]);
    }
    SUBCASE("event count matches rate N per unit time") {
        const int replicas = 3000;
        const double t = 2.0;
        double total_events = 0.0;
        for (int rep = 0; rep < replicas; ++rep) {
            SeededRng r(31, static_cast<std::uint64_t>(rep));
            SimulateStats stats;
            std::vector<double> times{t};
            simulate(initial, times, r, &stats);
            total_events += static_cast<double>(stats.events);
        }
        double mean = total_events / replicas;
        double expect = static_cast<double>(N) * t;  // Poisson(N t)
        CHECK(std::abs(mean - expect) < 3.0 * std::sqrt(expect / replicas));
    }
    SUBCASE("unsorted sample times are rejected") {
        std::vector<double> times{1.0, 0.5};
        SeededRng r(1, 0);
        CHECK_THROWS_AS(simulate(initial, times, r), kac::domain_error);
    }
    SUBCASE("energy conservation along trajectories") {
        std::vector<double> times{1.0, 5.0, 10.0};
        SeededRng r(77, 1);
        SimulateStats stats;
        auto snaps = simulate(initial, times, r, &stats);
        for (const auto& s : snaps)
            CHECK(std::abs(s.total_energy() / static_cast<double>(N) - 1.0) <= 1e-9);
    }
}

TEST_CASE("estimate_cumulants on synthetic ensembles") {
    const long long N = 16;
    SUBCASE("uniform sphere ensemble matches the exact stationary cumulants") {
        SeededRng rng(2025, 0);
        std::vector<ParticleState> replicas;
        for (int rep = 0; rep < 4000; ++rep) replicas.push_back(sample_uniform_sphere(N, rng));
        SeededRng est_rng(1, 0);
        auto est = estimate_cumulants(replicas, 3, 6, est_rng);
        CHECK(est.n_replicas == 4000);
        for (const auto& entry : est.entries) {
            double oracle = to_double(uniform_sphere_cumulant(N, entry.classifier));
            CHECK(std::abs(entry.cumulant - oracle) <=
                  3.0 * std::max(entry.stderr_jackknife, 1e-12));
            if (entry.classifier.order() > 1) CHECK(entry.stderr_jackknife > 0.0);
        }
        const auto& e1 = est.find(Classifier({1}));
        CHECK(std::abs(e1.cumulant - 1.0) <= 3.0 * std::max(e1.stderr_jackknife, 1e-12));
    }
    SUBCASE("dirac ensemble reproduces the exact symmetrized-dirac cumulants") {
        SeededRng rng(11, 0);
        auto base = dirac_peak_base(N);
        std::vector<ParticleState> replicas;
        for (int rep = 0; rep < 20000; ++rep)
            replicas.push_back(sample_symmetrized_dirac(base, rng));
        SeededRng est_rng(2, 0);
        auto est = estimate_cumulants(replicas, 3, 6, est_rng);
        auto energies = base_energies(base);
        for (const auto& entry : est.entries) {
            double exact = symmetrized_dirac_cumulant(energies, entry.classifier);
            CHECK(std::abs(entry.cumulant - exact) <=
                  3.5 * std::max(entry.stderr_jackknife, 1e-12));
        }
        // leading order (-1)^{k-1}(k-1)! N^{n-k}
        CHECK(symmetrized_dirac_cumulant(energies, Classifier({2})) == doctest::Approx(N - 1.0));
        CHECK(std::abs(symmetrized_dirac_cumulant(energies, Classifier({3})) - N * N) < 3.0 * N);
        CHECK(std::abs(symmetrized_dirac_cumulant(energies, Classifier({2, 1})) - (-1.0) * N) <
              3.0);
    }
    SUBCASE("precondition failures") {
        SeededRng rng(3, 0);
        std::vector<ParticleState> few(50, sample_uniform_sphere(N, rng));
        SeededRng est_rng(4, 0);
        CHECK_THROWS_AS(estimate_cumulants(few, 2, 4, est_rng), kac::sampling_error);
        std::vector<ParticleState> enough(200, sample_uniform_sphere(N, rng));
        CHECK_THROWS_AS(estimate_cumulants(enough, 7, 4, est_rng), kac::sampling_error);
        CHECK_THROWS_AS(estimate_cumulants(enough, 2, 100000, est_rng), kac::sampling_error);
    }
}

TEST_CASE("exchangeability: disjoint label tuples agree") {
    const long long N = 24;
    SeededRng rng(555, 0);
    std::vector<ParticleState> replicas;
    for (int rep = 0; rep < 6000; ++rep) replicas.push_back(sample_uniform_sphere(N, rng));
    // split particles in half; estimates from the disjoint halves must agree
    std::vector<ParticleState> lo(replicas.size()), hi(replicas.size());
    for (size_t r = 0; r < replicas.size(); ++r) {
        lo[r].v.assign(replicas[r].v.begin(), replicas[r].v.begin() + N / 2);
        hi[r].v.assign(replicas[r].v.begin() + N / 2, replicas[r].v.end());
    }
    SeededRng rng_lo(6, 0), rng_hi(6, 1);
    auto est_lo = estimate_cumulants(lo, 2, 4, rng_lo);
    auto est_hi = estimate_cumulants(hi, 2, 4, rng_hi);
    double chi2 = 0.0;
    int dof = 0;
    for (const auto& e : est_lo.entries) {
        const auto& o = est_hi.find(e.classifier);
        double se = std::hypot(e.stderr_jackknife, o.stderr_jackknife);
        if (se <= 0.0) continue;
        chi2 += std::pow((e.cumulant - o.cumulant) / se, 2);
        ++dof;
    }
    REQUIRE(dof >= 3);
    const double q99[] = {11.345, 13.277, 15.086, 16.812};  // dof = 3..6 at 1%
    CHECK(chi2 <= q99[std::min(dof, 6) - 3]);
}

TEST_CASE("mc stationarity: uniform ensemble stays uniform") {
    EnsembleSpec spec;
    spec.N = 16;
    spec.replicas = 4000;
    spec.seed = 314159;
    spec.n_max = 3;
    spec.tuples_per_classifier = 6;
    spec.threads = 2;
    spec.sample_times = {0.0, 10.0};
    spec.initial_sampler = [&](SeededRng& rng) { return sample_uniform_sphere(spec.N, rng); };
    auto run = run_ensemble(spec);
    REQUIRE(run.per_time.size() == 2);
    CHECK(run.max_energy_drift <= 1e-9);
    for (const auto& e0 : run.per_time[0].entries) {
        const auto& e1 = run.per_time[1].find(e0.classifier);
        double se = std::hypot(e0.stderr_jackknife, e1.stderr_jackknife);
        CHECK(std::abs(e0.cumulant - e1.cumulant) <= 3.0 * std::max(se, 1e-12));
    }
}

TEST_CASE("run_ensemble is deterministic and thread-count independent") {
    EnsembleSpec spec;
    spec.N = 8;
    spec.replicas = 300;
    spec.seed = 99;
    spec.n_max = 2;
    spec.tuples_per_classifier = 4;
    spec.sample_times = {0.5};
    spec.initial_sampler = [&](SeededRng& rng) { return sample_uniform_sphere(spec.N, rng); };
    spec.threads = 1;
    auto run1 = run_ensemble(spec);
    spec.threads = 2;
    auto run2 = run_ensemble(spec);
    for (size_t i = 0; i < run1.per_time[0].entries.size(); ++i) {
        CHECK(run1.per_time[0].entries[i].cumulant == run2.per_time[0].entries[i].cumulant);
        CHECK(run1.per_time[0].entries[i].stderr_jackknife ==
              run2.per_time[0].entries[i].stderr_jackknife);
    }
}

TEST_CASE("conditioned product sampler") {
    const long long N = 12;
    SUBCASE("constant density reduces to the uniform law") {
        SeededRng rng(41, 0);
        ConditionedProductSampler sampler([](double) { return 1.0; }, N, rng, 200, 10);
        const int samples = 20000;
        double s12 = 0.0, s1 = 0.0;
        for (int i = 0; i < samples; ++i) {
            ParticleState s = sampler.sample();
            s1 += s.energy(0);
            s12 += s.energy(0) * s.energy(1);
        }
        CHECK(sampler.acceptance_rate() == doctest::Approx(1.0));
        double kappa = s12 / samples - (s1 / samples) * (s1 / samples);
        CHECK(std::abs(kappa - (-2.0 / (N + 2))) < 0.02);
    }
    SUBCASE("gaussian density is constant on the sphere") {
        SeededRng rng(43, 0);
        ConditionedProductSampler sampler([](double v) { return std::exp(-v * v / 2); }, N, rng,
                                          200, 10);
        const int samples = 20000;
        double s12 = 0.0, s1 = 0.0;
        for (int i = 0; i < samples; ++i) {
            ParticleState s = sampler.sample();
            s1 += s.energy(0);
            s12 += s.energy(0) * s.energy(1);
        }
        CHECK(sampler.acceptance_rate() == doctest::Approx(1.0));
        double kappa = s12 / samples - (s1 / samples) * (s1 / samples);
        CHECK(std::abs(kappa - (-2.0 / (N + 2))) < 0.02);
    }
    SUBCASE("bimodal density against a 10x longer reference chain") {
        auto bimodal = [](double v) {
            return std::exp(-8.0 * (std::abs(v) - 1.0) * (std::abs(v) - 1.0)) + 1e-6;
        };
        auto run_chain = [&](int samples, std::uint64_t stream, double* moments) {
            SeededRng rng(47, stream);
            ConditionedProductSampler sampler(bimodal, N, rng, 500, 5);
            std::vector<double> acc(4, 0.0);
            for (int i = 0; i < samples; ++i) {
                ParticleState s = sampler.sample();
                double v = s.v[0];
                double p = 1.0;
                for (int m = 0; m < 4; ++m) {
                    p *= v;
                    acc[m] += p;
                }
            }
            for (int m = 0; m < 4; ++m) moments[m] = acc[m] / samples;
        };
        double short_run[4], long_run[4];
        run_chain(8000, 0, short_run);
        run_chain(80000, 1, long_run);
        for (int m = 0; m < 4; ++m) {
            double scale = 3.0 * std::sqrt(10.0 / 8000.0) * std::max(1.0, std::abs(long_run[m]));
            CHECK(std::abs(short_run[m] - long_run[m]) < scale);
        }
    }
    SUBCASE("zero density everywhere is degenerate") {
        SeededRng rng(53, 0);
        CHECK_THROWS_AS(ConditionedProductSampler([](double) { return 0.0; }, N, rng, 100, 1),
                        kac::degenerate_density_error);
    }
}

TEST_CASE("snapshot round trip") {
    SeededRng rng(8, 8);
    ParticleState s = sample_uniform_sphere(10, rng);
    std::stringstream buf;
    write_snapshot(buf, s, 1.25, 42);
    Snapshot snap = read_snapshot(buf);
    CHECK(snap.time == 1.25);
    CHECK(snap.replica == 42);
    REQUIRE(snap.state.N() == 10);
    for (int i = 0; i < 10; ++i) CHECK(snap.state.v[i] == s.v[i]);
    // header: 4 magic + 4 version + 8 N + 8 time + 8 replica, then 10 doubles
    CHECK(buf.str().size() == 4 + 4 + 8 + 8 + 8 + 80);
    CHECK(buf.str().substr(0, 4) == "KACS");
}
