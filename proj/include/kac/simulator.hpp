#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "kac/partitions.hpp"

namespace kac {

/// Counter-based generator (philox4x32-10).  A (seed, stream) pair fully
/// determines the sequence, so replicas are reproducible and independent.
class SeededRng {
public:
    SeededRng(std::uint64_t seed, std::uint64_t stream);

    std::uint32_t next_u32();
    std::uint64_t next_u64();
    double next_double();                    // uniform [0,1), 53 bits
    double next_normal();                    // standard normal (Box-Muller)
    double next_exponential(double rate);
    std::uint32_t next_below(std::uint32_t bound);  // uniform {0,...,bound-1}, unbiased
    double next_angle();                     // uniform on (-pi, pi]

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    /// One raw block; exposed so the generator can be checked against the
    /// published philox4x32-10 reference vectors.
    static std::array<std::uint32_t, 4> philox_block(const std::array<std::uint32_t, 4>& counter,
                                                     const std::array<std::uint32_t, 2>& key);

private:
    void refill();
    std::uint64_t seed_, stream_, counter_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int buffer_pos_ = 4;
    std::optional<double> cached_normal_;
};

/// N velocities constrained to the sphere of radius sqrt(N).
struct ParticleState {
    std::vector<double> v;

    long long N() const { return static_cast<long long>(v.size()); }
    double energy(int i) const { return v[i] * v[i]; }
    double total_energy() const;
};

struct CollisionEvent {
    int i = 0, j = 0;    // distinct particle indices
    double theta = 0.0;  // in (-pi, pi]
};

/// Pair rotation: (v_i, v_j) <- (cos t v_i + sin t v_j, -sin t v_i + cos t v_j).
void collision_step(ParticleState& state, const CollisionEvent& event);

struct SimulateStats {
    long long events = 0;
    long long renormalizations = 0;
};

/// Kac jump process at total event rate N (generator N(Q_N - I)): exponential
/// waiting times, uniform ordered pair, uniform angle.  Returns the state at
/// each requested time (ascending).  Energy drift beyond 1e-9 relative is
/// renormalized and counted.
std::vector<ParticleState> simulate(const ParticleState& initial,
                                    std::span<const double> sample_times, SeededRng& rng,
                                    SimulateStats* stats = nullptr);

ParticleState sample_uniform_sphere(long long N, SeededRng& rng);

/// Uniformly random permutation of a fixed base vector on the sphere.
ParticleState sample_symmetrized_dirac(std::span<const double> base, SeededRng& rng);

/// Metropolis chain for the sphere-conditioned product density
/// prod_i g(v_i): pair-rotation proposals with wrapped normal angle, so the
/// constraint manifold is preserved exactly.
class ConditionedProductSampler {
public:
    ConditionedProductSampler(std::function<double(double)> density, long long N, SeededRng& rng,
                              long burn_in, long thinning, double proposal_sigma = 0.5);

    ParticleState sample();  // advances `thinning` proposals, returns current state
    double acceptance_rate() const {
        return proposals_ ? static_cast<double>(accepted_) / proposals_ : 0.0;
    }

private:
    void step();
    std::function<double(double)> density_;
    SeededRng& rng_;
    long thinning_;
    double sigma_;
    ParticleState state_;
    std::vector<double> logg_;  // log density per component
    long long proposals_ = 0, accepted_ = 0;
};

ParticleState sample_conditioned_product(const std::function<double(double)>& density, long long N,
                                         SeededRng& rng, long burn_in, long thinning,
                                         double* acceptance_rate = nullptr);

// ---------------------------------------------------------------------------
// Ensemble cumulant estimation
// ---------------------------------------------------------------------------

struct EnsembleEstimate {
    struct Entry {
        Classifier classifier;
        double moment = 0.0;    // estimate of E[e^r] on the canonical labels
        double cumulant = 0.0;
        double stderr_jackknife = 0.0;
    };
    long long n_replicas = 0;
    long long tuples_per_classifier = 0;
    std::vector<Entry> entries;  // all classifiers of order 1..n_max

    const Entry& find(const Classifier& r) const;
};

/// Moment/cumulant estimation over an ensemble of equal-time snapshots.
/// For each classifier, random distinct-label tuples are drawn once and the
/// monomials are averaged over replicas and tuples; cumulants come from the
/// signed partition sum and errors from a replica-level jackknife.
EnsembleEstimate estimate_cumulants(const std::vector<ParticleState>& replicas, int n_max,
                                    int tuples_per_classifier, SeededRng& rng);

/// Streaming multi-time ensemble driver: simulates `replicas` independent
/// trajectories (stream id = replica index) and estimates cumulants at each
/// sample time without keeping the states.  Deterministic for fixed seed.
struct EnsembleSpec {
    long long N = 2;
    long long replicas = 100;
    std::uint64_t seed = 0;
    int n_max = 3;
    int tuples_per_classifier = 8;
    int threads = 1;
    std::vector<double> sample_times;
    std::function<ParticleState(SeededRng&)> initial_sampler;
};

struct EnsembleRun {
    std::vector<EnsembleEstimate> per_time;  // aligned with sample_times
    SimulateStats stats;                     // aggregated over replicas
    double max_energy_drift = 0.0;           // worst |sum e_i - N|/N seen at sample times
};

EnsembleRun run_ensemble(const EnsembleSpec& spec);

} // namespace kac
