#include "kac/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

namespace kac {

// ---------------------------------------------------------------------------
// philox4x32-10
// ---------------------------------------------------------------------------

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& ctr, const std::array<std::uint32_t, 2>& key) {
    std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
    std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
    std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

} // namespace

std::array<std::uint32_t, 4> SeededRng::philox_block(const std::array<std::uint32_t, 4>& counter,
                                                     const std::array<std::uint32_t, 2>& key) {
    std::array<std::uint32_t, 4> ctr = counter;
    std::array<std::uint32_t, 2> k = key;
    philox_round(ctr, k);
    for (int r = 1; r < 10; ++r) {
        k[0] += kPhiloxW0;
        k[1] += kPhiloxW1;
        philox_round(ctr, k);
    }
    return ctr;
}

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

void SeededRng::refill() {
    std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_),
                                        static_cast<std::uint32_t>(seed_ >> 32)};
    buffer_ = philox_block(ctr, key);
    buffer_pos_ = 0;
    ++counter_;
}

std::uint32_t SeededRng::next_u32() {
    if (buffer_pos_ >= 4) refill();
    return buffer_[buffer_pos_++];
}

std::uint64_t SeededRng::next_u64() {
    std::uint64_t lo = next_u32();
    std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
}

double SeededRng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::next_normal() {
    if (cached_normal_) {
        double v = *cached_normal_;
        cached_normal_.reset();
        return v;
    }
    double u1 = next_double(), u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    cached_normal_ = r * std::sin(a);
    return r * std::cos(a);
}

double SeededRng::next_exponential(double rate) {
    if (rate <= 0.0) throw domain_error("next_exponential: rate must be positive");
    return -std::log1p(-next_double()) / rate;
}

std::uint32_t SeededRng::next_below(std::uint32_t bound) {
    if (bound == 0) throw domain_error("next_below: bound must be positive");
    std::uint32_t limit = UINT32_MAX - UINT32_MAX % bound;
    std::uint32_t x = next_u32();
    while (x >= limit) x = next_u32();
    return x % bound;
}

double SeededRng::next_angle() {
    return M_PI - 2.0 * M_PI * next_double();  // (-pi, pi]
}

// ---------------------------------------------------------------------------
// Kac process
// ---------------------------------------------------------------------------

double ParticleState::total_energy() const {
    double sum = 0.0;
    for (double x : v) sum += x * x;
    return sum;
}

void collision_step(ParticleState& state, const CollisionEvent& event) {
    if (event.i == event.j) throw domain_error("collision_step: particle indices must differ");
    double c = std::cos(event.theta), s = std::sin(event.theta);
    double vi = state.v[event.i], vj = state.v[event.j];
    state.v[event.i] = c * vi + s * vj;
    state.v[event.j] = -s * vi + c * vj;
}

namespace {

constexpr double kEnergyTolerance = 1e-9;
constexpr long long kEnergyCheckInterval = 1024;

void renormalize_if_drifted(ParticleState& state, SimulateStats& stats) {
    double total = state.total_energy();
    double target = static_cast<double>(state.N());
    if (std::abs(total / target - 1.0) > kEnergyTolerance) {
        double scale = std::sqrt(target / total);
        for (double& x : state.v) x *= scale;
        ++stats.renormalizations;
    }
}

} // namespace

std::vector<ParticleState> simulate(const ParticleState& initial,
                                    std::span<const double> sample_times, SeededRng& rng,
                                    SimulateStats* stats_out) {
    const long long N = initial.N();
    if (N < 2) throw domain_error("simulate: need at least 2 particles");
    for (size_t i = 1; i < sample_times.size(); ++i)
        if (sample_times[i] < sample_times[i - 1])
            throw domain_error("simulate: sample times must be ascending");

    SimulateStats stats;
    ParticleState state = initial;
    double t = 0.0;
    const double rate = static_cast<double>(N);
    double t_event = rng.next_exponential(rate);

    std::vector<ParticleState> samples;
    samples.reserve(sample_times.size());
    for (double t_sample : sample_times) {
        if (t_sample < 0.0) throw domain_error("simulate: negative sample time");
        while (t_event <= t_sample) {
            t = t_event;
            CollisionEvent ev;
            ev.i = static_cast<int>(rng.next_below(static_cast<std::uint32_t>(N)));
            ev.j = static_cast<int>(rng.next_below(static_cast<std::uint32_t>(N - 1)));
            if (ev.j >= ev.i) ++ev.j;
            ev.theta = rng.next_angle();
            collision_step(state, ev);
            ++stats.events;
            if (stats.events % kEnergyCheckInterval == 0) renormalize_if_drifted(state, stats);
            t_event += rng.next_exponential(rate);
        }
        t = t_sample;
        renormalize_if_drifted(state, stats);
        samples.push_back(state);
    }
    (void)t;
    if (stats_out) *stats_out = stats;
    return samples;
}

ParticleState sample_uniform_sphere(long long N, SeededRng& rng) {
    if (N < 2) throw domain_error("sample_uniform_sphere: need at least 2 particles");
    ParticleState state;
    state.v.resize(N);
    double norm2 = 0.0;
    do {
        for (auto& x : state.v) {
            x = rng.next_normal();
            norm2 += x * x;
        }
    } while (norm2 == 0.0);
    double scale = std::sqrt(static_cast<double>(N) / norm2);
    for (auto& x : state.v) x *= scale;
    return state;
}

ParticleState sample_symmetrized_dirac(std::span<const double> base, SeededRng& rng) {
    const long long N = static_cast<long long>(base.size());
    double norm2 = 0.0;
    for (double x : base) norm2 += x * x;
    if (std::abs(norm2 / static_cast<double>(N) - 1.0) > kEnergyTolerance)
        throw domain_error("sample_symmetrized_dirac: base vector off the sphere");
    ParticleState state;
    state.v.assign(base.begin(), base.end());
    for (long long i = N - 1; i > 0; --i) {
        auto j = rng.next_below(static_cast<std::uint32_t>(i + 1));
        std::swap(state.v[i], state.v[j]);
    }
    return state;
}

// ---------------------------------------------------------------------------
// Conditioned product data (Metropolis on the sphere)
// ---------------------------------------------------------------------------

ConditionedProductSampler::ConditionedProductSampler(std::function<double(double)> density,
                                                     long long N, SeededRng& rng, long burn_in,
                                                     long thinning, double proposal_sigma)
    : density_(std::move(density)), rng_(rng), thinning_(thinning), sigma_(proposal_sigma) {
    if (N < 2) throw domain_error("ConditionedProductSampler: need at least 2 particles");
    if (thinning_ < 1) thinning_ = 1;

    // find a starting point with positive density in every component
    bool found = false;
    for (int attempt = 0; attempt < 100 && !found; ++attempt) {
        state_ = sample_uniform_sphere(N, rng_);
        found = true;
        for (double x : state_.v)
            if (!(density_(x) > 0.0)) { found = false; break; }
    }
    if (!found)
        throw degenerate_density_error(
            "sample_conditioned_product: no positive-density start found");
    logg_.resize(N);
    for (long long i = 0; i < N; ++i) logg_[i] = std::log(density_(state_.v[i]));

    long long accepted_before = accepted_;
    for (long k = 0; k < burn_in; ++k) step();
    if (burn_in > 0 && accepted_ == accepted_before)
        throw degenerate_density_error(
            "sample_conditioned_product: zero acceptance over burn-in");
}

void ConditionedProductSampler::step() {
    const long long N = state_.N();
    int i = static_cast<int>(rng_.next_below(static_cast<std::uint32_t>(N)));
    int j = static_cast<int>(rng_.next_below(static_cast<std::uint32_t>(N - 1)));
    if (j >= i) ++j;
    double theta = sigma_ * rng_.next_normal();
    double c = std::cos(theta), s = std::sin(theta);
    double wi = c * state_.v[i] + s * state_.v[j];
    double wj = -s * state_.v[i] + c * state_.v[j];
    ++proposals_;
    double gi = density_(wi), gj = density_(wj);
    if (!(gi > 0.0) || !(gj > 0.0)) return;
    double log_ratio = std::log(gi) + std::log(gj) - logg_[i] - logg_[j];
    if (log_ratio >= 0.0 || std::log(rng_.next_double() + 1e-300) < log_ratio) {
        state_.v[i] = wi;
        state_.v[j] = wj;
        logg_[i] = std::log(gi);
        logg_[j] = std::log(gj);
        ++accepted_;
    }
}

ParticleState ConditionedProductSampler::sample() {
    for (long k = 0; k < thinning_; ++k) step();
    return state_;
}

ParticleState sample_conditioned_product(const std::function<double(double)>& density, long long N,
                                         SeededRng& rng, long burn_in, long thinning,
                                         double* acceptance_rate) {
    ConditionedProductSampler sampler(density, N, rng, burn_in, thinning);
    ParticleState s = sampler.sample();
    if (acceptance_rate) *acceptance_rate = sampler.acceptance_rate();
    return s;
}

// ---------------------------------------------------------------------------
// Cumulant estimation
// ---------------------------------------------------------------------------

namespace {

// Estimation plan for one classifier: tuples of distinct labels, the
// sub-multi-indices whose moments are needed, and the precompiled signed
// partition sum evaluating the cumulant from those moments.
struct ClassifierPlan {
    Classifier r;
    int k = 0;                             // distinct labels
    std::vector<std::vector<int>> tuples;  // label tuples, each of size k
    std::vector<MultiIndex> subindices;    // over the k canonical labels, nonzero
    int full_slot = -1;                    // slot of the full multi-index r
    struct PartitionTerm {
        double moebius;
        std::vector<int> slots;  // factor slots into `subindices`
    };
    std::vector<PartitionTerm> partition_sum;
};

std::vector<MultiIndex> enumerate_subindices(const std::vector<int>& parts) {
    std::vector<MultiIndex> out;
    MultiIndex q(parts.size(), 0);
    while (true) {
        int pos = 0;
        while (pos < static_cast<int>(parts.size()) && q[pos] == parts[pos]) {
            q[pos] = 0;
            ++pos;
        }
        if (pos == static_cast<int>(parts.size())) break;
        ++q[pos];
        out.push_back(q);
    }
    return out;
}

ClassifierPlan make_plan(const Classifier& r, long long N, int tuples_per_classifier,
                         SeededRng& rng) {
    ClassifierPlan plan;
    plan.r = r;
    plan.k = r.length();
    if (plan.k > N) throw sampling_error("estimate_cumulants: classifier needs more labels than particles");

    // distinct unordered tuples available: C(N, k)
    double available = 1.0;
    for (int j = 0; j < plan.k; ++j) available *= static_cast<double>(N - j) / (j + 1);
    if (static_cast<double>(tuples_per_classifier) > available)
        throw sampling_error("estimate_cumulants: more tuples requested than distinct label sets");

    std::set<std::vector<int>> seen;
    while (static_cast<int>(plan.tuples.size()) < tuples_per_classifier) {
        std::vector<int> tuple;
        std::set<int> used;
        while (static_cast<int>(tuple.size()) < plan.k) {
            int label = static_cast<int>(rng.next_below(static_cast<std::uint32_t>(N)));
            if (used.insert(label).second) tuple.push_back(label);
        }
        std::vector<int> sorted = tuple;
        std::sort(sorted.begin(), sorted.end());
        if (seen.insert(sorted).second) plan.tuples.push_back(tuple);
    }

    plan.subindices = enumerate_subindices(r.parts());
    std::map<MultiIndex, int> slot_of;
    for (size_t s = 0; s < plan.subindices.size(); ++s)
        slot_of[plan.subindices[s]] = static_cast<int>(s);
    MultiIndex full = r.parts();
    plan.full_slot = slot_of.at(full);

    // precompile the signed partition sum over the canonical label sequence
    LabelSequence target = canonical_label_sequence(full);
    const int n = static_cast<int>(target.size());
    for_each_set_partition(n, [&](std::span<const int> rgs) {
        int nblocks = *std::max_element(rgs.begin(), rgs.end()) + 1;
        ClassifierPlan::PartitionTerm term;
        term.moebius = 1.0;
        for (int b = 1; b < nblocks; ++b) term.moebius *= -b;
        for (int b = 0; b < nblocks; ++b) {
            MultiIndex q(plan.k, 0);
            for (int i = 0; i < n; ++i)
                if (rgs[i] == b) ++q[target[i] - 1];
            term.slots.push_back(slot_of.at(q));
        }
        plan.partition_sum.push_back(std::move(term));
    });
    return plan;
}

// Tuple-averaged monomials for one replica, one classifier.
void accumulate_replica(const ClassifierPlan& plan, const ParticleState& state, double* out) {
    const double inv_tuples = 1.0 / static_cast<double>(plan.tuples.size());
    for (const auto& tuple : plan.tuples) {
        for (size_t s = 0; s < plan.subindices.size(); ++s) {
            double prod = 1.0;
            const MultiIndex& q = plan.subindices[s];
            for (int a = 0; a < plan.k; ++a) {
                double e = state.energy(tuple[a]);
                for (int p = 0; p < q[a]; ++p) prod *= e;
            }
            out[s] += prod * inv_tuples;
        }
    }
}

double cumulant_from_moments(const ClassifierPlan& plan, const double* moments) {
    double total = 0.0;
    for (const auto& term : plan.partition_sum) {
        double prod = term.moebius;
        for (int slot : term.slots) prod *= moments[slot];
        total += prod;
    }
    return total;
}

struct PlanSet {
    std::vector<ClassifierPlan> plans;
    std::vector<int> offsets;  // slot offset per plan into the flat moment vector
    int total_slots = 0;
};

PlanSet make_plans(long long N, int n_max, int tuples_per_classifier, SeededRng& rng) {
    if (n_max < 1 || n_max > 6)
        throw sampling_error("estimate_cumulants: n_max must lie in [1, 6]");
    PlanSet set;
    for (int n = 1; n <= n_max; ++n)
        for (const auto& r : enumerate_classifiers(n))
            set.plans.push_back(make_plan(r, N, tuples_per_classifier, rng));
    for (auto& plan : set.plans) {
        set.offsets.push_back(set.total_slots);
        set.total_slots += static_cast<int>(plan.subindices.size());
    }
    return set;
}

EnsembleEstimate reduce_estimates(const PlanSet& set, const std::vector<double>& per_replica,
                                  long long R, int tuples_per_classifier) {
    const int S = set.total_slots;
    std::vector<double> mean(S, 0.0);
    for (long long rep = 0; rep < R; ++rep)
        for (int s = 0; s < S; ++s) mean[s] += per_replica[rep * S + s];
    for (int s = 0; s < S; ++s) mean[s] /= static_cast<double>(R);

    EnsembleEstimate est;
    est.n_replicas = R;
    est.tuples_per_classifier = tuples_per_classifier;
    std::vector<double> loo(S);
    for (size_t p = 0; p < set.plans.size(); ++p) {
        const auto& plan = set.plans[p];
        const double* m = mean.data() + set.offsets[p];
        EnsembleEstimate::Entry entry;
        entry.classifier = plan.r;
        entry.moment = m[plan.full_slot];
        entry.cumulant = cumulant_from_moments(plan, m);

        // leave-one-replica-out
        double jack_mean = 0.0, jack_m2 = 0.0;
        const int slots = static_cast<int>(plan.subindices.size());
        for (long long rep = 0; rep < R; ++rep) {
            const double* row = per_replica.data() + rep * S + set.offsets[p];
            for (int s = 0; s < slots; ++s)
                loo[s] = (mean[set.offsets[p] + s] * R - row[s]) / static_cast<double>(R - 1);
            double kappa = cumulant_from_moments(plan, loo.data());
            double delta = kappa - jack_mean;
            jack_mean += delta / static_cast<double>(rep + 1);
            jack_m2 += delta * (kappa - jack_mean);
        }
        entry.stderr_jackknife =
            std::sqrt(std::max(0.0, jack_m2 * static_cast<double>(R - 1) / static_cast<double>(R)));
        est.entries.push_back(std::move(entry));
    }
    return est;
}

} // namespace

const EnsembleEstimate::Entry& EnsembleEstimate::find(const Classifier& r) const {
    for (const auto& e : entries)
        if (e.classifier == r) return e;
    throw index_error("EnsembleEstimate: no entry for classifier " + r.to_string());
}

EnsembleEstimate estimate_cumulants(const std::vector<ParticleState>& replicas, int n_max,
                                    int tuples_per_classifier, SeededRng& rng) {
    const long long R = static_cast<long long>(replicas.size());
    if (R < 100) throw sampling_error("estimate_cumulants: need at least 100 replicas");
    const long long N = replicas.front().N();
    PlanSet set = make_plans(N, n_max, tuples_per_classifier, rng);

    std::vector<double> per_replica(static_cast<size_t>(R) * set.total_slots, 0.0);
    for (long long rep = 0; rep < R; ++rep) {
        double* row = per_replica.data() + rep * set.total_slots;
        for (size_t p = 0; p < set.plans.size(); ++p)
            accumulate_replica(set.plans[p], replicas[rep], row + set.offsets[p]);
    }
    return reduce_estimates(set, per_replica, R, tuples_per_classifier);
}

EnsembleRun run_ensemble(const EnsembleSpec& spec) {
    if (spec.replicas < 100) throw sampling_error("run_ensemble: need at least 100 replicas");
    if (!spec.initial_sampler) throw usage_error("run_ensemble: missing initial sampler");
    const long long R = spec.replicas;
    const int T = static_cast<int>(spec.sample_times.size());

    // tuple plans come from a dedicated stream so replica streams stay aligned
    SeededRng plan_rng(spec.seed, static_cast<std::uint64_t>(-1));
    PlanSet set = make_plans(spec.N, spec.n_max, spec.tuples_per_classifier, plan_rng);
    const int S = set.total_slots;

    std::vector<std::vector<double>> per_time(T,
                                              std::vector<double>(static_cast<size_t>(R) * S, 0.0));
    std::vector<SimulateStats> thread_stats;
    std::vector<double> thread_drift;

    int threads = std::max(1, spec.threads);
    thread_stats.resize(threads);
    thread_drift.assign(threads, 0.0);
    std::vector<std::thread> pool;
    std::atomic<long long> next_replica{0};
    for (int tid = 0; tid < threads; ++tid) {
        pool.emplace_back([&, tid] {
            while (true) {
                long long rep = next_replica.fetch_add(1);
                if (rep >= R) break;
                SeededRng rng(spec.seed, static_cast<std::uint64_t>(rep));
                ParticleState initial = spec.initial_sampler(rng);
                SimulateStats stats;
                auto snaps = simulate(initial, spec.sample_times, rng, &stats);
                thread_stats[tid].events += stats.events;
                thread_stats[tid].renormalizations += stats.renormalizations;
                for (int ti = 0; ti < T; ++ti) {
                    double drift =
                        std::abs(snaps[ti].total_energy() / static_cast<double>(spec.N) - 1.0);
                    thread_drift[tid] = std::max(thread_drift[tid], drift);
                    double* row = per_time[ti].data() + rep * S;
                    for (size_t p = 0; p < set.plans.size(); ++p)
                        accumulate_replica(set.plans[p], snaps[ti], row + set.offsets[p]);
                }
            }
        });
    }
    for (auto& t : pool) t.join();

    EnsembleRun run;
    for (int tid = 0; tid < threads; ++tid) {
        run.stats.events += thread_stats[tid].events;
        run.stats.renormalizations += thread_stats[tid].renormalizations;
        run.max_energy_drift = std::max(run.max_energy_drift, thread_drift[tid]);
    }
    for (int ti = 0; ti < T; ++ti)
        run.per_time.push_back(
            reduce_estimates(set, per_time[ti], R, spec.tuples_per_classifier));
    return run;
}

} // namespace kac
