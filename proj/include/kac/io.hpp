#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "kac/hierarchy.hpp"
#include "kac/kinetic.hpp"
#include "kac/simulator.hpp"

namespace kac {

/// Trajectory CSV, one row per (time, order, classifier):
/// t,order,classifier,value with the classifier JSON-encoded.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_kinetic_csv(std::ostream& out, const KineticTrajectory& traj);

/// Ensemble estimate as JSON records {classifier, order, moment, cumulant,
/// stderr, n_replicas}.
std::string estimate_to_json(const EnsembleEstimate& est, double time);

/// Alpha-norm report as JSON.
std::string alpha_norm_to_json(const AlphaNormReport& report, double alpha, long long N);

/// Accuracy report: CSV columns n,T,delta,band and a JSON summary.
void write_accuracy_csv(std::ostream& out, const AccuracyReport& report);
std::string accuracy_to_json(const AccuracyReport& report);

/// Snapshot binary layout (little-endian): magic "KACS", version u32,
/// N u64, time f64, replica u64, then N f64 velocities.
void write_snapshot(std::ostream& out, const ParticleState& state, double time,
                    std::uint64_t replica);
struct Snapshot {
    ParticleState state;
    double time = 0.0;
    std::uint64_t replica = 0;
};
Snapshot read_snapshot(std::istream& in);

void write_snapshot_csv(std::ostream& out, const ParticleState& state, double time,
                        std::uint64_t replica);

std::string format_double(double v);  // shortest round-trip-stable form

} // namespace kac
