#include "kac/io.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace kac {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << "t,order,classifier,value\n";
    for (size_t ti = 0; ti < traj.times.size(); ++ti) {
        const CumulantState& state = traj.states[ti];
        for (int n = 1; n <= state.max_order(); ++n) {
            const auto& basis = order_basis(n);
            for (size_t idx = 0; idx < basis.all.size(); ++idx)
                out << format_double(traj.times[ti]) << ',' << n << ",\""
                    << basis.all[idx].to_string() << "\"," << format_double(state.at(n, idx))
                    << "\n";
        }
    }
}

void write_kinetic_csv(std::ostream& out, const KineticTrajectory& traj) {
    out << "t,order,value\n";
    for (size_t ti = 0; ti < traj.times.size(); ++ti)
        for (int n = 1; n <= traj.states[ti].max_order(); ++n)
            out << format_double(traj.times[ti]) << ',' << n << ','
                << format_double(traj.states[ti].values[n - 1]) << "\n";
}

std::string estimate_to_json(const EnsembleEstimate& est, double time) {
    nlohmann::ordered_json root;
    root["time"] = time;
    root["n_replicas"] = est.n_replicas;
    root["tuples_per_classifier"] = est.tuples_per_classifier;
    auto& entries = root["entries"];
    entries = nlohmann::ordered_json::array();
    for (const auto& e : est.entries) {
        nlohmann::ordered_json rec;
        rec["classifier"] = nlohmann::json::parse(e.classifier.to_string());
        rec["order"] = e.classifier.order();
        rec["moment"] = e.moment;
        rec["cumulant"] = e.cumulant;
        rec["stderr"] = e.stderr_jackknife;
        rec["n_replicas"] = est.n_replicas;
        entries.push_back(std::move(rec));
    }
    return root.dump(2);
}

std::string alpha_norm_to_json(const AlphaNormReport& report, double alpha, long long N) {
    nlohmann::ordered_json root;
    root["order"] = report.order;
    root["alpha"] = alpha;
    root["N"] = N;
    root["norm"] = report.norm;
    auto& entries = root["weighted"];
    entries = nlohmann::ordered_json::array();
    for (const auto& [r, w] : report.weighted) {
        nlohmann::ordered_json rec;
        rec["classifier"] = nlohmann::json::parse(r.to_string());
        rec["value"] = w;
        entries.push_back(std::move(rec));
    }
    return root.dump(2);
}

void write_accuracy_csv(std::ostream& out, const AccuracyReport& report) {
    out << "n,T,delta,band\n";
    for (int n = 1; n <= report.n_star; ++n)
        for (size_t ti = 0; ti < report.T_grid.size(); ++ti)
            out << n << ',' << format_double(report.T_grid[ti]) << ','
                << format_double(report.delta[n - 1][ti]) << ',' << format_double(report.band(n))
                << "\n";
}

std::string accuracy_to_json(const AccuracyReport& report) {
    nlohmann::ordered_json root;
    root["N"] = report.N;
    root["n_star"] = report.n_star;
    root["t0"] = report.t0;
    root["alpha"] = report.alpha;
    root["c_fit"] = report.c_fit;
    for (int n = 1; n <= report.n_star; ++n) {
        nlohmann::ordered_json rec;
        rec["n"] = n;
        rec["sup_delta"] = report.sup_delta(n);
        rec["band"] = report.band(n);
        root["orders"].push_back(std::move(rec));
    }
    auto& off = root["offdiagonal_sup"];
    off = nlohmann::ordered_json::array();
    for (const auto& [r, series] : report.offdiagonal) {
        double sup = 0.0;
        for (double v : series) sup = std::max(sup, v);
        nlohmann::ordered_json rec;
        rec["classifier"] = nlohmann::json::parse(r.to_string());
        rec["sup"] = sup;
        off.push_back(std::move(rec));
    }
    return root.dump(2);
}

// ---------------------------------------------------------------------------
// Snapshots
// ---------------------------------------------------------------------------

namespace {

static_assert(std::endian::native == std::endian::little,
              "snapshot writer assumes a little-endian host");

template <class T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T take(std::istream& in) {
    T value;
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw error("snapshot: truncated input");
    return value;
}

constexpr std::uint32_t kSnapshotVersion = 1;

} // namespace

void write_snapshot(std::ostream& out, const ParticleState& state, double time,
                    std::uint64_t replica) {
    out.write("KACS", 4);
    put<std::uint32_t>(out, kSnapshotVersion);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(state.N()));
    put<double>(out, time);
    put<std::uint64_t>(out, replica);
    for (double v : state.v) put<double>(out, v);
}

Snapshot read_snapshot(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "KACS", 4) != 0) throw error("snapshot: bad magic");
    auto version = take<std::uint32_t>(in);
    if (version != kSnapshotVersion)
        throw error("snapshot: unsupported version " + std::to_string(version));
    Snapshot snap;
    auto n = take<std::uint64_t>(in);
    snap.time = take<double>(in);
    snap.replica = take<std::uint64_t>(in);
    snap.state.v.resize(n);
    for (auto& v : snap.state.v) v = take<double>(in);
    return snap;
}

void write_snapshot_csv(std::ostream& out, const ParticleState& state, double time,
                        std::uint64_t replica) {
    out << "replica,t,i,v\n";
    for (long long i = 0; i < state.N(); ++i)
        out << replica << ',' << format_double(time) << ',' << i << ','
            << format_double(state.v[i]) << "\n";
}

} // namespace kac
