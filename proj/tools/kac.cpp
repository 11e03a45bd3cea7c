// Experiment runner for the Kac-model workbench.
//
//   kac simulate|hierarchy|stationary|kinetic|compare|norms|verify
//       [--config path] [--seed u64] [--out dir] [--N u64] [--n-star u8]
//       [--alpha f64] [--c f64] [--t-end f64] [--dt f64] [--replicas u64] ...
//
// Values come from the config file when given; explicitly passed flags win.
// Every run writes manifest.toml (reproducibility record) and timing.toml
// (wall clock, kept separate so the manifest is byte-stable).

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "kac/acceptance.hpp"
#include "kac/config.hpp"
#include "kac/initial_data.hpp"
#include "kac/io.hpp"
#include "kac/kinetic.hpp"
#include "kac/simulator.hpp"

namespace fs = std::filesystem;
using namespace kac;

namespace {

struct Options {
    std::string config_path, out_dir, initial = "uniform", suite = "full", density = "uniform";
    long long N = 32, replicas = 1000, seed = 1, snapshots = 0;
    int n_star = 3, tuples = 8, threads = 0, burn_in = 1000, thinning = 10;
    double alpha = 0.5, c = 0.0, t_end = 5.0, dt = 1e-3, sample_dt = 0.5, t0 = -1.0;
};

// flags that the user passed explicitly override config-file values
Config resolve_config(const CLI::App& app, const Options& opt, const std::string& mode) {
    Config cfg;
    if (!opt.config_path.empty()) cfg = Config::load(opt.config_path);
    cfg.set("mode", "\"" + mode + "\"");
    auto maybe = [&](const char* flag, const std::string& key, const std::string& value) {
        if (app.count(flag) > 0 || !cfg.has(key)) cfg.set(key, value);
    };
    maybe("--N", "N", std::to_string(opt.N));
    maybe("--n-star", "n_star", std::to_string(opt.n_star));
    maybe("--alpha", "alpha", format_double(opt.alpha));
    maybe("--c", "c", format_double(opt.c));
    maybe("--t-end", "t_end", format_double(opt.t_end));
    maybe("--dt", "dt", format_double(opt.dt));
    maybe("--sample-dt", "sample_dt", format_double(opt.sample_dt));
    maybe("--seed", "seed", std::to_string(opt.seed));
    maybe("--replicas", "replicas", std::to_string(opt.replicas));
    maybe("--initial", "initial", "\"" + opt.initial + "\"");
    maybe("--tuples", "tuples", std::to_string(opt.tuples));
    maybe("--threads", "threads", std::to_string(opt.threads));
    maybe("--burn-in", "burn_in", std::to_string(opt.burn_in));
    maybe("--thinning", "thinning", std::to_string(opt.thinning));
    maybe("--density", "density", "\"" + opt.density + "\"");
    maybe("--suite", "suite", "\"" + opt.suite + "\"");
    maybe("--snapshots", "snapshots", std::to_string(opt.snapshots));
    maybe("--t0", "t0", format_double(opt.t0));
    return cfg;
}

struct Run {
    Config cfg;
    fs::path out;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    std::vector<std::pair<std::string, double>> task_seconds;

    void task_done(const std::string& name) {
        double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        double prev = 0.0;
        for (auto& [k, v] : task_seconds) prev += v;
        task_seconds.emplace_back(name, s - prev);
    }

    void write_file(const std::string& name, const std::string& content) const {
        std::ofstream f(out / name, std::ios::binary);
        if (!f) throw usage_error("cannot write " + (out / name).string());
        f << content;
    }

    void finalize(const std::string& mode) const {
        RunManifest manifest;
        manifest.version = kVersion;
        manifest.mode = mode;
        manifest.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
        manifest.config_text = cfg.canonical_text();
        manifest.config_hash = fnv1a64(manifest.config_text);
        write_file("manifest.toml", manifest.to_toml());
        std::ostringstream timing;
        double total =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        timing << "wall_clock_seconds = " << format_double(total) << "\n";
        for (const auto& [name, seconds] : task_seconds)
            timing << "task_" << name << "_seconds = " << format_double(seconds) << "\n";
        write_file("timing.toml", timing.str());
    }
};

int resolved_threads(const Config& cfg) {
    int t = static_cast<int>(cfg.get_int("threads", 0));
    if (t <= 0) t = static_cast<int>(std::thread::hardware_concurrency());
    return std::max(1, t);
}

// hierarchy-side initial data; conditioned densities have no closed-form
// cumulants so they are Monte Carlo only
CumulantState initial_state(const std::string& spec, long long N, int n_star) {
    if (spec == "uniform") return uniform_sphere_state(n_star, N);
    if (spec == "dirac:peak") return symmetrized_dirac_state(dirac_peak_base(N), n_star);
    if (spec == "dirac:quantile-gauss")
        return symmetrized_dirac_state(dirac_gauss_quantile_base(N), n_star);
    throw usage_error("initial data '" + spec + "' is not available for the hierarchy");
}

std::function<double(double)> density_by_id(const std::string& id) {
    if (id == "uniform") return [](double) { return 1.0; };
    if (id == "gauss") return [](double v) { return std::exp(-v * v / 2); };
    if (id == "bimodal")
        return [](double v) {
            return std::exp(-8.0 * (std::abs(v) - 1.0) * (std::abs(v) - 1.0)) + 1e-6;
        };
    throw usage_error("unknown density id '" + id + "'");
}

std::function<ParticleState(SeededRng&)> mc_sampler(const Config& cfg, long long N) {
    std::string spec = cfg.get_string("initial", "uniform");
    if (spec == "uniform")
        return [N](SeededRng& rng) { return sample_uniform_sphere(N, rng); };
    if (spec == "dirac:peak") {
        auto base = dirac_peak_base(N);
        return [base](SeededRng& rng) { return sample_symmetrized_dirac(base, rng); };
    }
    if (spec == "dirac:quantile-gauss") {
        auto base = dirac_gauss_quantile_base(N);
        return [base](SeededRng& rng) { return sample_symmetrized_dirac(base, rng); };
    }
    if (spec.rfind("conditioned:", 0) == 0) {
        auto density = density_by_id(spec.substr(12));
        long burn_in = cfg.get_int("burn_in", 1000);
        long thinning = cfg.get_int("thinning", 10);
        return [=](SeededRng& rng) {
            return sample_conditioned_product(density, N, rng, burn_in, thinning);
        };
    }
    throw usage_error("unknown initial data spec '" + spec + "'");
}

std::vector<double> sample_grid(double t_end, double sample_dt) {
    std::vector<double> times{0.0};
    if (sample_dt > 0)
        for (double t = sample_dt; t < t_end - 1e-12; t += sample_dt) times.push_back(t);
    if (t_end > 0) times.push_back(t_end);
    return times;
}

// ---------------------------------------------------------------------------
// modes
// ---------------------------------------------------------------------------

int mode_simulate(Run& run) {
    const Config& cfg = run.cfg;
    EnsembleSpec spec;
    spec.N = cfg.get_int("N");
    spec.replicas = cfg.get_int("replicas");
    spec.seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
    spec.n_max = std::min<int>(3, static_cast<int>(cfg.get_int("n_star")));
    spec.tuples_per_classifier = static_cast<int>(cfg.get_int("tuples"));
    spec.threads = resolved_threads(cfg);
    spec.sample_times = sample_grid(cfg.get_double("t_end"), cfg.get_double("sample_dt"));
    spec.initial_sampler = mc_sampler(cfg, spec.N);

    EnsembleRun result = run_ensemble(spec);
    run.task_done("ensemble");

    std::ostringstream all;
    all << "[\n";
    for (size_t ti = 0; ti < spec.sample_times.size(); ++ti) {
        if (ti) all << ",\n";
        all << estimate_to_json(result.per_time[ti], spec.sample_times[ti]);
    }
    all << "\n]\n";
    run.write_file("estimates.json", all.str());

    long long n_snapshots = cfg.get_int("snapshots", 0);
    if (n_snapshots > 0) {
        std::ostringstream bin, csv;
        for (long long rep = 0; rep < std::min(n_snapshots, spec.replicas); ++rep) {
            SeededRng rng(spec.seed, static_cast<std::uint64_t>(rep));
            ParticleState initial = spec.initial_sampler(rng);
            auto snaps = simulate(initial, spec.sample_times, rng);
            write_snapshot(bin, snaps.back(), spec.sample_times.back(),
                           static_cast<std::uint64_t>(rep));
            write_snapshot_csv(csv, snaps.back(), spec.sample_times.back(),
                               static_cast<std::uint64_t>(rep));
        }
        run.write_file("snapshots.bin", bin.str());
        run.write_file("snapshots.csv", csv.str());
        run.task_done("snapshots");
    }

    std::cout << "simulate: " << spec.replicas << " replicas, " << result.stats.events
              << " events, max energy drift " << result.max_energy_drift << "\n";
    if (result.max_energy_drift > 1e-9) {
        std::cerr << "energy conservation invariant violated\n";
        return 4;
    }
    return 0;
}

int mode_hierarchy(Run& run) {
    const Config& cfg = run.cfg;
    HierarchyParams params{.N = cfg.get_int("N"),
                           .n_star = static_cast<int>(cfg.get_int("n_star")),
                           .alpha = cfg.get_double("alpha"),
                           .c = cfg.get_double("c")};
    params.validate();
    CumulantState s0 = initial_state(cfg.get_string("initial"), params.N, params.n_star);
    Trajectory traj = integrate_hierarchy(s0, params, cfg.get_double("t_end"),
                                          cfg.get_double("dt"), cfg.get_double("sample_dt"));
    run.task_done("integration");

    std::ostringstream csv;
    write_trajectory_csv(csv, traj);
    run.write_file("trajectory.csv", csv.str());

    std::ostringstream norms;
    norms << "[\n";
    for (int n = 2; n <= params.n_star; ++n) {
        const auto& last = traj.states.back();
        const auto& basis = order_basis(n);
        std::span<const double> rep(last.values[n - 1].data(), basis.repeated_count());
        if (n > 2) norms << ",\n";
        norms << alpha_norm_to_json(alpha_norm(rep, params.alpha, n, params.N), params.alpha,
                                    params.N);
    }
    norms << "\n]\n";
    run.write_file("alpha_norms.json", norms.str());
    std::cout << "hierarchy: " << traj.times.size() << " samples to t=" << traj.times.back()
              << ", tolerance " << traj.tolerance << "\n";
    return 0;
}

int mode_stationary(Run& run) {
    const Config& cfg = run.cfg;
    long long N = cfg.get_int("N");
    int n_star = static_cast<int>(cfg.get_int("n_star"));
    CumulantState s = stationary_state(n_star, N);
    run.task_done("solve");

    std::ostringstream csv;
    csv << "order,classifier,value\n";
    for (int n = 1; n <= n_star; ++n) {
        const auto& basis = order_basis(n);
        for (size_t i = 0; i < basis.all.size(); ++i)
            csv << n << ",\"" << basis.all[i].to_string() << "\","
                << format_double(s.at(n, static_cast<int>(i))) << "\n";
    }
    run.write_file("stationary.csv", csv.str());

    auto h = stationary_nonrepeated(n_star, N);
    std::ostringstream hcsv;
    hcsv << "n,h_bar,catalan_majorant\n";
    for (int n = 1; n <= n_star; ++n)
        hcsv << n << ',' << format_double(h[n - 1]) << ','
             << format_double(to_double(catalan_majorant(n))) << "\n";
    run.write_file("stationary_h.csv", hcsv.str());
    std::cout << "stationary: orders 1.." << n_star << " at N=" << N << "\n";
    return 0;
}

int mode_kinetic(Run& run) {
    const Config& cfg = run.cfg;
    HierarchyParams params{.N = cfg.get_int("N"),
                           .n_star = static_cast<int>(cfg.get_int("n_star")),
                           .alpha = cfg.get_double("alpha"),
                           .c = cfg.get_double("c")};
    params.validate();
    CumulantState full = initial_state(cfg.get_string("initial"), params.N, params.n_star);

    OneParticleCumulants k0;
    k0.values.resize(params.n_star);
    for (int n = 1; n <= params.n_star; ++n)
        k0.values[n - 1] = full.value(n, Classifier(std::vector<int>{n}));
    KineticTrajectory traj = integrate_kinetic(k0, cfg.get_double("t_end"), cfg.get_double("dt"),
                                               cfg.get_double("sample_dt"));
    run.task_done("integration");
    std::ostringstream csv;
    write_kinetic_csv(csv, traj);
    run.write_file("kinetic.csv", csv.str());

    // side-by-side discrepancy against the N-particle hierarchy
    double t0 = cfg.get_double("t0", -1.0);
    if (t0 < 0.0) t0 = default_t0(params);
    AccuracyReport report = accuracy_experiment(full, params, t0, cfg.get_double("t_end"),
                                                cfg.get_double("dt"), cfg.get_double("sample_dt"));
    run.task_done("accuracy");
    std::ostringstream acc_csv;
    write_accuracy_csv(acc_csv, report);
    run.write_file("accuracy.csv", acc_csv.str());
    run.write_file("accuracy.json", accuracy_to_json(report));

    std::cout << "kinetic: " << traj.times.size() << " samples to t=" << traj.times.back()
              << "; sup|delta_" << params.n_star << "| = " << report.sup_delta(params.n_star)
              << " (t0 = " << t0 << ")\n";
    return 0;
}

int mode_compare(Run& run) {
    const Config& cfg = run.cfg;
    long long N = cfg.get_int("N");
    int n_star = std::min<int>(3, static_cast<int>(cfg.get_int("n_star")));
    std::vector<double> times = sample_grid(cfg.get_double("t_end"), cfg.get_double("sample_dt"));

    EnsembleSpec spec;
    spec.N = N;
    spec.replicas = cfg.get_int("replicas");
    spec.seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
    spec.n_max = n_star;
    spec.tuples_per_classifier = static_cast<int>(cfg.get_int("tuples"));
    spec.threads = resolved_threads(cfg);
    spec.sample_times = times;
    spec.initial_sampler = mc_sampler(cfg, N);
    EnsembleRun mc = run_ensemble(spec);
    run.task_done("ensemble");

    HierarchyParams params{.N = N, .n_star = n_star, .alpha = cfg.get_double("alpha"),
                           .c = cfg.get_double("c")};
    params.validate();
    CumulantState s0 = initial_state(cfg.get_string("initial"), N, n_star);
    double dt = cfg.get_double("dt");
    Trajectory traj = integrate_hierarchy(s0, params, times.back(), dt,
                                          cfg.get_double("sample_dt"));
    run.task_done("integration");

    auto state_at = [&](double t) -> const CumulantState& {
        for (size_t i = 0; i < traj.times.size(); ++i)
            if (std::abs(traj.times[i] - t) < 1e-9) return traj.states[i];
        throw usage_error("compare: sample_dt must divide the sample times");
    };

    std::ostringstream csv;
    csv << "t,classifier,mc_cumulant,mc_stderr,hierarchy,zscore\n";
    double worst = 0.0;
    for (size_t ti = 0; ti < times.size(); ++ti) {
        const CumulantState& target = state_at(times[ti]);
        for (const auto& entry : mc.per_time[ti].entries) {
            double expected = entry.classifier.order() == 1
                                  ? 1.0
                                  : target.value(entry.classifier.order(), entry.classifier);
            double z = (entry.cumulant - expected) / std::max(entry.stderr_jackknife, 1e-12);
            worst = std::max(worst, std::abs(z));
            csv << format_double(times[ti]) << ",\"" << entry.classifier.to_string() << "\","
                << format_double(entry.cumulant) << ',' << format_double(entry.stderr_jackknife)
                << ',' << format_double(expected) << ',' << format_double(z) << "\n";
        }
    }
    run.write_file("residuals.csv", csv.str());
    std::cout << "compare: worst |z| = " << worst << " over " << times.size() << " times\n";
    return worst <= 3.0 ? 0 : 4;
}

int mode_norms(Run& run) {
    const Config& cfg = run.cfg;
    long long N = cfg.get_int("N");
    int n_star = static_cast<int>(cfg.get_int("n_star"));
    double alpha = cfg.get_double("alpha");
    double t_end = cfg.get_double("t_end");

    std::vector<double> grid;
    for (int i = 0; i < 100; ++i) grid.push_back(t_end * i / 99.0);
    std::ostringstream csv;
    csv << "n,t,norm,envelope\n";
    for (int n = 2; n <= n_star; ++n) {
        auto op = build_linear_operator(n, N);
        auto curve = semigroup_norm_curve(op.m_main, op.repeated, alpha, N, grid);
        for (size_t i = 0; i < grid.size(); ++i)
            csv << n << ',' << format_double(grid[i]) << ',' << format_double(curve[i]) << ','
                << format_double(10.0 * std::exp(-0.5 * grid[i])) << "\n";
    }
    run.task_done("semigroup");
    run.write_file("semigroup_norms.csv", csv.str());

    CumulantState stat = stationary_state(n_star, N);
    std::ostringstream json;
    json << "[\n";
    for (int n = 2; n <= n_star; ++n) {
        const auto& basis = order_basis(n);
        std::span<const double> rep(stat.values[n - 1].data(), basis.repeated_count());
        if (n > 2) json << ",\n";
        json << alpha_norm_to_json(alpha_norm(rep, alpha, n, N), alpha, N);
    }
    json << "\n]\n";
    run.write_file("stationary_alpha_norms.json", json.str());
    std::cout << "norms: semigroup curves for n in [2," << n_star << "] at N=" << N << "\n";
    return 0;
}

int mode_verify(Run& run) {
    const Config& cfg = run.cfg;
    std::string suite = cfg.get_string("suite", "full");
    auto results = run_acceptance(suite, std::cout, resolved_threads(cfg));
    run.task_done("acceptance");
    run.write_file("verify.json", acceptance_to_json(results, suite));
    for (const auto& r : results)
        if (!r.pass) return 4;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kac-model cumulant workbench"};
    app.require_subcommand(1);

    Options opt;
    std::vector<CLI::App*> modes;
    for (const char* name :
         {"simulate", "hierarchy", "stationary", "kinetic", "compare", "norms", "verify"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", opt.config_path, "TOML config file (flat key = value)");
        sub->add_option("--out", opt.out_dir, "output directory");
        sub->add_option("--N", opt.N, "particle count");
        sub->add_option("--n-star", opt.n_star, "maximal cumulant order");
        sub->add_option("--alpha", opt.alpha, "chaos-norm exponent in (0,1)");
        sub->add_option("--c", opt.c, "chaos-bound exponent");
        sub->add_option("--t-end", opt.t_end, "final time (collision units)");
        sub->add_option("--dt", opt.dt, "integrator step");
        sub->add_option("--sample-dt", opt.sample_dt, "sampling interval");
        sub->add_option("--seed", opt.seed, "root seed");
        sub->add_option("--replicas", opt.replicas, "Monte Carlo replicas");
        sub->add_option("--initial", opt.initial,
                        "initial data: uniform | dirac:peak | dirac:quantile-gauss | "
                        "conditioned:<uniform|gauss|bimodal>");
        sub->add_option("--tuples", opt.tuples, "label tuples per classifier");
        sub->add_option("--threads", opt.threads, "worker threads (0 = hardware)");
        sub->add_option("--burn-in", opt.burn_in, "Metropolis burn-in steps");
        sub->add_option("--thinning", opt.thinning, "Metropolis thinning");
        sub->add_option("--density", opt.density, "conditioned density id");
        sub->add_option("--suite", opt.suite, "verify suite: fast | full");
        sub->add_option("--snapshots", opt.snapshots, "snapshot replica count to export");
        sub->add_option("--t0", opt.t0, "kinetic comparison waiting time");
        modes.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    std::string mode;
    CLI::App* active = nullptr;
    for (CLI::App* sub : modes)
        if (sub->parsed()) {
            active = sub;
            mode = sub->get_name();
        }

    try {
        Run run;
        run.cfg = resolve_config(*active, opt, mode);
        std::string out_dir = opt.out_dir;
        if (active->count("--out") == 0) out_dir = run.cfg.get_string("out", "runs/" + mode);
        run.out = out_dir;
        fs::create_directories(run.out);

        int code = 0;
        if (mode == "simulate") code = mode_simulate(run);
        else if (mode == "hierarchy") code = mode_hierarchy(run);
        else if (mode == "stationary") code = mode_stationary(run);
        else if (mode == "kinetic") code = mode_kinetic(run);
        else if (mode == "compare") code = mode_compare(run);
        else if (mode == "norms") code = mode_norms(run);
        else if (mode == "verify") code = mode_verify(run);
        run.finalize(mode);
        return code;
    } catch (const usage_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const sampling_error& e) {  // parameter ranges outside module preconditions
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const kac::domain_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const divergence_error& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return 3;
    } catch (const kac::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
