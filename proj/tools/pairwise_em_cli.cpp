// pairwise-em: generate instances, fit EM / Easy-EM / AM, print diagnostics and
// run the Monte-Carlo sweeps.
//
// Exit codes: 0 success, 1 usage error, 2 runtime or data error.

#include "pairwise_em/pairwise_em.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace pe = pairwise_em;
using nlohmann::json;

namespace {

constexpr int exit_usage = 1;
constexpr int exit_runtime = 2;

/// A failure that should be reported as a usage error.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw pe::IoError("cannot open '" + path + "'");
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw pe::IoError("'" + path + "': " + e.what());
    }
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw pe::IoError("cannot open '" + path + "' for writing");
    }
    out << j.dump(2) << '\n';
    if (!out) {
        throw pe::IoError("write to '" + path + "' failed");
    }
}

int default_jobs() {
    if (const char* env = std::getenv("PAIRWISE_EM_JOBS")) {
        try {
            const int v = std::stoi(env);
            if (v >= 1) {
                return v;
            }
        } catch (const std::exception&) {
        }
        std::cerr << "warning: ignoring invalid PAIRWISE_EM_JOBS='" << env << "'\n";
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void print_error_report(const pe::ErrorReport& err) {
    std::printf("error (sign-resolved): linf = %.6g  l2^2 = %.6g  sign = %+d\n", err.linf, err.l2_squared,
                err.sign_used);
}

void print_theory_report(const pe::TheoryReport& rep) {
    std::printf("optimal rate sigma^2 tr((sum x x^T)^+) = %.6g\n", rep.optimal_rate);
    std::printf("tau = %.6g (tau/C2 = %.6g, C2 = %g)", rep.tau, rep.tau_over_c2, rep.c2);
    if (rep.t_steps) {
        std::printf("  T = %d", *rep.t_steps);
    }
    std::printf("\n");
    std::printf("||Sigma||_op = %.6g [%s <= 3]  ||Sigma^+||_op = %.6g [%s <= 5]\n", rep.spectral_norm_cov,
                rep.op_norm_ok ? "ok" : "FAIL", rep.spectral_norm_dagger, rep.dagger_op_norm_ok ? "ok" : "FAIL");
    std::printf("tr(Sigma^+) = %.6g [%s >= (d-1)/3]  rank = %d [%s d-1]\n", rep.trace_dagger,
                rep.trace_ok ? "ok" : "FAIL", rep.rank, rep.full_rank ? "=" : "!=");
    std::printf("||Sigma^+||_inf in [%.6g, %.6g]\n", rep.linf_dagger_lower, rep.linf_dagger_upper);
}

// ---------------------------------------------------------------------------
// gen

struct GenOptions {
    int d = 50;
    int n = 1000;
    double sigma = 0.1;
    std::string design = "pairwise";
    std::uint64_t seed = 1;
    std::string truth;
    std::string out;
};

void add_gen(CLI::App& app, GenOptions& o, std::function<void()>& action) {
    auto* cmd = app.add_subcommand("gen", "Generate a synthetic instance and write it as JSON");
    cmd->add_option("--d", o.d, "Dimension")->capture_default_str();
    cmd->add_option("--n", o.n, "Number of observations (ignored for the exhaustive design)")->capture_default_str();
    cmd->add_option("--sigma", o.sigma, "Noise standard deviation")->capture_default_str();
    cmd->add_option("--design", o.design, "pairwise | gaussian | exhaustive")
        ->check(CLI::IsMember({"pairwise", "gaussian", "exhaustive"}))
        ->capture_default_str();
    cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    cmd->add_option("--truth", o.truth, "JSON file with an explicit ground truth array (default: linear theta*)");
    cmd->add_option("--out", o.out, "Output path for the instance JSON")->required();
    cmd->callback([&] {
        action = [&] {
            pe::GroundTruthSpec spec = pe::LinearTruth{o.d};
            if (!o.truth.empty()) {
                spec = pe::vector_from_json(read_json_file(o.truth));
            }
            const auto inst = pe::generate(o.d, o.n, o.sigma, spec, pe::parse_design(o.design), o.seed);
            write_json_file(o.out, pe::to_json(inst));
            std::printf("wrote %s (d = %d, N = %d, sigma = %g, design = %s)\n", o.out.c_str(), inst.d, inst.n,
                        inst.sigma, std::string(pe::to_string(inst.design)).c_str());
        };
    });
}

// ---------------------------------------------------------------------------
// fit

struct FitOptions {
    std::string instance;
    std::string estimator = "em";
    std::string init = "spectral";
    int max_steps = 100;
    double tol = 1e-10;
    std::uint64_t seed = 1;
    double c2 = 1.0;
    int thin = 1;
    std::string out;
};

pe::Vector initial_point(const pe::Instance& inst, const std::string& init, std::uint64_t seed) {
    if (init == "spectral") {
        return pe::spectral_init(inst).theta_tilde.values();
    }
    if (init.rfind("random:", 0) == 0) {
        double eta = 0.0;
        try {
            eta = std::stod(init.substr(7));
        } catch (const std::exception&) {
            throw UsageError("bad --init value '" + init + "'");
        }
        pe::Rng rng(pe::derive_seed(seed, 0, 0, pe::Purpose::Init));
        return pe::random_init(inst.theta_star, eta, rng).values();
    }
    if (init.rfind("file:", 0) == 0) {
        json j = read_json_file(init.substr(5));
        if (j.is_object()) {
            j = j.contains("theta") ? j["theta"] : j.at("final");
        }
        pe::Vector v = pe::vector_from_json(j);
        if (v.size() != inst.d) {
            throw pe::DimensionError("initial point has length " + std::to_string(v.size()) + ", expected " +
                                     std::to_string(inst.d));
        }
        return v;
    }
    throw UsageError("bad --init value '" + init + "' (expected spectral | random:ETA | file:PATH)");
}

void add_fit(CLI::App& app, FitOptions& o, std::function<void()>& action) {
    auto* cmd = app.add_subcommand("fit", "Run EM, Easy-EM or AM on an instance");
    cmd->add_option("--instance", o.instance, "Instance JSON")->required();
    cmd->add_option("--estimator", o.estimator, "em | easy-em | am")
        ->check(CLI::IsMember({"em", "easy-em", "am"}))
        ->capture_default_str();
    cmd->add_option("--init", o.init, "spectral | random:ETA | file:PATH")->capture_default_str();
    cmd->add_option("--max-steps", o.max_steps, "Maximum iterations (reference T = 100)")->capture_default_str();
    cmd->add_option("--tol", o.tol, "Stop when the l_inf step change is at most this")->capture_default_str();
    cmd->add_option("--seed", o.seed, "Seed for random:ETA initialisation")->capture_default_str();
    cmd->add_option("--C2", o.c2, "Constant in tau = C2 sigma sqrt(d/N log N)")->capture_default_str();
    cmd->add_option("--thin", o.thin, "Keep every k-th iterate in the trace JSON")->capture_default_str();
    cmd->add_option("--out", o.out, "Write the iteration trace JSON here");
    cmd->callback([&] {
        action = [&] {
            const auto inst = pe::instance_from_json(read_json_file(o.instance));
            const pe::Vector theta0 = initial_point(inst, o.init, o.seed);
            pe::IterationConfig cfg;
            cfg.max_steps = o.max_steps;
            cfg.step_tol = o.tol;
            cfg.keep_every = std::max(o.thin, 1);
            const auto trace = pe::run(inst, theta0, pe::parse_estimator_kind(o.estimator), cfg);
            if (!o.out.empty()) {
                write_json_file(o.out, pe::to_json(trace));
            }
            std::printf("%s: %d step(s), %s\n", o.estimator.c_str(), trace.steps_taken,
                        trace.converged ? "converged" : "not converged");
            const auto err0 = pe::sign_resolved_errors(theta0, inst.theta_star);
            std::printf("initial ");
            print_error_report(err0);
            print_error_report(pe::sign_resolved_errors(trace.final, inst.theta_star));
            if (inst.is_pairwise()) {
                pe::ReportOptions ro;
                ro.c2 = o.c2;
                ro.theta0_linf_err = err0.linf;
                print_theory_report(pe::covariance_report(inst, ro));
            } else {
                std::printf("optimal rate sigma^2 tr((sum x x^T)^+) = %.6g\n", pe::optimal_rate(inst));
            }
        };
    });
}

// ---------------------------------------------------------------------------
// diagnose

struct DiagnoseOptions {
    std::string instance;
    std::optional<double> delta;
    double c2 = 1.0;
    int probes = 256;
    std::uint64_t seed = 1;
};

void add_diagnose(CLI::App& app, DiagnoseOptions& o, std::function<void()>& action) {
    auto* cmd = app.add_subcommand("diagnose", "Covariance report, separation profile and optimal rate as JSON");
    cmd->add_option("--instance", o.instance, "Instance JSON")->required();
    cmd->add_option("--delta", o.delta, "Radius for the separation profile (default 1/d)");
    cmd->add_option("--C2", o.c2, "Constant in tau")->capture_default_str();
    cmd->add_option("--probes", o.probes, "Random probes for the l_inf lower bound")->capture_default_str();
    cmd->add_option("--seed", o.seed, "Seed for the probes")->capture_default_str();
    cmd->callback([&] {
        action = [&] {
            const auto inst = pe::instance_from_json(read_json_file(o.instance));
            json j;
            if (inst.is_pairwise()) {
                pe::ReportOptions ro;
                ro.c2 = o.c2;
                ro.linf_probes = o.probes;
                ro.probe_seed = pe::derive_seed(o.seed, 0, 0, pe::Purpose::Probe);
                j["covariance_report"] = pe::to_json(pe::covariance_report(inst, ro));
            }
            const double delta = o.delta.value_or(1.0 / inst.d);
            const auto prof = pe::separation_profile(inst.theta_star, delta);
            j["separation_profile"] = {{"delta", prof.delta}, {"sizes", prof.sizes}};
            j["optimal_rate"] = pe::optimal_rate(inst);
            std::cout << j.dump(2) << '\n';
        };
    });
}

// ---------------------------------------------------------------------------
// sweeps

struct SweepOptions {
    std::string config;
    std::optional<int> d, n, reps, max_steps;
    std::optional<double> sigma, eta, tol, success_factor;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> design;
    std::vector<double> grid;
    std::vector<std::string> estimators;
    std::string out;
    std::string format = "csv";
    std::optional<int> jobs;
    bool quiet = false;
};

void add_sweep(CLI::App& app, const std::string& name, pe::SweepKind kind, SweepOptions& o,
               std::function<void()>& action) {
    const auto defaults = pe::SweepConfig::defaults_for(kind);
    std::string grid_help;
    switch (kind) {
    case pe::SweepKind::InitInterpolation: grid_help = "eta values (default 0.1, 0.2, ..., 1)"; break;
    case pe::SweepKind::NoiseSweep: grid_help = "sigma^2 values (default 10 log-spaced points in [0.002, 2])"; break;
    case pe::SweepKind::SampleSizeSweep: grid_help = "N values (default 8 log-spaced integers in [500, 2000])"; break;
    }
    std::string est_default;
    for (auto e : defaults.estimators) {
        est_default += (est_default.empty() ? "" : " ") + std::string(pe::to_string(e));
    }

    auto* cmd = app.add_subcommand(name, "Run the " + std::string(pe::to_string(kind)) + " sweep and write rows");
    cmd->add_option("--config", o.config, "JSON config file (flags override it)");
    cmd->add_option("--d", o.d, "Dimension [default: 50]");
    cmd->add_option("--n", o.n, "Sample size [default: 1000]");
    cmd->add_option("--sigma", o.sigma, "Noise standard deviation [default: 0.1]");
    cmd->add_option("--eta", o.eta, "Interpolation weight for em-from-random-init outside the init sweep [default: 1]");
    cmd->add_option("--grid", o.grid, grid_help)->delimiter(',');
    cmd->add_option("--design", o.design, "pairwise | gaussian | exhaustive [default: pairwise]")
        ->check(CLI::IsMember({"pairwise", "gaussian", "exhaustive"}));
    cmd->add_option("--estimators", o.estimators,
                    "Comma list of spectral, em-from-spectral, easy-em-from-spectral, em-from-random-init [default: " +
                        est_default + "]")
        ->delimiter(',');
    cmd->add_option("--reps", o.reps, "Repetitions per grid point [default: 100]");
    cmd->add_option("--max-steps", o.max_steps,
                    "EM steps per run [default: " + std::to_string(defaults.max_steps) + "]");
    cmd->add_option("--tol", o.tol, "l_inf step-change stopping threshold [default: 1e-10]");
    cmd->add_option("--seed", o.seed, "Base seed [default: 1]");
    cmd->add_option("--success-factor", o.success_factor, "Success if final l2^2 <= factor * optimal rate [default: 10]");
    cmd->add_option("--out", o.out, "Output rows file")->required();
    cmd->add_option("--format", o.format, "csv | json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    cmd->add_option("--jobs", o.jobs, "Worker threads [default: $PAIRWISE_EM_JOBS or number of cores]");
    cmd->add_flag("--quiet", o.quiet, "Do not print the summary table");
    cmd->callback([&, kind] {
        action = [&, kind] {
            pe::SweepConfig c = pe::SweepConfig::defaults_for(kind);
            if (!o.config.empty()) {
                c = pe::merge_config(c, read_json_file(o.config));
                if (c.kind != kind) {
                    throw UsageError("config file kind does not match the subcommand");
                }
            }
            if (o.d) c.d = *o.d;
            if (o.n) c.n = *o.n;
            if (o.sigma) c.sigma = *o.sigma;
            if (o.eta) c.eta = *o.eta;
            if (!o.grid.empty()) c.grid = o.grid;
            if (o.design) c.design = pe::parse_design(*o.design);
            if (!o.estimators.empty()) {
                c.estimators.clear();
                for (const auto& e : o.estimators) {
                    try {
                        c.estimators.push_back(pe::parse_sweep_estimator(e));
                    } catch (const pe::ParameterError& err) {
                        throw UsageError(err.what());
                    }
                }
            }
            if (o.reps) c.reps = *o.reps;
            if (o.max_steps) c.max_steps = *o.max_steps;
            if (o.tol) c.step_tol = *o.tol;
            if (o.seed) c.base_seed = *o.seed;
            if (o.success_factor) c.success_factor = *o.success_factor;
            try {
                c.validate();
            } catch (const pe::Error& err) {
                throw UsageError(err.what());
            }

            const int jobs = o.jobs.value_or(default_jobs());
            const auto rows = pe::run_sweep(c, jobs);
            const auto fmt = o.format == "json" ? pe::RowFormat::JSON : pe::RowFormat::CSV;
            pe::write_rows(rows, o.out, fmt, pe::sweep_metadata(c));
            if (!o.quiet) {
                std::printf("%-12s %-22s %6s %12s %12s %12s %12s %8s\n", "grid", "estimator", "reps", "mean_init",
                            "mean_final", "median_final", "median_rate", "success");
                for (const auto& s : pe::summarize(rows)) {
                    std::printf("%-12.6g %-22s %6d %12.5g %12.5g %12.5g %12.5g %8.2f\n", s.grid_value,
                                s.estimator.c_str(), s.count, s.mean_err_init, s.mean_err_final, s.median_err_final,
                                s.median_optimal_rate, s.success_fraction);
                }
            }
            std::printf("wrote %zu rows to %s (metadata: %s.meta.json)\n", rows.size(), o.out.c_str(), o.out.c_str());
        };
    });
}

// ---------------------------------------------------------------------------
// identifiability

struct IdentOptions {
    int d = 5;
    std::uint64_t seed = 1;
    std::string out;
};

void add_identifiability(CLI::App& app, IdentOptions& o, std::function<void()>& action) {
    auto* cmd = app.add_subcommand("identifiability",
                                   "Show two 3-component mixtures with identical pairwise observations");
    cmd->add_option("--d", o.d, "Dimension (>= 2)")->capture_default_str()->check(CLI::Range(2, 100000));
    cmd->add_option("--seed", o.seed, "Seed for the shared tail coordinates")->capture_default_str();
    cmd->add_option("--out", o.out, "Write the demo as JSON");
    cmd->callback([&] {
        action = [&] {
            pe::Rng rng(o.seed);
            std::uniform_real_distribution<double> unif(-5.0, 5.0);
            std::vector<double> tail(static_cast<std::size_t>(o.d - 2));
            for (auto& t : tail) {
                t = unif(rng);
            }
            const auto demo = pe::identifiability_demo(tail);
            for (const auto& obs : demo.observations) {
                std::printf("(%d,%d)  A {%.6g, %.6g, %.6g}  B {%.6g, %.6g, %.6g}\n", obs.i + 1, obs.j + 1, obs.a[0],
                            obs.a[1], obs.a[2], obs.b[0], obs.b[1], obs.b[2]);
            }
            if (!o.out.empty()) {
                write_json_file(o.out, pe::to_json(demo));
            }
            std::printf("verdict: %s\n", demo.equal ? "EQUAL" : "NOT EQUAL");
        };
    });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pairwise-comparison mixture of linear regressions: EM, Easy-EM, AM and spectral initialisation"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", std::string(pe::version));

    std::function<void()> action;
    GenOptions gen;
    FitOptions fit;
    DiagnoseOptions diag;
    SweepOptions sweep_init, sweep_noise, sweep_n;
    IdentOptions ident;
    add_gen(app, gen, action);
    add_fit(app, fit, action);
    add_diagnose(app, diag, action);
    add_sweep(app, "sweep-init", pe::SweepKind::InitInterpolation, sweep_init, action);
    add_sweep(app, "sweep-noise", pe::SweepKind::NoiseSweep, sweep_noise, action);
    add_sweep(app, "sweep-n", pe::SweepKind::SampleSizeSweep, sweep_n, action);
    add_identifiability(app, ident, action);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    try {
        if (action) {
            action();
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_runtime;
    }
    return 0;
}
