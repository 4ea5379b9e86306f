#ifndef PAIRWISE_EM_EXPERIMENTS_HPP
#define PAIRWISE_EM_EXPERIMENTS_HPP

// Monte-Carlo sweeps: initialisation interpolation, noise-level and sample-size
// sweeps, the three-component non-identifiability construction, and CSV/JSON output.
//
// Every (grid point, repetition) cell draws a fresh instance and a fresh
// initialisation from seeds derived as derive_seed(base_seed, grid_index, rep, purpose).
// Cells are independent, so they run on any number of threads and are merged
// back in (grid_index, rep, estimator) order.

#include "pairwise_em/diagnostics.hpp"
#include "pairwise_em/errors.hpp"
#include "pairwise_em/estimators.hpp"
#include "pairwise_em/linalg.hpp"
#include "pairwise_em/model.hpp"
#include "pairwise_em/rng.hpp"
#include "pairwise_em/version.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <vector>

namespace pairwise_em {

enum class SweepKind { InitInterpolation, NoiseSweep, SampleSizeSweep };

enum class SweepEstimator { Spectral, EMFromSpectral, EasyEMFromSpectral, EMFromRandomInit };

inline std::string_view to_string(SweepKind kind) {
    switch (kind) {
    case SweepKind::InitInterpolation: return "init";
    case SweepKind::NoiseSweep: return "noise";
    case SweepKind::SampleSizeSweep: return "sample-size";
    }
    return "unknown";
}

inline SweepKind parse_sweep_kind(std::string_view name) {
    if (name == "init") return SweepKind::InitInterpolation;
    if (name == "noise") return SweepKind::NoiseSweep;
    if (name == "sample-size") return SweepKind::SampleSizeSweep;
    throw ParameterError("unknown sweep kind '" + std::string(name) + "'");
}

inline std::string_view to_string(SweepEstimator e) {
    switch (e) {
    case SweepEstimator::Spectral: return "spectral";
    case SweepEstimator::EMFromSpectral: return "em-from-spectral";
    case SweepEstimator::EasyEMFromSpectral: return "easy-em-from-spectral";
    case SweepEstimator::EMFromRandomInit: return "em-from-random-init";
    }
    return "unknown";
}

inline SweepEstimator parse_sweep_estimator(std::string_view name) {
    for (auto e : {SweepEstimator::Spectral, SweepEstimator::EMFromSpectral, SweepEstimator::EasyEMFromSpectral,
                   SweepEstimator::EMFromRandomInit}) {
        if (name == to_string(e)) {
            return e;
        }
    }
    throw ParameterError("unknown sweep estimator '" + std::string(name) + "'");
}

/// `count` points log-spaced over [lo, hi], endpoints included.
inline std::vector<double> log_grid(double lo, double hi, int count) {
    if (!(lo > 0.0 && hi >= lo) || count < 1) {
        throw ParameterError("log_grid needs 0 < lo <= hi and count >= 1");
    }
    std::vector<double> g(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        const double t = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
        g[static_cast<std::size_t>(k)] = lo * std::pow(hi / lo, t);
    }
    g.front() = lo;
    g.back() = count == 1 ? lo : hi;
    return g;
}

/// Sweep parameters. `grid` holds eta (init), sigma^2 (noise) or N (sample size).
struct SweepConfig {
    SweepKind kind = SweepKind::InitInterpolation;
    int d = 50;
    int n = 1000;
    double sigma = 0.1;
    double eta = 1.0; ///< for EMFromRandomInit outside the init sweep
    std::vector<double> grid;
    DesignKind design = DesignKind::PairwiseUniform;
    std::vector<SweepEstimator> estimators;
    int reps = 100;
    int max_steps = 100;
    double step_tol = 1e-10;
    std::uint64_t base_seed = 1;
    double success_factor = 10.0;

    /// The simulation settings of the reference experiments: d = 50, N = 1000,
    /// sigma = 0.1, 100 repetitions; eta in {0.1, ..., 1} with T = 100 EM steps
    /// for the init sweep; sigma^2 in [0.002, 2] (10 log-spaced points) and
    /// N in [500, 2000] (8 log-spaced integers) with T = 20 steps otherwise.
    static SweepConfig defaults_for(SweepKind kind) {
        SweepConfig c;
        c.kind = kind;
        switch (kind) {
        case SweepKind::InitInterpolation:
            for (int k = 1; k <= 10; ++k) {
                c.grid.push_back(k / 10.0);
            }
            c.estimators = {SweepEstimator::EMFromRandomInit};
            c.max_steps = 100;
            break;
        case SweepKind::NoiseSweep:
            c.grid = log_grid(0.002, 2.0, 10);
            c.estimators = {SweepEstimator::Spectral, SweepEstimator::EMFromSpectral,
                            SweepEstimator::EasyEMFromSpectral};
            c.max_steps = 20;
            break;
        case SweepKind::SampleSizeSweep:
            for (double v : log_grid(500.0, 2000.0, 8)) {
                c.grid.push_back(std::round(v));
            }
            c.estimators = {SweepEstimator::Spectral, SweepEstimator::EMFromSpectral,
                            SweepEstimator::EasyEMFromSpectral};
            c.max_steps = 20;
            break;
        }
        return c;
    }

    void validate() const {
        if (reps < 1) throw ParameterError("reps must be >= 1");
        if (grid.empty()) throw ParameterError("grid must be nonempty");
        if (estimators.empty()) throw ParameterError("estimator list must be nonempty");
        if (d < 2) throw DimensionError("d must be >= 2");
        if (max_steps < 1) throw ParameterError("max_steps must be >= 1");
        if (!(step_tol > 0.0)) throw ParameterError("step_tol must be > 0");
        for (double g : grid) {
            if (kind == SweepKind::InitInterpolation && !(g >= 0.0 && g <= 1.0)) {
                throw ParameterError("eta grid values must lie in [0, 1]");
            }
            if (kind == SweepKind::NoiseSweep && !(g >= 0.0)) {
                throw ParameterError("sigma^2 grid values must be >= 0");
            }
            if (kind == SweepKind::SampleSizeSweep && !(g >= 1.0)) {
                throw ParameterError("N grid values must be >= 1");
            }
        }
    }
};

inline nlohmann::json to_json(const SweepConfig& c) {
    nlohmann::json j;
    j["kind"] = std::string(to_string(c.kind));
    j["d"] = c.d;
    j["N"] = c.n;
    j["sigma"] = c.sigma;
    j["eta"] = c.eta;
    j["grid"] = c.grid;
    j["design"] = std::string(to_string(c.design));
    auto est = nlohmann::json::array();
    for (auto e : c.estimators) {
        est.push_back(std::string(to_string(e)));
    }
    j["estimators"] = std::move(est);
    j["reps"] = c.reps;
    j["max_steps"] = c.max_steps;
    j["step_tol"] = c.step_tol;
    j["base_seed"] = c.base_seed;
    j["success_factor"] = c.success_factor;
    return j;
}

/// Overlay the keys present in `j` onto `base`.
inline SweepConfig merge_config(SweepConfig base, const nlohmann::json& j) {
    if (j.contains("kind")) base.kind = parse_sweep_kind(j["kind"].get<std::string>());
    if (j.contains("d")) base.d = j["d"].get<int>();
    if (j.contains("N")) base.n = j["N"].get<int>();
    if (j.contains("sigma")) base.sigma = j["sigma"].get<double>();
    if (j.contains("eta")) base.eta = j["eta"].get<double>();
    if (j.contains("grid")) base.grid = j["grid"].get<std::vector<double>>();
    if (j.contains("design")) base.design = parse_design(j["design"].get<std::string>());
    if (j.contains("estimators")) {
        base.estimators.clear();
        for (const auto& e : j["estimators"]) {
            base.estimators.push_back(parse_sweep_estimator(e.get<std::string>()));
        }
    }
    if (j.contains("reps")) base.reps = j["reps"].get<int>();
    if (j.contains("max_steps")) base.max_steps = j["max_steps"].get<int>();
    if (j.contains("step_tol")) base.step_tol = j["step_tol"].get<double>();
    if (j.contains("base_seed")) base.base_seed = j["base_seed"].get<std::uint64_t>();
    if (j.contains("success_factor")) base.success_factor = j["success_factor"].get<double>();
    return base;
}

/// One (grid point, repetition, estimator) result.
struct SweepRow {
    double grid_value = 0.0;
    int rep = 0;
    std::uint64_t seed = 0;
    std::string estimator;
    double err_init_l2sq = 0.0;
    double err_final_l2sq = 0.0;
    double err_final_linf = 0.0;
    int steps = 0;
    bool converged = false;
    double optimal_rate = 0.0;
    bool success = false;

    friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

inline constexpr std::string_view csv_header =
    "grid_value,rep,seed,estimator,err_init_l2sq,err_final_l2sq,err_final_linf,steps,converged,optimal_rate,success";

namespace detail {

struct CellParams {
    int n;
    double sigma;
    double eta;
};

inline CellParams cell_params(const SweepConfig& c, double g) {
    switch (c.kind) {
    case SweepKind::InitInterpolation: return {c.n, c.sigma, g};
    case SweepKind::NoiseSweep: return {c.n, std::sqrt(g), c.eta};
    case SweepKind::SampleSizeSweep: return {static_cast<int>(std::lround(g)), c.sigma, c.eta};
    }
    return {c.n, c.sigma, c.eta};
}

inline bool uses_spectral(SweepEstimator e) { return e != SweepEstimator::EMFromRandomInit; }

inline double nan() { return std::numeric_limits<double>::quiet_NaN(); }

inline std::vector<SweepRow> run_cell(const SweepConfig& c, std::size_t grid_index, int rep) {
    const double g = c.grid[grid_index];
    const CellParams p = cell_params(c, g);
    const std::uint64_t inst_seed = derive_seed(c.base_seed, grid_index, static_cast<std::uint64_t>(rep), Purpose::Instance);
    const std::uint64_t init_seed = derive_seed(c.base_seed, grid_index, static_cast<std::uint64_t>(rep), Purpose::Init);

    const Instance inst = generate(c.d, p.n, p.sigma, LinearTruth{c.d}, c.design, inst_seed);
    const double rate = optimal_rate(inst);

    IterationConfig it;
    it.max_steps = c.max_steps;
    it.step_tol = c.step_tol;
    it.keep_every = 0;
    it.warn_disconnected = false;

    std::optional<SpectralResult> spectral;
    bool spectral_failed = false;
    const bool need_spectral = std::any_of(c.estimators.begin(), c.estimators.end(), uses_spectral);
    if (need_spectral) {
        try {
            spectral = spectral_init(inst);
        } catch (const SpectralDegenerate&) {
            spectral_failed = true;
        } catch (const ContractViolation&) {
            spectral_failed = true;
        }
    }

    std::vector<SweepRow> rows;
    for (SweepEstimator e : c.estimators) {
        SweepRow row;
        row.grid_value = g;
        row.rep = rep;
        row.seed = inst_seed;
        row.estimator = std::string(to_string(e));
        row.optimal_rate = rate;

        auto fail = [&] {
            row.err_init_l2sq = row.err_final_l2sq = row.err_final_linf = nan();
            row.steps = 0;
            row.converged = false;
        };

        try {
            if (uses_spectral(e) && spectral_failed) {
                fail();
            } else if (e == SweepEstimator::Spectral) {
                const auto err = sign_resolved_errors(spectral->theta_tilde.values(), inst.theta_star);
                row.err_init_l2sq = err.l2_squared;
                row.err_final_l2sq = err.l2_squared;
                row.err_final_linf = err.linf;
                row.steps = 0;
                row.converged = true;
            } else {
                Vector theta0;
                EstimatorKind kind = EstimatorKind::EM;
                if (e == SweepEstimator::EMFromRandomInit) {
                    Rng rng(init_seed);
                    theta0 = random_init(inst.theta_star, p.eta, rng).values();
                } else {
                    theta0 = spectral->theta_tilde.values();
                    if (e == SweepEstimator::EasyEMFromSpectral) {
                        kind = EstimatorKind::EasyEM;
                    }
                }
                if (inst.sigma <= it.sigma_floor && kind == EstimatorKind::EM) {
                    kind = EstimatorKind::AM;
                }
                row.err_init_l2sq = sign_resolved_errors(theta0, inst.theta_star).l2_squared;
                if (kind == EstimatorKind::EasyEM && inst.sigma <= it.sigma_floor) {
                    fail();
                } else {
                    const IterationTrace trace = run(inst, theta0, kind, it);
                    const auto err = sign_resolved_errors(trace.final, inst.theta_star);
                    row.err_final_l2sq = err.l2_squared;
                    row.err_final_linf = err.linf;
                    row.steps = trace.steps_taken;
                    row.converged = trace.converged;
                }
            }
        } catch (const Error&) {
            fail();
        }
        row.success = row.err_final_l2sq <= c.success_factor * row.optimal_rate;
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace detail

/// Run every (grid point, rep) cell on `jobs` threads; rows come back in
/// (grid_index, rep, estimator-list) order regardless of scheduling.
inline std::vector<SweepRow> run_sweep(const SweepConfig& config, int jobs = 1) {
    config.validate();
    const std::size_t reps = static_cast<std::size_t>(config.reps);
    const std::size_t cells = config.grid.size() * reps;
    std::vector<std::vector<SweepRow>> slots(cells);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next.fetch_add(1); k < cells; k = next.fetch_add(1)) {
            slots[k] = detail::run_cell(config, k / reps, static_cast<int>(k % reps));
        }
    };
    const int workers = std::clamp(jobs, 1, static_cast<int>(std::min<std::size_t>(cells, 1024)));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
    }

    std::vector<SweepRow> rows;
    rows.reserve(cells * config.estimators.size());
    for (auto& slot : slots) {
        for (auto& row : slot) {
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

inline std::vector<SweepRow> run_init_sweep(const SweepConfig& config, int jobs = 1) {
    if (config.kind != SweepKind::InitInterpolation) {
        throw ParameterError("run_init_sweep needs an init-interpolation config");
    }
    return run_sweep(config, jobs);
}

inline std::vector<SweepRow> run_noise_sweep(const SweepConfig& config, int jobs = 1) {
    if (config.kind != SweepKind::NoiseSweep) {
        throw ParameterError("run_noise_sweep needs a noise-sweep config");
    }
    return run_sweep(config, jobs);
}

inline std::vector<SweepRow> run_sample_sweep(const SweepConfig& config, int jobs = 1) {
    if (config.kind != SweepKind::SampleSizeSweep) {
        throw ParameterError("run_sample_sweep needs a sample-size-sweep config");
    }
    return run_sweep(config, jobs);
}

/// Aggregates for one (grid value, estimator) group.
struct SweepSummary {
    double grid_value = 0.0;
    std::string estimator;
    int count = 0;
    double mean_err_init = 0.0;
    double mean_err_final = 0.0;
    double median_err_final = 0.0;
    double mean_optimal_rate = 0.0;
    double median_optimal_rate = 0.0;
    double success_fraction = 0.0;
};

namespace detail {

inline double median_of(std::vector<double> v) {
    if (v.empty()) {
        return nan();
    }
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1) {
        return hi;
    }
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) {
        return nan();
    }
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

} // namespace detail

/// Mean and median per (grid value, estimator), in first-appearance order.
/// Failed rows (NaN errors) count against the success fraction and are
/// excluded from the error aggregates.
inline std::vector<SweepSummary> summarize(const std::vector<SweepRow>& rows) {
    struct Acc {
        std::vector<double> init, fin, rate;
        int count = 0;
        int successes = 0;
    };
    std::vector<std::pair<double, std::string>> order;
    std::map<std::pair<double, std::string>, Acc> groups;
    for (const auto& r : rows) {
        const auto key = std::make_pair(r.grid_value, r.estimator);
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) {
            order.push_back(key);
        }
        Acc& a = it->second;
        ++a.count;
        a.successes += r.success ? 1 : 0;
        a.rate.push_back(r.optimal_rate);
        if (!std::isnan(r.err_final_l2sq)) {
            a.init.push_back(r.err_init_l2sq);
            a.fin.push_back(r.err_final_l2sq);
        }
    }
    std::vector<SweepSummary> out;
    for (const auto& key : order) {
        const Acc& a = groups.at(key);
        SweepSummary s;
        s.grid_value = key.first;
        s.estimator = key.second;
        s.count = a.count;
        s.mean_err_init = detail::mean_of(a.init);
        s.mean_err_final = detail::mean_of(a.fin);
        s.median_err_final = detail::median_of(a.fin);
        s.mean_optimal_rate = detail::mean_of(a.rate);
        s.median_optimal_rate = detail::median_of(a.rate);
        s.success_fraction = static_cast<double>(a.successes) / a.count;
        out.push_back(std::move(s));
    }
    return out;
}

enum class RowFormat { CSV, JSON };

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, ',')) {
        fields.push_back(cur);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

inline bool parse_bool(const std::string& s) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw ContractViolation("expected true/false, got '" + s + "'");
}

inline double parse_double(const std::string& s) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) {
        throw ContractViolation("trailing characters in number '" + s + "'");
    }
    return v;
}

inline nlohmann::json json_number(double v) {
    // JSON has no NaN; failed reps serialize as null.
    return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v);
}

inline double number_from_json(const nlohmann::json& j) {
    return j.is_null() ? nan() : j.get<double>();
}

} // namespace detail

inline std::string rows_to_csv(const std::vector<SweepRow>& rows) {
    std::string out(csv_header);
    out += '\n';
    for (const auto& r : rows) {
        out += detail::format_double(r.grid_value) + ',' + std::to_string(r.rep) + ',' + std::to_string(r.seed) + ',' +
               r.estimator + ',' + detail::format_double(r.err_init_l2sq) + ',' +
               detail::format_double(r.err_final_l2sq) + ',' + detail::format_double(r.err_final_linf) + ',' +
               std::to_string(r.steps) + ',' + (r.converged ? "true" : "false") + ',' +
               detail::format_double(r.optimal_rate) + ',' + (r.success ? "true" : "false") + '\n';
    }
    return out;
}

inline std::vector<SweepRow> rows_from_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != csv_header) {
        throw ContractViolation("CSV header does not match the sweep schema");
    }
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto f = detail::split_csv_line(line);
        if (f.size() != 11) {
            throw ContractViolation("CSV row has " + std::to_string(f.size()) + " fields, expected 11");
        }
        SweepRow r;
        r.grid_value = detail::parse_double(f[0]);
        r.rep = std::stoi(f[1]);
        r.seed = std::stoull(f[2]);
        r.estimator = f[3];
        r.err_init_l2sq = detail::parse_double(f[4]);
        r.err_final_l2sq = detail::parse_double(f[5]);
        r.err_final_linf = detail::parse_double(f[6]);
        r.steps = std::stoi(f[7]);
        r.converged = detail::parse_bool(f[8]);
        r.optimal_rate = detail::parse_double(f[9]);
        r.success = detail::parse_bool(f[10]);
        rows.push_back(std::move(r));
    }
    return rows;
}

inline nlohmann::json rows_to_json(const std::vector<SweepRow>& rows) {
    auto arr = nlohmann::json::array();
    for (const auto& r : rows) {
        arr.push_back({
            {"grid_value", r.grid_value},
            {"rep", r.rep},
            {"seed", r.seed},
            {"estimator", r.estimator},
            {"err_init_l2sq", detail::json_number(r.err_init_l2sq)},
            {"err_final_l2sq", detail::json_number(r.err_final_l2sq)},
            {"err_final_linf", detail::json_number(r.err_final_linf)},
            {"steps", r.steps},
            {"converged", r.converged},
            {"optimal_rate", r.optimal_rate},
            {"success", r.success},
        });
    }
    return arr;
}

inline std::vector<SweepRow> rows_from_json(const nlohmann::json& arr) {
    std::vector<SweepRow> rows;
    for (const auto& j : arr) {
        SweepRow r;
        r.grid_value = j.at("grid_value").get<double>();
        r.rep = j.at("rep").get<int>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.estimator = j.at("estimator").get<std::string>();
        r.err_init_l2sq = detail::number_from_json(j.at("err_init_l2sq"));
        r.err_final_l2sq = detail::number_from_json(j.at("err_final_l2sq"));
        r.err_final_linf = detail::number_from_json(j.at("err_final_linf"));
        r.steps = j.at("steps").get<int>();
        r.converged = j.at("converged").get<bool>();
        r.optimal_rate = j.at("optimal_rate").get<double>();
        r.success = j.at("success").get<bool>();
        rows.push_back(std::move(r));
    }
    return rows;
}

/// Sidecar metadata: config, seed rule, generator and library version.
inline nlohmann::json sweep_metadata(const SweepConfig& config) {
    nlohmann::json j;
    j["config"] = to_json(config);
    j["seed_rule"] = std::string(seed_rule);
    j["rng"] = std::string(rng_name);
    j["library_version"] = std::string(version);
    j["grid_note"] = "noise sweep grid is sigma^2 (10 log-spaced points by default), sample-size grid is N "
                     "(8 log-spaced integers by default)";
    j["success_rule"] = "err_final_l2sq <= success_factor * optimal_rate";
    j["csv_header"] = std::string(csv_header);
    return j;
}

namespace detail {

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << text;
    out.flush();
    if (!out) {
        throw IoError("write to '" + path + "' failed");
    }
}

} // namespace detail

/// Write rows as CSV (17 significant digits) or JSON. When metadata is given it
/// goes to <path>.meta.json.
inline void write_rows(const std::vector<SweepRow>& rows, const std::string& path, RowFormat format,
                       const std::optional<nlohmann::json>& metadata = std::nullopt) {
    if (format == RowFormat::CSV) {
        detail::write_text(path, rows_to_csv(rows));
    } else {
        detail::write_text(path, rows_to_json(rows).dump(2) + "\n");
    }
    if (metadata) {
        detail::write_text(path + ".meta.json", metadata->dump(2) + "\n");
    }
}

inline std::vector<SweepRow> read_rows(const std::string& path, RowFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    try {
        if (format == RowFormat::CSV) {
            return rows_from_csv(in);
        }
        return rows_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw IoError("'" + path + "': " + e.what());
    } catch (const ContractViolation& e) {
        throw IoError("'" + path + "': " + e.what());
    }
}

/// Two three-component mixtures that produce identical pairwise-difference
/// multisets. Components of A start (1,2), (3,3), (2,4); components of B start
/// (2,2), (1,3), (3,4); all share the tail theta_3..theta_d.
struct IdentifiabilityDemo {
    std::array<Vector, 3> mixture_a;
    std::array<Vector, 3> mixture_b;

    struct PairObservations {
        int i = 0; ///< zero-based
        int j = 0;
        std::array<double, 3> a{}; ///< sorted
        std::array<double, 3> b{};
    };
    std::vector<PairObservations> observations;
    bool equal = false;
};

inline IdentifiabilityDemo identifiability_demo(const std::vector<double>& theta_tail) {
    const int d = static_cast<int>(theta_tail.size()) + 2;
    IdentifiabilityDemo demo;
    const std::array<std::array<double, 2>, 3> heads_a{{{1, 2}, {3, 3}, {2, 4}}};
    const std::array<std::array<double, 2>, 3> heads_b{{{2, 2}, {1, 3}, {3, 4}}};
    auto build = [&](const std::array<double, 2>& head) {
        Vector v(d);
        v[0] = head[0];
        v[1] = head[1];
        for (int k = 2; k < d; ++k) {
            v[k] = theta_tail[static_cast<std::size_t>(k - 2)];
        }
        return v;
    };
    for (std::size_t l = 0; l < 3; ++l) {
        demo.mixture_a[l] = build(heads_a[l]);
        demo.mixture_b[l] = build(heads_b[l]);
    }

    demo.equal = true;
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            IdentifiabilityDemo::PairObservations obs;
            obs.i = i;
            obs.j = j;
            for (std::size_t l = 0; l < 3; ++l) {
                obs.a[l] = demo.mixture_a[l][i] - demo.mixture_a[l][j];
                obs.b[l] = demo.mixture_b[l][i] - demo.mixture_b[l][j];
            }
            std::sort(obs.a.begin(), obs.a.end());
            std::sort(obs.b.begin(), obs.b.end());
            demo.equal = demo.equal && obs.a == obs.b;
            demo.observations.push_back(obs);
        }
    }
    return demo;
}

inline nlohmann::json to_json(const IdentifiabilityDemo& demo) {
    nlohmann::json j;
    auto comps = [](const std::array<Vector, 3>& m) {
        auto arr = nlohmann::json::array();
        for (const auto& v : m) arr.push_back(to_json(v));
        return arr;
    };
    j["mixture_a"] = comps(demo.mixture_a);
    j["mixture_b"] = comps(demo.mixture_b);
    auto obs = nlohmann::json::array();
    for (const auto& o : demo.observations) {
        obs.push_back({{"pair", {o.i + 1, o.j + 1}}, {"a", o.a}, {"b", o.b}});
    }
    j["observations"] = std::move(obs);
    j["equal"] = demo.equal;
    return j;
}

} // namespace pairwise_em

#endif // PAIRWISE_EM_EXPERIMENTS_HPP
