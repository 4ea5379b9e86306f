#ifndef PAIRWISE_EM_DIAGNOSTICS_HPP
#define PAIRWISE_EM_DIAGNOSTICS_HPP

// Error metrics, the optimal l2 rate, convergence-theory quantities and
// covariance health checks.

#include "pairwise_em/errors.hpp"
#include "pairwise_em/linalg.hpp"
#include "pairwise_em/model.hpp"
#include "pairwise_em/rng.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace pairwise_em {

/// Distance to the nearer of +theta* and -theta*. Both norms use the same sign.
struct ErrorReport {
    double linf = 0.0;
    double l2_squared = 0.0;
    int sign_used = 1;
};

inline ErrorReport sign_resolved_errors(const Vector& theta, const CenteredVector& theta_star) {
    if (theta.size() != theta_star.size()) {
        throw DimensionError("sign_resolved_errors: length " + std::to_string(theta.size()) + " vs " +
                             std::to_string(theta_star.size()));
    }
    const Vector plus = theta - theta_star.values();
    const Vector minus = theta + theta_star.values();
    const double l2_plus = plus.squaredNorm();
    const double l2_minus = minus.squaredNorm();
    if (l2_minus < l2_plus) {
        return {linf_norm(minus), l2_minus, -1};
    }
    return {linf_norm(plus), l2_plus, 1};
}

/// sigma^2 tr((sum_r x_r x_r^T)^+), evaluated as sigma^2 (d-1)/(2N) tr(Sigma_hat^+).
inline double optimal_rate(const Instance& inst, const PseudoinverseResult& cov) {
    const double scale = static_cast<double>(inst.d - 1) / (2.0 * static_cast<double>(inst.n));
    return inst.sigma * inst.sigma * scale * trace_of(cov.dagger);
}

inline double optimal_rate(const Instance& inst) {
    return optimal_rate(inst, pseudoinverse(sample_covariance(inst)));
}

struct TauT {
    double tau = 0.0;
    std::optional<int> steps; ///< empty when sigma = 0 (the log ratio is undefined)
};

/// tau = C2 sigma sqrt(d/N log N) (natural log) and
/// T = max{0, ceil(log_{4/3}(err0 / (4 tau)))}.
inline TauT theory_tau_T(double sigma, int d, int n, double theta0_linf_err, double c2 = 1.0) {
    if (n < 3) {
        throw ParameterError("theory_tau_T needs N >= 3");
    }
    if (!(c2 > 0.0)) {
        throw ParameterError("theory_tau_T needs C2 > 0");
    }
    if (!(sigma >= 0.0) || !(theta0_linf_err >= 0.0)) {
        throw ParameterError("theory_tau_T needs sigma >= 0 and a nonnegative initial error");
    }
    TauT out;
    out.tau = c2 * sigma * std::sqrt(static_cast<double>(d) / n * std::log(static_cast<double>(n)));
    if (out.tau == 0.0) {
        return out;
    }
    const double ratio = theta0_linf_err / (4.0 * out.tau);
    if (ratio <= 1.0) {
        out.steps = 0;
    } else {
        out.steps = static_cast<int>(std::ceil(std::log(ratio) / std::log(4.0 / 3.0)));
    }
    return out;
}

struct TheoryReport {
    double c2 = 1.0;
    double tau = 0.0;
    double tau_over_c2 = 0.0;
    std::optional<int> t_steps;
    double optimal_rate = 0.0;
    double trace_dagger = 0.0;
    double spectral_norm_cov = 0.0;
    double spectral_norm_dagger = 0.0;
    double linf_dagger_upper = 0.0;
    double linf_dagger_lower = 0.0;
    int rank = 0;
    int d = 0;

    // Thresholds from the high-probability covariance bounds.
    bool op_norm_ok = false;        // ||Sigma_hat||_op <= 3
    bool dagger_op_norm_ok = false; // ||Sigma_hat^+||_op <= 5
    bool trace_ok = false;          // tr(Sigma_hat^+) >= (d-1)/3
    bool full_rank = false;         // rank = d-1

    bool all_ok() const { return op_norm_ok && dagger_op_norm_ok && trace_ok && full_rank; }
};

struct ReportOptions {
    double c2 = 1.0;
    std::optional<double> theta0_linf_err; ///< fills T when present
    int linf_probes = 256;
    std::uint64_t probe_seed = 0;
};

inline TheoryReport covariance_report(const Instance& inst, const ReportOptions& opts = {}) {
    const SymmetricMatrix cov = sample_covariance(inst);
    const PseudoinverseResult pinv = pseudoinverse(cov);

    TheoryReport rep;
    rep.c2 = opts.c2;
    rep.d = inst.d;
    rep.rank = pinv.rank;
    rep.trace_dagger = trace_of(pinv.dagger);
    rep.spectral_norm_cov = spectral_norm(cov);
    rep.spectral_norm_dagger = spectral_norm(pinv.dagger);
    rep.linf_dagger_upper = linf_norm_upper(pinv.dagger);
    Rng probe_rng(opts.probe_seed);
    rep.linf_dagger_lower = linf_norm_restricted_lower(pinv.dagger, std::max(opts.linf_probes, 1), probe_rng);
    rep.optimal_rate = optimal_rate(inst, pinv);
    if (inst.n >= 3) {
        const auto tt = theory_tau_T(inst.sigma, inst.d, inst.n, opts.theta0_linf_err.value_or(0.0), opts.c2);
        rep.tau = tt.tau;
        rep.tau_over_c2 = tt.tau / opts.c2;
        if (opts.theta0_linf_err) {
            rep.t_steps = tt.steps;
        }
    }
    rep.op_norm_ok = rep.spectral_norm_cov <= 3.0;
    rep.dagger_op_norm_ok = rep.spectral_norm_dagger <= 5.0;
    rep.trace_ok = rep.trace_dagger >= (inst.d - 1) / 3.0;
    rep.full_rank = pinv.rank == inst.d - 1;
    return rep;
}

inline nlohmann::json to_json(const TheoryReport& rep) {
    nlohmann::json j;
    j["C2"] = rep.c2;
    j["tau"] = rep.tau;
    j["tau_over_C2"] = rep.tau_over_c2;
    j["T_steps"] = rep.t_steps ? nlohmann::json(*rep.t_steps) : nlohmann::json(nullptr);
    j["optimal_rate"] = rep.optimal_rate;
    j["trace_dagger"] = rep.trace_dagger;
    j["spectral_norm_cov"] = rep.spectral_norm_cov;
    j["spectral_norm_dagger"] = rep.spectral_norm_dagger;
    j["linf_dagger_upper"] = rep.linf_dagger_upper;
    j["linf_dagger_lower"] = rep.linf_dagger_lower;
    j["rank"] = rep.rank;
    j["flags"] = {
        {"op_norm_le_3", rep.op_norm_ok},
        {"dagger_op_norm_le_5", rep.dagger_op_norm_ok},
        {"trace_ge_(d-1)/3", rep.trace_ok},
        {"rank_eq_d-1", rep.full_rank},
    };
    return j;
}

struct SeparationProfile {
    double delta = 0.0;
    std::vector<int> sizes; ///< sizes[i] = #{j != i : |theta*_i - theta*_j| <= delta}
};

inline SeparationProfile separation_profile(const CenteredVector& theta_star, double delta) {
    if (!(delta >= 0.0)) {
        throw ParameterError("separation_profile needs delta >= 0");
    }
    const auto d = theta_star.size();
    SeparationProfile out{delta, std::vector<int>(static_cast<std::size_t>(d), 0)};
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            if (j != i && std::abs(theta_star[i] - theta_star[j]) <= delta) {
                ++out.sizes[static_cast<std::size_t>(i)];
            }
        }
    }
    return out;
}

struct SampleMoments {
    double mean = 0.0;
    double variance = 0.0;
    long long count = 0;
};

/// Monte-Carlo mean and variance of X tanh(mu X / sigma^2) for X ~ N(mu, sigma^2).
/// The exact mean is mu and the variance is at most sigma^2.
template <class Urbg>
SampleMoments gauss_tanh_moments(double mu, double sigma, long long draws, Urbg& rng) {
    if (!(sigma > 0.0) || draws < 2) {
        throw ParameterError("gauss_tanh_moments needs sigma > 0 and at least two draws");
    }
    std::normal_distribution<double> gauss(mu, sigma);
    const double inv_var = 1.0 / (sigma * sigma);
    // Welford
    double mean = 0.0;
    double m2 = 0.0;
    for (long long k = 1; k <= draws; ++k) {
        const double x = gauss(rng);
        const double v = x * std::tanh(mu * x * inv_var);
        const double delta = v - mean;
        mean += delta / static_cast<double>(k);
        m2 += delta * (v - mean);
    }
    return {mean, m2 / static_cast<double>(draws - 1), draws};
}

} // namespace pairwise_em

#endif // PAIRWISE_EM_DIAGNOSTICS_HPP
