#ifndef PAIRWISE_EM_ESTIMATORS_HPP
#define PAIRWISE_EM_ESTIMATORS_HPP

// Iterative estimators for the symmetric mixture and the spectral initialiser.
//
//   Easy-EM:  Qbar(theta) = (d-1)/(2N) sum_r tanh(y_r <x_r, theta> / sigma^2) y_r x_r
//   EM:       Qhat(theta) = Sigma_hat^+ Qbar(theta)
//   AM:       Sigma_hat^+ (d-1)/(2N) sum_r sign(y_r <x_r, theta>) y_r x_r,  sign(0) = 0
//
// AM is the sigma -> 0 limit of EM and equals "assign signs, then least squares on H".

#include "pairwise_em/errors.hpp"
#include "pairwise_em/linalg.hpp"
#include "pairwise_em/model.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <string>
#include <string_view>
#include <vector>

namespace pairwise_em {

enum class EstimatorKind { EM, EasyEM, AM };

inline std::string_view to_string(EstimatorKind kind) {
    switch (kind) {
    case EstimatorKind::EM: return "em";
    case EstimatorKind::EasyEM: return "easy-em";
    case EstimatorKind::AM: return "am";
    }
    return "unknown";
}

inline EstimatorKind parse_estimator_kind(std::string_view name) {
    if (name == "em") return EstimatorKind::EM;
    if (name == "easy-em") return EstimatorKind::EasyEM;
    if (name == "am") return EstimatorKind::AM;
    throw ParameterError("unknown estimator '" + std::string(name) + "' (expected em|easy-em|am)");
}

struct IterationConfig {
    int max_steps = 100;
    double step_tol = 1e-10;     ///< on the l_inf change between consecutive iterates
    double sigma_floor = 1e-12;
    int keep_every = 1;          ///< store every k-th iterate in the trace; 0 stores none
    bool warn_disconnected = true;
};

struct IterationTrace {
    std::vector<Vector> iterates; ///< theta^(0) and every keep_every-th iterate after it
    std::vector<double> step_linf_changes;
    Vector final;
    int steps_taken = 0;
    bool converged = false;
    bool rank_deficient = false;  ///< pairwise design with a disconnected comparison graph
    EstimatorKind kind = EstimatorKind::EM;
};

struct SpectralResult {
    CenteredVector theta_tilde{Vector::Zero(2)};
    double lambda1 = 0.0;
    Matrix distance_matrix;
    double gram_psd_defect = 0.0; ///< magnitude of the most negative eigenvalue of -JDJ/2
};

namespace detail {

inline constexpr double tanh_clamp = 40.0;

inline double three_valued_sign(double a) { return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0); }

inline void check_dim(const Instance& inst, const Vector& theta) {
    if (theta.size() != inst.d) {
        throw DimensionError("iterate has length " + std::to_string(theta.size()) + ", expected d = " +
                             std::to_string(inst.d));
    }
}

inline void check_sigma(const Instance& inst, double sigma_floor) {
    if (!(inst.sigma > sigma_floor)) {
        throw SigmaTooSmall("sigma = " + std::to_string(inst.sigma) +
                            " is at or below the floor; use the AM estimator");
    }
}

/// (d-1)/(2N) sum_r weight(y_r <x_r, theta>) y_r x_r
template <class Weight>
Vector weighted_sum(const Instance& inst, const Vector& theta, Weight&& weight) {
    Vector out = Vector::Zero(inst.d);
    for (int r = 0; r < inst.n; ++r) {
        const double y = inst.responses[r];
        const double w = weight(y * inst.inner(r, theta));
        if (w != 0.0) {
            inst.add_covariate(r, w * y, out);
        }
    }
    out *= static_cast<double>(inst.d - 1) / (2.0 * static_cast<double>(inst.n));
    return out;
}

} // namespace detail

/// Easy-EM operator. Throws SigmaTooSmall when sigma <= sigma_floor.
inline Vector easy_em_step(const Instance& inst, const Vector& theta, double sigma_floor = 1e-12) {
    detail::check_dim(inst, theta);
    detail::check_sigma(inst, sigma_floor);
    const double inv_var = 1.0 / (inst.sigma * inst.sigma);
    return detail::weighted_sum(inst, theta, [inv_var](double a) {
        const double arg = std::clamp(a * inv_var, -detail::tanh_clamp, detail::tanh_clamp);
        return std::tanh(arg);
    });
}

/// EM operator; cov must be the pseudoinverse of sample_covariance(inst).
inline Vector em_step(const Instance& inst, const Vector& theta, const PseudoinverseResult& cov,
                      double sigma_floor = 1e-12) {
    return cov.dagger.entries() * easy_em_step(inst, theta, sigma_floor);
}

/// Noiseless limit of EM (alternating minimisation). Valid for any sigma.
inline Vector am_step(const Instance& inst, const Vector& theta, const PseudoinverseResult& cov) {
    detail::check_dim(inst, theta);
    return cov.dagger.entries() * detail::weighted_sum(inst, theta, detail::three_valued_sign);
}

/// Iterate the chosen operator from theta0 until the l_inf step change drops
/// to step_tol or max_steps is reached. The pseudoinverse is formed once.
inline IterationTrace run(const Instance& inst, const Vector& theta0, EstimatorKind kind,
                          const IterationConfig& config = {}) {
    if (config.max_steps < 1) {
        throw ParameterError("max_steps must be >= 1");
    }
    if (!(config.step_tol > 0.0)) {
        throw ParameterError("step_tol must be > 0");
    }
    detail::check_dim(inst, theta0);
    if (kind != EstimatorKind::AM) {
        detail::check_sigma(inst, config.sigma_floor);
    }

    IterationTrace trace;
    trace.kind = kind;

    PseudoinverseResult cov;
    if (kind != EstimatorKind::EasyEM) {
        cov = pseudoinverse(sample_covariance(inst));
        if (inst.is_pairwise() && !cov.connected) {
            trace.rank_deficient = true;
            if (config.warn_disconnected) {
                std::clog << "warning: comparison graph is disconnected (rank " << cov.rank << " < d-1 = "
                          << inst.d - 1 << ")\n";
            }
        }
    }

    std::function<Vector(const Vector&)> step;
    switch (kind) {
    case EstimatorKind::EM:
        step = [&](const Vector& t) { return em_step(inst, t, cov, config.sigma_floor); };
        break;
    case EstimatorKind::EasyEM:
        step = [&](const Vector& t) { return easy_em_step(inst, t, config.sigma_floor); };
        break;
    case EstimatorKind::AM:
        step = [&](const Vector& t) { return am_step(inst, t, cov); };
        break;
    }

    Vector theta = theta0;
    if (config.keep_every > 0) {
        trace.iterates.push_back(theta);
    }
    for (int t = 1; t <= config.max_steps; ++t) {
        Vector next = step(theta);
        const double change = linf_norm(next - theta);
        theta = std::move(next);
        trace.step_linf_changes.push_back(change);
        trace.steps_taken = t;
        const bool done = change <= config.step_tol;
        if (config.keep_every > 0 && (t % config.keep_every == 0 || done || t == config.max_steps)) {
            trace.iterates.push_back(theta);
        }
        if (done) {
            trace.converged = true;
            break;
        }
    }
    trace.final = std::move(theta);
    return trace;
}

/// Classical multidimensional scaling on the debiased squared responses.
///
/// D_ij = d(d-1)/(2N) sum_{r : x_r = e_i - e_j} (y_r^2 - sigma^2); unobserved pairs
/// stay 0. theta_tilde = sqrt(lambda_1) v_1 for the leading eigenpair of -JDJ/2,
/// with v_1 oriented so its first nonzero coordinate is positive.
inline SpectralResult spectral_init(const Instance& inst) {
    if (!inst.is_pairwise()) {
        throw ContractViolation("spectral_init requires a pairwise design");
    }
    const int d = inst.d;
    const double scale = static_cast<double>(d) * (d - 1) / (2.0 * static_cast<double>(inst.n));
    const double var = inst.sigma * inst.sigma;

    Matrix dist = Matrix::Zero(d, d);
    for (int r = 0; r < inst.n; ++r) {
        const auto& p = inst.pairs[static_cast<std::size_t>(r)];
        const double y = inst.responses[r];
        dist(p.i, p.j) += y * y - var;
    }
    dist *= scale;
    dist.triangularView<Eigen::StrictlyLower>() = dist.transpose();

    // -JDJ/2 via row and column centring.
    Matrix b = dist;
    b.rowwise() -= b.colwise().mean();
    b.colwise() -= b.rowwise().mean();
    b *= -0.5;
    b = 0.5 * (b + b.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Matrix> eig(b);
    if (eig.info() != Eigen::Success) {
        throw Error("eigendecomposition of the centred distance matrix failed");
    }
    const double lambda1 = eig.eigenvalues()[d - 1];
    if (!(lambda1 > 0.0)) {
        throw SpectralDegenerate("leading eigenvalue of -JDJ/2 is " + std::to_string(lambda1));
    }
    Vector v1 = eig.eigenvectors().col(d - 1);
    const double vmax = v1.cwiseAbs().maxCoeff();
    for (int i = 0; i < d; ++i) {
        if (std::abs(v1[i]) > 1e-12 * vmax) {
            if (v1[i] < 0.0) {
                v1 = -v1;
            }
            break;
        }
    }

    SpectralResult out;
    out.theta_tilde = project_to_H(std::sqrt(lambda1) * v1);
    out.lambda1 = lambda1;
    out.distance_matrix = std::move(dist);
    out.gram_psd_defect = std::max(0.0, -eig.eigenvalues()[0]);
    return out;
}

/// Trace as JSON. iterates are thinned to every stride-th stored entry (stride >= 1).
inline nlohmann::json to_json(const IterationTrace& trace, int stride = 1) {
    nlohmann::json j;
    j["kind"] = std::string(to_string(trace.kind));
    j["steps_taken"] = trace.steps_taken;
    j["converged"] = trace.converged;
    j["rank_deficient"] = trace.rank_deficient;
    j["step_linf_changes"] = trace.step_linf_changes;
    j["final"] = to_json(trace.final);
    auto its = nlohmann::json::array();
    const std::size_t s = static_cast<std::size_t>(std::max(stride, 1));
    for (std::size_t k = 0; k < trace.iterates.size(); k += s) {
        its.push_back(to_json(trace.iterates[k]));
    }
    j["iterates"] = std::move(its);
    return j;
}

} // namespace pairwise_em

#endif // PAIRWISE_EM_ESTIMATORS_HPP
