#ifndef PAIRWISE_EM_MODEL_HPP
#define PAIRWISE_EM_MODEL_HPP

// Synthetic data for the symmetric two-component mixture
//
//     y_r = z_r <x_r, theta*> + eps_r,   z_r uniform on {-1, +1},  eps_r ~ N(0, sigma^2),
//
// under the pairwise-comparison design x_r = e_i - e_j or a dense Gaussian design.

#include "pairwise_em/errors.hpp"
#include "pairwise_em/linalg.hpp"
#include "pairwise_em/rng.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pairwise_em {

enum class DesignKind {
    PairwiseUniform,   ///< pairs drawn uniformly with replacement
    GaussianIsotropic, ///< x_r ~ N(0, (2/d) I)
    ExhaustivePairs,   ///< every pair once, z = +1, no noise (deterministic test design)
};

inline std::string_view to_string(DesignKind kind) {
    switch (kind) {
    case DesignKind::PairwiseUniform: return "pairwise";
    case DesignKind::GaussianIsotropic: return "gaussian";
    case DesignKind::ExhaustivePairs: return "exhaustive";
    }
    return "unknown";
}

inline DesignKind parse_design(std::string_view name) {
    if (name == "pairwise") return DesignKind::PairwiseUniform;
    if (name == "gaussian") return DesignKind::GaussianIsotropic;
    if (name == "exhaustive") return DesignKind::ExhaustivePairs;
    throw ParameterError("unknown design '" + std::string(name) + "' (expected pairwise|gaussian|exhaustive)");
}

/// One comparison x = e_i - e_j, zero-based, i < j.
struct Comparison {
    int i = 0;
    int j = 0;
    friend bool operator==(const Comparison&, const Comparison&) = default;
};

/// One synthetic dataset.
struct Instance {
    int d = 0;
    int n = 0;
    double sigma = 0.0;
    DesignKind design = DesignKind::PairwiseUniform;
    std::vector<Comparison> pairs; ///< pairwise designs only
    Matrix dense;                  ///< N x d, Gaussian design only
    Vector responses;
    std::vector<int> signs;        ///< latent z_r
    Vector noise;                  ///< eps_r, kept for the generation audit
    CenteredVector theta_star{Vector::Zero(2)};
    std::uint64_t seed = 0;

    bool is_pairwise() const noexcept { return design != DesignKind::GaussianIsotropic; }

    /// <x_r, theta>
    double inner(int r, const Vector& theta) const {
        if (is_pairwise()) {
            const auto& p = pairs[static_cast<std::size_t>(r)];
            return theta[p.i] - theta[p.j];
        }
        return dense.row(r).dot(theta);
    }

    /// out += coeff * x_r
    void add_covariate(int r, double coeff, Vector& out) const {
        if (is_pairwise()) {
            const auto& p = pairs[static_cast<std::size_t>(r)];
            out[p.i] += coeff;
            out[p.j] -= coeff;
        } else {
            out.noalias() += coeff * dense.row(r).transpose();
        }
    }

    /// max_r |y_r - (z_r <x_r, theta*> + eps_r)|
    double audit_residual() const {
        double worst = 0.0;
        for (int r = 0; r < n; ++r) {
            const double rebuilt = signs[static_cast<std::size_t>(r)] * inner(r, theta_star.values()) + noise[r];
            worst = std::max(worst, std::abs(responses[r] - rebuilt));
        }
        return worst;
    }
};

struct LinearTruth {
    int d = 0;
};

/// Either the evenly spaced default ground truth or an explicit vector (centred on use).
using GroundTruthSpec = std::variant<LinearTruth, Vector>;

/// theta*_i = i/d - (d+1)/(2d), i = 1..d. Member of the separated class with beta = 1.
inline CenteredVector linear_theta_star(int d) {
    if (d < 2) {
        throw DimensionError("linear_theta_star needs d >= 2, got d = " + std::to_string(d));
    }
    Vector theta(d);
    const double dd = static_cast<double>(d);
    for (int i = 1; i <= d; ++i) {
        theta[i - 1] = static_cast<double>(i) / dd - (dd + 1.0) / (2.0 * dd);
    }
    return project_to_H(theta);
}

inline CenteredVector resolve_truth(const GroundTruthSpec& spec) {
    if (const auto* lin = std::get_if<LinearTruth>(&spec)) {
        return linear_theta_star(lin->d);
    }
    return project_to_H(std::get<Vector>(spec));
}

/// Nondecreasing entries and |theta_i - theta_j| >= beta (j - i) / d for every i < j.
inline bool theta_in_class(const CenteredVector& theta, double beta) {
    if (!(beta > 0.0)) {
        throw ParameterError("theta_in_class needs beta > 0");
    }
    const auto d = theta.size();
    const double dd = static_cast<double>(d);
    for (Eigen::Index i = 0; i + 1 < d; ++i) {
        if (theta[i + 1] < theta[i]) {
            return false;
        }
    }
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i + 1; j < d; ++j) {
            // Relative slack so that exactly spaced vectors pass despite rounding.
            if (std::abs(theta[j] - theta[i]) < beta * static_cast<double>(j - i) / dd * (1.0 - 1e-12)) {
                return false;
            }
        }
    }
    return true;
}

/// (1 - eta) theta* + eta theta^R, where theta^R is a centred vector with
/// i.i.d. Uniform[-0.5, 0.5] entries before centring.
template <class Urbg>
CenteredVector random_init(const CenteredVector& theta_star, double eta, Urbg& rng) {
    if (!(eta >= 0.0 && eta <= 1.0)) {
        throw ParameterError("random_init needs eta in [0, 1], got " + std::to_string(eta));
    }
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    Vector raw(theta_star.size());
    for (Eigen::Index i = 0; i < raw.size(); ++i) {
        raw[i] = unif(rng);
    }
    const Vector random_part = project_to_H(raw).values();
    if (eta == 0.0) {
        return theta_star;
    }
    return project_to_H((1.0 - eta) * theta_star.values() + eta * random_part);
}

/// Draw one instance. Per observation the engine is consumed in the order
/// covariate, sign, noise, so a fixed seed yields the same covariates and
/// signs for every sigma.
inline Instance generate(int d, int n, double sigma, const GroundTruthSpec& spec, DesignKind design,
                         std::uint64_t seed) {
    if (d < 2) {
        throw DimensionError("generate needs d >= 2, got d = " + std::to_string(d));
    }
    if (!(sigma >= 0.0)) {
        throw ParameterError("generate needs sigma >= 0");
    }
    if (design != DesignKind::ExhaustivePairs && n < 1) {
        throw ParameterError("generate needs N >= 1");
    }

    Instance inst;
    inst.d = d;
    inst.sigma = sigma;
    inst.design = design;
    inst.seed = seed;
    inst.theta_star = resolve_truth(spec);
    if (inst.theta_star.size() != d) {
        throw DimensionError("ground truth has length " + std::to_string(inst.theta_star.size()) +
                             ", expected d = " + std::to_string(d));
    }
    const Vector& theta = inst.theta_star.values();

    if (design == DesignKind::ExhaustivePairs) {
        inst.n = d * (d - 1) / 2;
        inst.pairs.reserve(static_cast<std::size_t>(inst.n));
        for (int i = 0; i < d; ++i) {
            for (int j = i + 1; j < d; ++j) {
                inst.pairs.push_back({i, j});
            }
        }
        inst.signs.assign(static_cast<std::size_t>(inst.n), 1);
        inst.noise = Vector::Zero(inst.n);
        inst.responses.resize(inst.n);
        for (int r = 0; r < inst.n; ++r) {
            inst.responses[r] = inst.inner(r, theta);
        }
        return inst;
    }

    inst.n = n;
    Rng rng(seed);
    std::uniform_int_distribution<long long> pick_pair(0, static_cast<long long>(d) * (d - 1) / 2 - 1);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    const double cov_scale = std::sqrt(2.0 / static_cast<double>(d));

    if (design == DesignKind::PairwiseUniform) {
        inst.pairs.resize(static_cast<std::size_t>(n));
    } else {
        inst.dense.resize(n, d);
    }
    inst.signs.resize(static_cast<std::size_t>(n));
    inst.noise.resize(n);
    inst.responses.resize(n);

    for (int r = 0; r < n; ++r) {
        if (design == DesignKind::PairwiseUniform) {
            // Unrank k into the k-th pair (i, j), i < j, in lexicographic order.
            long long k = pick_pair(rng);
            int i = 0;
            long long row = d - 1;
            while (k >= row) {
                k -= row;
                --row;
                ++i;
            }
            inst.pairs[static_cast<std::size_t>(r)] = {i, i + 1 + static_cast<int>(k)};
        } else {
            for (int c = 0; c < d; ++c) {
                inst.dense(r, c) = cov_scale * gauss(rng);
            }
        }
        const int z = coin(rng) ? 1 : -1;
        const double eps = sigma * gauss(rng);
        inst.signs[static_cast<std::size_t>(r)] = z;
        inst.noise[r] = eps;
        inst.responses[r] = z * inst.inner(r, theta) + eps;
    }
    return inst;
}

/// Sum_r x_r x_r^T. For pairwise designs this is the comparison-graph Laplacian.
inline SymmetricMatrix gram_matrix(const Instance& inst) {
    const int d = inst.d;
    Matrix g = Matrix::Zero(d, d);
    if (inst.is_pairwise()) {
        for (const auto& p : inst.pairs) {
            g(p.i, p.i) += 1.0;
            g(p.j, p.j) += 1.0;
            g(p.j, p.i) -= 1.0;
        }
    } else {
        g.selfadjointView<Eigen::Lower>().rankUpdate(inst.dense.transpose());
    }
    return SymmetricMatrix::from_lower(g);
}

/// (d - 1) / (2N) * Sum_r x_r x_r^T.
inline SymmetricMatrix sample_covariance(const Instance& inst) {
    const double scale = static_cast<double>(inst.d - 1) / (2.0 * static_cast<double>(inst.n));
    return gram_matrix(inst).scaled(scale);
}

// JSON archive format. Pairs are written one-based, as (i, j) with i < j.

inline nlohmann::json to_json(const Vector& v) {
    return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

inline Vector vector_from_json(const nlohmann::json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

inline nlohmann::json to_json(const Instance& inst) {
    nlohmann::json j;
    j["d"] = inst.d;
    j["N"] = inst.n;
    j["sigma"] = inst.sigma;
    j["design"] = std::string(to_string(inst.design));
    j["seed"] = inst.seed;
    j["rng"] = std::string(rng_name);
    j["theta_star"] = to_json(inst.theta_star.values());
    if (inst.is_pairwise()) {
        auto pairs = nlohmann::json::array();
        for (const auto& p : inst.pairs) {
            pairs.push_back({p.i + 1, p.j + 1});
        }
        j["pairs"] = std::move(pairs);
    } else {
        auto rows = nlohmann::json::array();
        for (int r = 0; r < inst.n; ++r) {
            rows.push_back(to_json(Vector(inst.dense.row(r).transpose())));
        }
        j["covariates"] = std::move(rows);
    }
    j["responses"] = to_json(inst.responses);
    j["latent_signs"] = inst.signs;
    j["noise"] = to_json(inst.noise);
    return j;
}

inline Instance instance_from_json(const nlohmann::json& j) {
    Instance inst;
    inst.d = j.at("d").get<int>();
    inst.n = j.at("N").get<int>();
    inst.sigma = j.at("sigma").get<double>();
    inst.design = parse_design(j.at("design").get<std::string>());
    inst.seed = j.value("seed", std::uint64_t{0});
    inst.theta_star = CenteredVector(vector_from_json(j.at("theta_star")));
    if (inst.d < 2 || inst.theta_star.size() != inst.d) {
        throw DimensionError("instance theta_star length does not match d");
    }
    if (inst.is_pairwise()) {
        for (const auto& p : j.at("pairs")) {
            const int a = p.at(0).get<int>();
            const int b = p.at(1).get<int>();
            if (!(1 <= a && a < b && b <= inst.d)) {
                throw ContractViolation("pair (" + std::to_string(a) + ", " + std::to_string(b) +
                                        ") violates 1 <= i < j <= d");
            }
            inst.pairs.push_back({a - 1, b - 1});
        }
        if (static_cast<int>(inst.pairs.size()) != inst.n) {
            throw DimensionError("number of pairs does not match N");
        }
    } else {
        const auto& rows = j.at("covariates");
        if (static_cast<int>(rows.size()) != inst.n) {
            throw DimensionError("number of covariate rows does not match N");
        }
        inst.dense.resize(inst.n, inst.d);
        for (int r = 0; r < inst.n; ++r) {
            const Vector row = vector_from_json(rows[static_cast<std::size_t>(r)]);
            if (row.size() != inst.d) {
                throw DimensionError("covariate row length does not match d");
            }
            inst.dense.row(r) = row.transpose();
        }
    }
    inst.responses = vector_from_json(j.at("responses"));
    inst.signs = j.at("latent_signs").get<std::vector<int>>();
    inst.noise = vector_from_json(j.at("noise"));
    if (inst.responses.size() != inst.n || static_cast<int>(inst.signs.size()) != inst.n ||
        inst.noise.size() != inst.n) {
        throw DimensionError("responses, latent_signs and noise must all have length N");
    }
    return inst;
}

} // namespace pairwise_em

#endif // PAIRWISE_EM_MODEL_HPP
