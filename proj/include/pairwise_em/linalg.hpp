#ifndef PAIRWISE_EM_LINALG_HPP
#define PAIRWISE_EM_LINALG_HPP

// Linear algebra on the sum-zero hyperplane H = {v : 1^T v = 0}.

#include "pairwise_em/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>

namespace pairwise_em {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A length-d vector whose entries sum to zero.
///
/// Construction checks membership in H with absolute tolerance
/// 1e-9 * d * max|entry|; use project_to_H() to build one from an arbitrary vector.
class CenteredVector {
public:
    explicit CenteredVector(Vector values) : values_(std::move(values)) {
        const auto d = values_.size();
        if (d < 2) {
            throw DimensionError("CenteredVector needs d >= 2, got d = " + std::to_string(d));
        }
        const double scale = values_.cwiseAbs().maxCoeff();
        const double tol = 1e-9 * static_cast<double>(d) * scale;
        if (std::abs(values_.sum()) > tol) {
            throw ContractViolation("vector is not on the sum-zero hyperplane (sum = " +
                                    std::to_string(values_.sum()) + ")");
        }
    }

    const Vector& values() const noexcept { return values_; }
    Eigen::Index size() const noexcept { return values_.size(); }
    double operator[](Eigen::Index i) const { return values_[i]; }

    CenteredVector operator-() const { return CenteredVector(Vector(-values_), Unchecked{}); }

    friend bool operator==(const CenteredVector& a, const CenteredVector& b) {
        return a.values_ == b.values_;
    }

private:
    struct Unchecked {};
    CenteredVector(Vector values, Unchecked) : values_(std::move(values)) {}
    friend CenteredVector project_to_H(const Vector& v);

    Vector values_;
};

/// v - mean(v) * 1.
inline CenteredVector project_to_H(const Vector& v) {
    if (v.size() < 2) {
        throw DimensionError("project_to_H needs d >= 2, got d = " + std::to_string(v.size()));
    }
    Vector centered = v.array() - v.mean();
    return CenteredVector(std::move(centered), CenteredVector::Unchecked{});
}

/// A real symmetric d x d matrix. Symmetry is exact: the constructor rejects
/// any matrix with entries[i][j] != entries[j][i].
///
/// Whether 1 lies in the kernel depends on where the matrix came from (it does
/// for comparison-graph Laplacians, not for dense Gram matrices), so it is a
/// query rather than a construction invariant.
class SymmetricMatrix {
public:
    SymmetricMatrix() = default;

    explicit SymmetricMatrix(Matrix entries) : entries_(std::move(entries)) {
        if (entries_.rows() != entries_.cols()) {
            throw DimensionError("symmetric matrix must be square");
        }
        if (entries_ != entries_.transpose()) {
            throw ContractViolation("matrix is not exactly symmetric");
        }
    }

    /// Mirror the lower triangle onto the upper one.
    static SymmetricMatrix from_lower(const Matrix& m) {
        Matrix sym = m.triangularView<Eigen::Lower>();
        sym.triangularView<Eigen::StrictlyUpper>() = m.transpose().triangularView<Eigen::StrictlyUpper>();
        return SymmetricMatrix(std::move(sym));
    }

    static SymmetricMatrix zero(Eigen::Index d) { return SymmetricMatrix(Matrix::Zero(d, d)); }

    /// I - J/d, the orthogonal projector onto H.
    static SymmetricMatrix centering(Eigen::Index d) {
        Matrix p = Matrix::Identity(d, d);
        p.array() -= 1.0 / static_cast<double>(d);
        return SymmetricMatrix(std::move(p));
    }

    const Matrix& entries() const noexcept { return entries_; }
    Eigen::Index dim() const noexcept { return entries_.rows(); }
    double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

    /// True when every row sums to zero within rel_tol * (max abs row sum).
    bool annihilates_ones(double rel_tol = 1e-9) const {
        if (entries_.size() == 0) {
            return true;
        }
        const double scale = std::max(entries_.cwiseAbs().rowwise().sum().maxCoeff(), 1e-300);
        return entries_.rowwise().sum().cwiseAbs().maxCoeff() <= rel_tol * scale;
    }

    SymmetricMatrix scaled(double s) const { return SymmetricMatrix(Matrix(s * entries_)); }

private:
    Matrix entries_;
};

struct PseudoinverseResult {
    SymmetricMatrix dagger;
    int rank = 0;
    Vector eigenvalues; // of the input, descending
    bool connected = false; // rank == d - 1
};

/// Pseudoinverse by full symmetric eigendecomposition. Eigenvalues with
/// |lambda| <= rel_tol * max|lambda| are treated as zero.
inline PseudoinverseResult pseudoinverse(const SymmetricMatrix& s, double rel_tol = 1e-10) {
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) {
        throw ParameterError("pseudoinverse rel_tol must lie in (0, 1)");
    }
    const Eigen::Index d = s.dim();
    PseudoinverseResult out;
    if (d == 0) {
        out.dagger = SymmetricMatrix::zero(0);
        return out;
    }

    Eigen::SelfAdjointEigenSolver<Matrix> eig(s.entries());
    if (eig.info() != Eigen::Success) {
        throw Error("symmetric eigendecomposition failed");
    }
    const Vector& ascending = eig.eigenvalues();
    const Matrix& vecs = eig.eigenvectors();
    out.eigenvalues = ascending.reverse();

    const double cutoff = rel_tol * ascending.cwiseAbs().maxCoeff();
    Matrix dagger = Matrix::Zero(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
        const double lambda = ascending[k];
        if (std::abs(lambda) > cutoff && lambda != 0.0) {
            dagger.noalias() += (1.0 / lambda) * vecs.col(k) * vecs.col(k).transpose();
            ++out.rank;
        }
    }
    out.dagger = SymmetricMatrix::from_lower(dagger);
    out.connected = out.rank == d - 1;
    return out;
}

/// Largest eigenvalue; equals the operator norm for PSD input.
inline double spectral_norm(const SymmetricMatrix& s) {
    if (s.dim() == 0) {
        return 0.0;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s.entries(), Eigen::EigenvaluesOnly);
    return eig.eigenvalues().maxCoeff();
}

/// Maximum absolute row sum, the unrestricted l_inf -> l_inf norm. Upper bound
/// on the norm restricted to H.
inline double linf_norm_upper(const SymmetricMatrix& s) {
    if (s.dim() == 0) {
        return 0.0;
    }
    return s.entries().cwiseAbs().rowwise().sum().maxCoeff();
}

/// Monte-Carlo lower bound on max { ||S v||_inf : v in H, ||v||_inf = 1 }.
///
/// Probes are random sign vectors projected to H and rescaled to unit l_inf norm.
/// Probes that centre to zero are skipped.
template <class Urbg>
double linf_norm_restricted_lower(const SymmetricMatrix& s, int n_samples, Urbg& rng) {
    if (n_samples < 1) {
        throw ParameterError("linf_norm_restricted_lower needs n_samples >= 1");
    }
    const Eigen::Index d = s.dim();
    std::bernoulli_distribution coin(0.5);
    double best = 0.0;
    Vector probe(d);
    for (int k = 0; k < n_samples; ++k) {
        for (Eigen::Index i = 0; i < d; ++i) {
            probe[i] = coin(rng) ? 1.0 : -1.0;
        }
        probe.array() -= probe.mean();
        const double norm = probe.cwiseAbs().maxCoeff();
        if (norm == 0.0) {
            continue;
        }
        probe /= norm;
        best = std::max(best, (s.entries() * probe).cwiseAbs().maxCoeff());
    }
    return best;
}

inline double trace_of(const SymmetricMatrix& s) { return s.entries().trace(); }

inline double linf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

} // namespace pairwise_em

#endif // PAIRWISE_EM_LINALG_HPP
