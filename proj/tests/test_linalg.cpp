#include "pairwise_em/linalg.hpp"
#include "pairwise_em/rng.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace pairwise_em;

namespace {

Matrix ones(Eigen::Index d) { return Matrix::Ones(d, d); }

/// Laplacian of a random multigraph on d vertices with m edges.
SymmetricMatrix random_laplacian(int d, int m, Rng& rng) {
    std::uniform_int_distribution<int> pick(0, d - 1);
    Matrix l = Matrix::Zero(d, d);
    for (int e = 0; e < m; ++e) {
        int i = pick(rng);
        int j = pick(rng);
        if (i == j) {
            continue;
        }
        l(i, i) += 1.0;
        l(j, j) += 1.0;
        l(i, j) -= 1.0;
        l(j, i) -= 1.0;
    }
    return SymmetricMatrix(l);
}

/// Spanning path plus random edges, so the graph is connected.
SymmetricMatrix random_connected_laplacian(int d, int extra, Rng& rng) {
    Matrix l = random_laplacian(d, extra, rng).entries();
    for (int i = 0; i + 1 < d; ++i) {
        l(i, i) += 1.0;
        l(i + 1, i + 1) += 1.0;
        l(i, i + 1) -= 1.0;
        l(i + 1, i) -= 1.0;
    }
    return SymmetricMatrix(l);
}

} // namespace

TEST(ProjectToH, Examples) {
    EXPECT_EQ(project_to_H(Vector::Constant(3, 1.0)).values(), Vector::Zero(3));

    Vector v(3);
    v << 1, 2, 3;
    Vector expected(3);
    expected << -1, 0, 1;
    EXPECT_EQ(project_to_H(v).values(), expected);

    Vector w(4);
    w << 5, 0, 0, 0;
    Vector w_expected(4);
    w_expected << 3.75, -1.25, -1.25, -1.25;
    EXPECT_EQ(project_to_H(w).values(), w_expected);
}

TEST(ProjectToH, RejectsTooSmall) {
    EXPECT_THROW(project_to_H(Vector::Zero(1)), DimensionError);
    EXPECT_THROW(project_to_H(Vector()), DimensionError);
}

TEST(CenteredVector, ChecksMembership) {
    Vector v(3);
    v << 1, 2, 3;
    EXPECT_THROW(CenteredVector{v}, ContractViolation);
    Vector ok(3);
    ok << -1, 0, 1;
    EXPECT_NO_THROW(CenteredVector{ok});
    EXPECT_THROW(CenteredVector{Vector::Zero(1)}, DimensionError);
    EXPECT_EQ((-CenteredVector(ok)).values(), -ok);
}

TEST(SymmetricMatrix, RejectsAsymmetric) {
    Matrix m(2, 2);
    m << 1, 2, 3, 4;
    EXPECT_THROW(SymmetricMatrix{m}, ContractViolation);
    EXPECT_THROW(SymmetricMatrix{Matrix::Zero(2, 3)}, DimensionError);
    const auto mirrored = SymmetricMatrix::from_lower(m);
    EXPECT_EQ(mirrored(0, 1), 3.0);
}

TEST(Pseudoinverse, ProjectorIsSelfPseudoinverse) {
    const auto p = SymmetricMatrix::centering(3);
    const auto res = pseudoinverse(p);
    EXPECT_EQ(res.rank, 2);
    EXPECT_TRUE(res.connected);
    EXPECT_LE((res.dagger.entries() - p.entries()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Pseudoinverse, CompleteGraphLaplacian) {
    // 3I - J has eigenvalues {0, 3, 3}; multiplying back must give the projector.
    const SymmetricMatrix s(Matrix(3.0 * Matrix::Identity(3, 3) - ones(3)));
    const auto res = pseudoinverse(s);
    EXPECT_EQ(res.rank, 2);
    const Matrix expected = (Matrix::Identity(3, 3) - ones(3) / 3.0) / 3.0;
    EXPECT_LE((res.dagger.entries() - expected).cwiseAbs().maxCoeff(), 1e-12);
    const Matrix prod = s.entries() * res.dagger.entries();
    EXPECT_LE((prod - SymmetricMatrix::centering(3).entries()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(res.eigenvalues[0], 3.0, 1e-12);
    EXPECT_NEAR(res.eigenvalues[2], 0.0, 1e-12);
}

TEST(Pseudoinverse, ZeroMatrix) {
    const auto res = pseudoinverse(SymmetricMatrix::zero(4));
    EXPECT_EQ(res.rank, 0);
    EXPECT_FALSE(res.connected);
    EXPECT_EQ(res.dagger.entries(), Matrix::Zero(4, 4));
}

TEST(Pseudoinverse, RejectsBadTolerance) {
    EXPECT_THROW(pseudoinverse(SymmetricMatrix::zero(2), 0.0), ParameterError);
    EXPECT_THROW(pseudoinverse(SymmetricMatrix::zero(2), 1.0), ParameterError);
}

TEST(Pseudoinverse, DisconnectedGraphIsFlagged) {
    // Two disjoint edges on four vertices: rank 2 < d - 1.
    Matrix l = Matrix::Zero(4, 4);
    l.block(0, 0, 2, 2) << 1, -1, -1, 1;
    l.block(2, 2, 2, 2) << 1, -1, -1, 1;
    const auto res = pseudoinverse(SymmetricMatrix(l));
    EXPECT_EQ(res.rank, 2);
    EXPECT_FALSE(res.connected);
}

TEST(Pseudoinverse, PropertiesOnRandomConnectedLaplacians) {
    Rng rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 2 + trial % 30;
        const auto s = random_connected_laplacian(d, 3 * d, rng);
        const auto res = pseudoinverse(s);
        ASSERT_TRUE(res.connected) << "trial " << trial;
        const Matrix proj = SymmetricMatrix::centering(d).entries();
        EXPECT_LE((s.entries() * res.dagger.entries() - proj).cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_LE((res.dagger.entries() * s.entries() - proj).cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_LE((res.dagger.entries() * Vector::Ones(d)).cwiseAbs().maxCoeff(), 1e-10);
        const auto back = pseudoinverse(res.dagger);
        EXPECT_LE((back.dagger.entries() - s.entries()).cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_TRUE(s.annihilates_ones());

        // dagger's nonzero spectrum is the reciprocal of the retained spectrum.
        Eigen::SelfAdjointEigenSolver<Matrix> eig(res.dagger.entries());
        Vector got = eig.eigenvalues().tail(d - 1);
        Vector want = res.eigenvalues.head(d - 1).cwiseInverse();
        std::sort(got.data(), got.data() + got.size());
        std::sort(want.data(), want.data() + want.size());
        EXPECT_LE((got - want).cwiseAbs().maxCoeff(), 1e-8 * want.cwiseAbs().maxCoeff());
    }
}

TEST(Norms, SpectralNormExamples) {
    EXPECT_NEAR(spectral_norm(SymmetricMatrix::centering(3)), 1.0, 1e-12);
    EXPECT_NEAR(spectral_norm(SymmetricMatrix(Matrix(3.0 * Matrix::Identity(3, 3) - ones(3)))), 3.0, 1e-12);
    EXPECT_EQ(spectral_norm(SymmetricMatrix::zero(3)), 0.0);
}

TEST(Norms, LinfUpperExamples) {
    EXPECT_NEAR(linf_norm_upper(SymmetricMatrix::centering(3)), 4.0 / 3.0, 1e-15);
    EXPECT_EQ(linf_norm_upper(SymmetricMatrix::zero(3)), 0.0);
    EXPECT_EQ(linf_norm_upper(SymmetricMatrix(Matrix(3.0 * Matrix::Identity(3, 3) - ones(3)))), 4.0);
}

TEST(Norms, LinfLowerOnProjector) {
    Rng rng(7);
    for (int d : {2, 3, 10, 40}) {
        const auto p = SymmetricMatrix::centering(d);
        const double lower = linf_norm_restricted_lower(p, 64, rng);
        EXPECT_GT(lower, 0.0);
        EXPECT_LE(lower, 1.0 + 1e-12);
        EXPECT_LE(lower, linf_norm_upper(p));
    }
}

TEST(Norms, LinfLowerCompleteGraph) {
    // On H, 3I - J acts as 3I, so every probe attains ||Sv||_inf = 3.
    const SymmetricMatrix s(Matrix(3.0 * Matrix::Identity(3, 3) - ones(3)));
    Vector v(3);
    v << -1, 0, 1;
    EXPECT_DOUBLE_EQ((s.entries() * v).cwiseAbs().maxCoeff(), 3.0);
    Rng rng(1);
    EXPECT_NEAR(linf_norm_restricted_lower(s, 16, rng), 3.0, 1e-12);
}

TEST(Norms, LinfLowerRejectsZeroSamples) {
    Rng rng(1);
    EXPECT_THROW(linf_norm_restricted_lower(SymmetricMatrix::centering(3), 0, rng), ParameterError);
}

TEST(Norms, OrderingOnRandomLaplacians) {
    Rng rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        const int d = 3 + trial % 20;
        const auto s = random_laplacian(d, 2 * d, rng);
        const auto dag = pseudoinverse(s).dagger;
        for (const auto* m : {&s, &dag}) {
            const double upper = linf_norm_upper(*m);
            EXPECT_LE(linf_norm_restricted_lower(*m, 32, rng), upper + 1e-12);
            EXPECT_LE(spectral_norm(*m), upper + 1e-9);
        }
    }
}

TEST(Trace, Examples) {
    EXPECT_NEAR(trace_of(SymmetricMatrix::centering(3)), 2.0, 1e-15);
    EXPECT_EQ(trace_of(SymmetricMatrix::zero(3)), 0.0);
    EXPECT_NEAR(trace_of(SymmetricMatrix::centering(3).scaled(1.0 / 3.0)), 2.0 / 3.0, 1e-15);
}

TEST(Rng, DerivedSeedsAreDistinctAndStable) {
    const auto a = derive_seed(1, 0, 0, Purpose::Instance);
    EXPECT_EQ(a, derive_seed(1, 0, 0, Purpose::Instance));
    EXPECT_NE(a, derive_seed(1, 0, 0, Purpose::Init));
    EXPECT_NE(a, derive_seed(1, 0, 1, Purpose::Instance));
    EXPECT_NE(a, derive_seed(1, 1, 0, Purpose::Instance));
    EXPECT_NE(a, derive_seed(2, 0, 0, Purpose::Instance));
}
