#include <doctest.h>

#include <limits>
#include <random>
#include <vector>

#include "lmvsc/errors.hpp"
#include "lmvsc/reference.hpp"
#include "test_util.hpp"

using namespace lmvsc;
using namespace lmvsc::reference;

TEST_SUITE("reference") {

TEST_CASE("rank-one similarity") {
    NormalizedGraph g;
    g.Zhat = Eigen::MatrixXd::Constant(7, 1, std::sqrt(1.0 / 7.0));
    const DenseSimilarity s = dense_similarity({g});
    CHECK((s.S - Eigen::MatrixXd::Constant(7, 7, 1.0 / 7.0)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("similarity is symmetric and doubly stochastic for learned-style graphs") {
    std::mt19937_64 rng(50);
    const NormalizedGraph a = normalize_graph(lmvsc::testing::random_anchor_graph(40, 5, rng));
    const NormalizedGraph b = normalize_graph(lmvsc::testing::random_anchor_graph(40, 3, rng));
    const DenseSimilarity s = dense_similarity({a, b});
    CHECK((s.S - s.S.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((s.S.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-8);
    CHECK(s.S.minCoeff() >= 0.0);

    NormalizedGraph big;
    big.Zhat = Eigen::MatrixXd::Zero(kMaxDenseSamples + 1, 1);
    CHECK_THROWS_AS(dense_similarity({big}), SizeGuard);
}

TEST_CASE("dense spectral embedding") {
    const Embedding id = dense_spectral_embed({Eigen::MatrixXd::Identity(5, 5)}, 2);
    CHECK((id.Q.transpose() * id.Q - Eigen::Matrix2d::Identity()).norm() <= 1e-12);
    CHECK(id.eigengap == doctest::Approx(0.0));

    // Two doubly-stochastic blocks of sizes 4 and 6 with a little inner structure.
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(10, 10);
    s.topLeftCorner(4, 4).setConstant(0.25);
    s.bottomRightCorner(6, 6).setConstant(1.0 / 6.0);
    const Embedding e = dense_spectral_embed({s}, 2);
    for (int i = 1; i < 4; ++i) CHECK((e.Q.row(i) - e.Q.row(0)).norm() <= 1e-10);
    for (int i = 5; i < 10; ++i) CHECK((e.Q.row(i) - e.Q.row(4)).norm() <= 1e-10);
    CHECK_THROWS_AS(dense_spectral_embed({s}, 3), RankDeficient);
}

TEST_CASE("dense QP reference") {
    const AnchorSet id(Eigen::Matrix2d::Identity());
    const DenseQpResult r = dense_qp_solve(Eigen::Vector2d(1, 0), id, 0.1);
    CHECK(r.z(0) == doctest::Approx(21.0 / 22.0).epsilon(1e-10));
    CHECK(r.z(1) == doctest::Approx(1.0 / 22.0).epsilon(1e-9));

    std::mt19937_64 rng(51);
    const AnchorSet a(lmvsc::testing::random_matrix(3, 5, rng));
    const DenseQpResult u = dense_qp_solve(lmvsc::testing::random_matrix(3, 1, rng), a, 1e9);
    CHECK((u.z.array() - 0.2).abs().maxCoeff() <= 1e-3);

    const AnchorSet huge(Eigen::MatrixXd::Ones(2, kMaxDenseAnchors + 1));
    CHECK_THROWS_AS(dense_qp_solve(Eigen::Vector2d(1, 1), huge, 1.0), SizeGuard);
}

// Enumerates every support, solves the equality-constrained problem on it and
// keeps the best nonnegative candidate.
double enumerate_supports(const Eigen::VectorXd& x, const Eigen::MatrixXd& A, double alpha) {
    const int m = static_cast<int>(A.cols());
    double best = std::numeric_limits<double>::infinity();
    for (int mask = 1; mask < (1 << m); ++mask) {
        std::vector<int> idx;
        for (int j = 0; j < m; ++j)
            if (mask & (1 << j)) idx.push_back(j);
        const int s = static_cast<int>(idx.size());
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(s + 1, s + 1);
        Eigen::VectorXd rhs(s + 1);
        for (int a = 0; a < s; ++a) {
            for (int b = 0; b < s; ++b) K(a, b) = 2.0 * A.col(idx[a]).dot(A.col(idx[b]));
            K(a, a) += 2.0 * alpha;
            K(a, s) = K(s, a) = 1.0;
            rhs(a) = 2.0 * A.col(idx[a]).dot(x);
        }
        rhs(s) = 1.0;
        const Eigen::VectorXd sol = K.partialPivLu().solve(rhs);
        if (sol.head(s).minCoeff() < -1e-12) continue;
        Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
        for (int a = 0; a < s; ++a) z(idx[a]) = std::max(0.0, sol(a));
        z /= z.sum();
        best = std::min(best, (x - A * z).squaredNorm() + alpha * z.squaredNorm());
    }
    return best;
}

TEST_CASE("dense QP agrees with support enumeration") {
    std::mt19937_64 rng(53);
    const double alphas[] = {1e-4, 1e-2, 1.0, 100.0};
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng() % 6);
        const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng() % 7);
        const Eigen::MatrixXd A = lmvsc::testing::random_matrix(d, m, rng);
        const Eigen::VectorXd x = lmvsc::testing::random_matrix(d, 1, rng).col(0);
        const double alpha = alphas[trial % 4];
        const DenseQpResult r = dense_qp_solve(x, AnchorSet(A), alpha);
        const double brute = enumerate_supports(x, A, alpha);
        CHECK(std::abs(r.objective - brute) <= 1e-12 * std::max(1.0, brute));
        CHECK(r.z.minCoeff() >= 0.0);
        CHECK(std::abs(r.z.sum() - 1.0) <= 1e-12);
    }
}

TEST_CASE("subspace distance") {
    std::mt19937_64 rng(52);
    const Eigen::MatrixXd g = lmvsc::testing::random_matrix(8, 3, rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(8, 3);
    CHECK(subspace_distance(q, q) == 0.0);

    const double th = 0.7;
    Eigen::Matrix3d rot;
    rot << std::cos(th), -std::sin(th), 0, std::sin(th), std::cos(th), 0, 0, 0, 1;
    CHECK(subspace_distance(q, q * rot) <= 1e-10);

    CHECK(subspace_distance(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(subspace_distance(Eigen::Vector2d(2, 0), Eigen::Vector2d(0, 1)), ValueError);
    CHECK_THROWS_AS(subspace_distance(q, q.leftCols(2)), DimensionMismatch);
}

}
