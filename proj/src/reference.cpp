#include "lmvsc/reference.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lmvsc/errors.hpp"

namespace lmvsc::reference {

DenseSimilarity dense_similarity(const std::vector<NormalizedGraph>& graphs) {
    if (graphs.empty()) throw ValueError("dense_similarity needs at least one graph");
    const Eigen::Index n = graphs.front().Zhat.rows();
    if (n > kMaxDenseSamples)
        throw SizeGuard("dense_similarity refuses n = " + std::to_string(n) + " > " +
                        std::to_string(kMaxDenseSamples));
    for (const auto& g : graphs)
        if (g.Zhat.rows() != n) throw DimensionMismatch("graphs disagree on n");

    DenseSimilarity out;
    out.S = Eigen::MatrixXd::Zero(n, n);
    const double inv_v = 1.0 / static_cast<double>(graphs.size());
    for (const auto& g : graphs) {
        const Eigen::MatrixXd& Z = g.Zhat;
        for (Eigen::Index a = 0; a < n; ++a) {
            for (Eigen::Index b = a; b < n; ++b) {
                double s = 0.0;
                for (Eigen::Index j = 0; j < Z.cols(); ++j) s += Z(a, j) * Z(b, j);
                out.S(a, b) += inv_v * s;
            }
        }
    }
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < a; ++b) out.S(a, b) = out.S(b, a);
    return out;
}

Embedding dense_spectral_embed(const DenseSimilarity& s, int k) {
    const Eigen::Index n = s.S.rows();
    if (k < 1 || k > n) throw DimensionMismatch("dense_spectral_embed: k out of range");
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.S);
    if (eig.info() != Eigen::Success) throw Error("dense eigendecomposition failed");
    const Eigen::VectorXd& values = eig.eigenvalues();
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        if (values(i) > kRankThreshold) ++rank;
    if (rank < static_cast<std::size_t>(k))
        throw RankDeficient("dense_spectral_embed: numerical rank " + std::to_string(rank) +
                                " < k = " + std::to_string(k),
                            rank);
    Embedding out;
    out.Q.resize(n, k);
    out.singular_values.resize(k);
    for (int c = 0; c < k; ++c) {
        const Eigen::Index idx = n - 1 - c;
        out.Q.col(c) = eig.eigenvectors().col(idx);
        out.singular_values(c) = std::sqrt(values(idx));
    }
    out.eigengap = values(n - k) - (k < n ? std::max(0.0, values(n - 1 - k)) : 0.0);
    apply_sign_convention(out.Q);
    return out;
}

Eigen::VectorXd project_simplex_michelot(const Eigen::VectorXd& v) {
    const Eigen::Index m = v.size();
    std::vector<char> active(static_cast<std::size_t>(m), 1);
    Eigen::Index count = m;
    double theta = 0.0;
    while (true) {
        double sum = 0.0;
        for (Eigen::Index j = 0; j < m; ++j)
            if (active[static_cast<std::size_t>(j)]) sum += v(j);
        theta = (sum - 1.0) / static_cast<double>(count);
        bool changed = false;
        for (Eigen::Index j = 0; j < m; ++j) {
            if (active[static_cast<std::size_t>(j)] && v(j) - theta <= 0.0) {
                active[static_cast<std::size_t>(j)] = 0;
                --count;
                changed = true;
            }
        }
        if (!changed || count == 0) break;
    }
    Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
    for (Eigen::Index j = 0; j < m; ++j)
        if (active[static_cast<std::size_t>(j)]) z(j) = v(j) - theta;
    const double s = z.sum();
    if (s > 0.0) z /= s;
    return z;
}

DenseQpResult dense_qp_solve(const Eigen::VectorXd& x, const AnchorSet& anchors, double alpha) {
    const Eigen::Index m = anchors.m();
    if (m > kMaxDenseAnchors)
        throw SizeGuard("dense_qp_solve refuses m = " + std::to_string(m));
    if (x.size() != anchors.features()) throw DimensionMismatch("dense_qp_solve: bad sample size");
    const Eigen::MatrixXd& A = anchors.anchors();
    const Eigen::Index d = A.rows();

    // ||x - A z||^2 + alpha ||z||^2 = ||B z - y||^2 with B = [A; sqrt(alpha) I],
    // y = [x; 0]. Over the simplex this is the point of conv{B_j - y} nearest
    // the origin, found with Wolfe's minimum-norm-point method.
    Eigen::MatrixXd P(d + m, m);
    P.topRows(d) = A.colwise() - x;
    P.bottomRows(m) = std::sqrt(alpha) * Eigen::MatrixXd::Identity(m, m);
    const Eigen::VectorXd norms = P.colwise().squaredNorm();
    const double scale = norms.maxCoeff();

    std::vector<Eigen::Index> corral;
    Eigen::VectorXd w; // weights of the corral points
    Eigen::Index first = 0;
    norms.minCoeff(&first);
    corral.push_back(first);
    w = Eigen::VectorXd::Ones(1);
    Eigen::VectorXd point = P.col(first);

    auto corral_matrix = [&]() {
        Eigen::MatrixXd C(P.rows(), static_cast<Eigen::Index>(corral.size()));
        for (std::size_t c = 0; c < corral.size(); ++c)
            C.col(static_cast<Eigen::Index>(c)) = P.col(corral[c]);
        return C;
    };
    // Minimizer of ||C u|| subject to sum(u) = 1: u = G^-1 1 / (1' G^-1 1)
    // with G = C'C, positive definite thanks to the sqrt(alpha) I block.
    auto affine_minimizer = [&](const Eigen::MatrixXd& C) {
        const Eigen::MatrixXd G = C.transpose() * C;
        const Eigen::VectorXd g = G.ldlt().solve(Eigen::VectorXd::Ones(C.cols()));
        return Eigen::VectorXd(g / g.sum());
    };

    DenseQpResult out;
    const int max_major = static_cast<int>(20 * m + 100);
    for (int major = 0; major < max_major; ++major) {
        out.iterations = major + 1;
        const Eigen::VectorXd dots = P.transpose() * point;
        Eigen::Index j = 0;
        dots.minCoeff(&j);
        if (point.squaredNorm() - dots(j) <= 1e-15 * scale) break;
        if (std::find(corral.begin(), corral.end(), j) != corral.end()) break;
        corral.push_back(j);
        w.conservativeResize(w.size() + 1);
        w(w.size() - 1) = 0.0;

        for (;;) {
            const Eigen::MatrixXd C = corral_matrix();
            const Eigen::VectorXd u = affine_minimizer(C);
            if ((u.array() > 1e-15).all()) {
                w = u;
                point = C * w;
                break;
            }
            double theta = 1.0;
            for (Eigen::Index c = 0; c < u.size(); ++c)
                if (u(c) <= 1e-15) theta = std::min(theta, w(c) / (w(c) - u(c)));
            w += theta * (u - w);
            std::vector<Eigen::Index> kept;
            std::vector<double> kept_w;
            for (Eigen::Index c = 0; c < w.size(); ++c) {
                if (w(c) > 1e-15) {
                    kept.push_back(corral[static_cast<std::size_t>(c)]);
                    kept_w.push_back(w(c));
                }
            }
            corral = std::move(kept);
            w = Eigen::Map<Eigen::VectorXd>(kept_w.data(), static_cast<Eigen::Index>(kept_w.size()));
            w /= w.sum();
            point = corral_matrix() * w;
        }
    }

    out.z = Eigen::VectorXd::Zero(m);
    for (std::size_t c = 0; c < corral.size(); ++c) out.z(corral[c]) = w(static_cast<Eigen::Index>(c));
    out.objective = (x - A * out.z).squaredNorm() + alpha * out.z.squaredNorm();

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A.transpose() * A,
                                                             Eigen::EigenvaluesOnly);
    const double L = 2.0 * (eig.eigenvalues().maxCoeff() + alpha);
    const Eigen::VectorXd grad = 2.0 * (A.transpose() * (A * out.z - x)) + 2.0 * alpha * out.z;
    out.residual = (out.z - project_simplex_michelot(out.z - grad / L)).cwiseAbs().maxCoeff();
    return out;
}

Eigen::MatrixXd joint_anchor_graph(const ViewMatrix& view, const AnchorSet& anchors, double alpha,
                                   int max_iters) {
    if (view.features() != anchors.features()) throw DimensionMismatch("joint: feature mismatch");
    const Eigen::MatrixXd& A = anchors.anchors();
    const Eigen::MatrixXd& X = view.data();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A.transpose() * A,
                                                             Eigen::EigenvaluesOnly);
    const double L = 2.0 * (eig.eigenvalues().maxCoeff() + alpha);
    const Eigen::Index n = X.cols();
    const Eigen::Index m = A.cols();

    auto objective = [&](const Eigen::MatrixXd& Z) {
        return (X - A * Z.transpose()).squaredNorm() + alpha * Z.squaredNorm();
    };
    Eigen::MatrixXd Z = Eigen::MatrixXd::Constant(n, m, 1.0 / static_cast<double>(m));
    double f = objective(Z);
    for (int it = 0; it < max_iters; ++it) {
        // Gradient of the full objective with respect to Z (n x m).
        const Eigen::MatrixXd grad =
            2.0 * (A * Z.transpose() - X).transpose() * A + 2.0 * alpha * Z;
        Eigen::MatrixXd next = Z - grad / L;
        for (Eigen::Index i = 0; i < n; ++i)
            next.row(i) = project_simplex_michelot(next.row(i).transpose()).transpose();
        const double f_next = objective(next);
        const double change = std::abs(f - f_next);
        Z = std::move(next);
        f = f_next;
        if (change <= 1e-15 * std::max(1.0, std::abs(f))) break;
    }
    return Z;
}

double subspace_distance(const Eigen::MatrixXd& Q1, const Eigen::MatrixXd& Q2) {
    if (Q1.rows() != Q2.rows() || Q1.cols() != Q2.cols())
        throw DimensionMismatch("subspace_distance: shapes differ");
    const Eigen::Index k = Q1.cols();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(k, k);
    if ((Q1.transpose() * Q1 - I).norm() > 1e-6 || (Q2.transpose() * Q2 - I).norm() > 1e-6)
        throw ValueError("subspace_distance: inputs must have orthonormal columns");
    const Eigen::MatrixXd diff = Q1 * Q1.transpose() - Q2 * Q2.transpose();
    return diff.norm();
}

} // namespace lmvsc::reference
