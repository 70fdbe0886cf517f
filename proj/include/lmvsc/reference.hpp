#pragma once

#include <vector>

#include <Eigen/Dense>

#include "lmvsc/anchor_graph.hpp"
#include "lmvsc/dataset.hpp"
#include "lmvsc/embedding.hpp"

// Dense, desk-scale oracles. Nothing on the production path calls into this
// header; tests use it to cross-check the linear-cost routes.
namespace lmvsc::reference {

inline constexpr Eigen::Index kMaxDenseSamples = 5000;
inline constexpr Eigen::Index kMaxDenseAnchors = 200;

struct DenseSimilarity {
    /// n x n, symmetric, nonnegative.
    Eigen::MatrixXd S;
};

/// Averaged n x n similarity (1/v) sum_i Zhat^i Zhat^i', by explicit summation.
/// Throws SizeGuard above kMaxDenseSamples samples.
DenseSimilarity dense_similarity(const std::vector<NormalizedGraph>& graphs);

/// Top-k eigenvectors of S from a full symmetric eigendecomposition, with the
/// same sign convention as embed(). singular_values holds sqrt(eigenvalue) so
/// the two routes are comparable; eigengap is lambda_k - lambda_{k+1}.
Embedding dense_spectral_embed(const DenseSimilarity& s, int k);

struct DenseQpResult {
    Eigen::VectorXd z;
    double objective = 0.0;
    int iterations = 0;
    /// Projected-gradient fixed-point residual ||z - P(z - grad/L)||_inf.
    double residual = 0.0;
};

/// Exact solve of min_{z in simplex} ||x - A z||^2 + alpha ||z||^2 as a
/// nearest-point problem over conv{[A_j; sqrt(alpha) e_j] - [x; 0]}, using
/// Wolfe's finite minimum-norm-point method. `iterations` counts major cycles.
/// Throws SizeGuard when m > kMaxDenseAnchors.
DenseQpResult dense_qp_solve(const Eigen::VectorXd& x, const AnchorSet& anchors, double alpha);

/// Projected gradient on the whole n x m problem at once (rows are not solved
/// separately). Used to check that the objective separates across samples.
Eigen::MatrixXd joint_anchor_graph(const ViewMatrix& view, const AnchorSet& anchors, double alpha,
                                   int max_iters = 100000);

/// Simplex projection by Michelot's iterative elimination.
Eigen::VectorXd project_simplex_michelot(const Eigen::VectorXd& v);

/// ||Q1 Q1' - Q2 Q2'||_F. Throws DimensionMismatch on shape mismatch and
/// ValueError when either input is not orthonormal within 1e-6.
double subspace_distance(const Eigen::MatrixXd& Q1, const Eigen::MatrixXd& Q2);

} // namespace lmvsc::reference
