#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lmvsc/anchor_graph.hpp"

namespace lmvsc {

/// Degree-normalized anchor graph Zhat = Z diag(degrees)^(-1/2).
struct NormalizedGraph {
    Eigen::MatrixXd Zhat;
    /// Degrees of the anchors that were kept, in column order of Zhat.
    Eigen::VectorXd degrees;
    /// Original anchor indices removed for (near-)zero degree.
    std::vector<Eigen::Index> dropped_anchors;
};

/// Columns with degree below this are dropped during normalization.
inline constexpr double kMinAnchorDegree = 1e-12;

/// Throws DegenerateGraph when every anchor has vanishing degree.
NormalizedGraph normalize_graph(const AnchorGraph& graph);

/// Zbar = [Zhat^1, ..., Zhat^v] / sqrt(v).
struct ConcatGraph {
    Eigen::MatrixXd Zbar;
    /// [begin, end) column range of each view inside Zbar.
    std::vector<std::pair<Eigen::Index, Eigen::Index>> view_offsets;
};

/// Throws ValueError for an empty list and DimensionMismatch when the graphs
/// disagree on n. A single graph is returned unscaled.
ConcatGraph concat_views(const std::vector<NormalizedGraph>& graphs);

struct Embedding {
    /// n x k, orthonormal columns.
    Eigen::MatrixXd Q;
    /// Non-increasing.
    Eigen::VectorXd singular_values;
    /// sigma_k^2 - sigma_{k+1}^2 (sigma_{k+1} = 0 when k equals the column count).
    double eigengap = 0.0;
};

/// Eigenvalues at or below this count as zero when checking the rank.
inline constexpr double kRankThreshold = 1e-12;

/// Flips each column so its largest-magnitude entry is positive (ties: lowest row).
void apply_sign_convention(Eigen::MatrixXd& Q);

/// Z'Z accumulated over fixed row blocks; the block partial sums are added in
/// block order, so the result is identical for every thread count.
Eigen::MatrixXd blocked_gram(const Eigen::MatrixXd& Z, int threads = 1);

/// Top-k left singular vectors of Zbar through the small Gram matrix
/// Zbar'Zbar = V L V': Q = Zbar V_k L_k^(-1/2).
///
/// Throws DimensionMismatch when k is out of range and RankDeficient when
/// fewer than k eigenvalues exceed kRankThreshold.
Embedding embed(const ConcatGraph& zbar, int k, int threads = 1);

/// Scales every row of Q to unit length (zero rows stay zero).
Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& Q);

/// CSV with n rows and k columns.
void write_embedding_csv(const std::filesystem::path& path, const Embedding& embedding);

} // namespace lmvsc
