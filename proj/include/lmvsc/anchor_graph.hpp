#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lmvsc/dataset.hpp"
#include "lmvsc/kmeans.hpp"

namespace lmvsc {

/// m landmarks for one view, stored as the columns of a d x m matrix.
class AnchorSet {
public:
    AnchorSet() = default;
    /// Throws ValueError when there are no columns or an entry is non-finite.
    explicit AnchorSet(Eigen::MatrixXd anchors);

    const Eigen::MatrixXd& anchors() const noexcept { return anchors_; }
    Eigen::Index m() const noexcept { return anchors_.cols(); }
    Eigen::Index features() const noexcept { return anchors_.rows(); }
    /// Indices of columns that exactly repeat an earlier column.
    std::vector<Eigen::Index> duplicate_columns() const;

private:
    Eigen::MatrixXd anchors_;
};

/// n x m sample-to-anchor coefficients; each row lies on the probability simplex.
struct AnchorGraph {
    Eigen::MatrixXd Z;
    /// Column sums of Z.
    Eigen::VectorXd degrees;

    /// Computes degrees from Z.
    static AnchorGraph from_coefficients(Eigen::MatrixXd Z);
    /// Largest violation of nonnegativity, unit row sums and degree consistency.
    double invariant_violation() const;
};

struct QpSettings {
    double alpha = 0.01;
    int max_iters = 500;
    double kkt_tol = 1e-8;

    void validate() const;
};

/// Euclidean projection onto {z >= 0, sum z = 1} (sort-and-threshold).
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v);

/// ||x - A z||^2 + alpha ||z||^2
double anchor_objective(const Eigen::VectorXd& x, const AnchorSet& anchors, double alpha,
                        const Eigen::VectorXd& z);

struct QpSolution {
    Eigen::VectorXd z;
    /// Scaled KKT residual of the returned point (see SimplexQp::kkt_residual).
    double kkt_residual = 0.0;
    int iterations = 0;
    /// 1/2 z'Gz - b'z after every accepted step, starting at the uniform vector.
    std::vector<double> objective_trace;
};

/// Solver for min_{z in simplex} ||x - A z||^2 + alpha ||z||^2 with the anchor
/// Gram matrix factored once and reused across samples.
///
/// Writing G = 2(A'A + alpha I) and b = 2A'x, the problem is
/// min 1/2 z'Gz - b'z over the simplex. The solver runs accelerated projected
/// gradient (monotone variant, step 1/L) until the support settles, then a
/// primal active-set phase that solves the equality-constrained problem on the
/// free face exactly. Both phases never increase the objective.
class SimplexQp {
public:
    SimplexQp(const AnchorSet& anchors, const QpSettings& settings);

    /// Solves for one sample given b = 2 A'x. Throws ConvergenceError if the
    /// KKT residual is still above kkt_tol after max_iters iterations.
    QpSolution solve_linear_term(const Eigen::VectorXd& b, bool keep_trace = false) const;
    QpSolution solve(const Eigen::VectorXd& x, bool keep_trace = false) const;

    /// Max violation of the simplex KKT conditions at z, divided by
    /// max(1, max|G|, max|b|). With g = Gz - b and lambda = min over the
    /// support of g: max(max_support g - lambda, lambda - min_all g).
    double kkt_residual(const Eigen::VectorXd& b, const Eigen::VectorXd& z) const;

    const Eigen::MatrixXd& hessian() const noexcept { return hessian_; }
    double lipschitz() const noexcept { return lipschitz_; }
    const QpSettings& settings() const noexcept { return settings_; }
    const AnchorSet& anchors() const noexcept { return anchors_; }

private:
    AnchorSet anchors_;
    QpSettings settings_;
    Eigen::MatrixXd hessian_;
    double lipschitz_ = 0.0;
    double hessian_scale_ = 1.0;
};

/// One sample's coefficients over the anchors.
Eigen::VectorXd solve_anchor_coeffs(const Eigen::VectorXd& x, const AnchorSet& anchors,
                                    const QpSettings& settings);

/// Solves the per-sample problem for every column of the view. Rows are
/// independent, so the result does not depend on `threads`. A failing sample
/// surfaces as ConvergenceError whose sample() is its column index.
AnchorGraph learn_anchor_graph(const ViewMatrix& view, const AnchorSet& anchors,
                               const QpSettings& settings, int threads = 1);

/// Handcrafted baseline: Gaussian kernel weights over the r nearest anchors,
/// normalized per row. Throws ValueError unless 1 <= r < m and delta > 0.
AnchorGraph gaussian_anchor_graph(const ViewMatrix& view, const AnchorSet& anchors, int r,
                                  double delta);

/// Median sample-to-anchor Euclidean distance; a starting point for delta.
double median_anchor_distance(const ViewMatrix& view, const AnchorSet& anchors);

/// The m k-means centroids of the view's samples. Throws ValueError when n < m.
AnchorSet select_anchors(const ViewMatrix& view, int m, const KMeansConfig& config);

enum class MatrixMarketLayout { array, coordinate };

void write_anchor_graph(const std::filesystem::path& path, const AnchorGraph& graph,
                        MatrixMarketLayout layout = MatrixMarketLayout::coordinate);
AnchorGraph read_anchor_graph(const std::filesystem::path& path);

} // namespace lmvsc
