#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "lmvsc/dataset.hpp"

namespace lmvsc {

struct KMeansConfig {
    int k = 1;
    int max_iters = 300;
    /// Stop when the relative inertia decrease falls to or below this value.
    double tol = 1e-6;
    int n_restarts = 10;
    std::uint64_t seed = 0;
    /// Parallelism budget for the assignment step (0 = all cores).
    int threads = 1;

    void validate() const;
};

struct KMeansModel {
    /// k x d, one centroid per row.
    Eigen::MatrixXd centroids;
    /// Sum of squared distances to the assigned centroid.
    double inertia = 0.0;
    int n_iters = 0;
    /// Assignment of the training points under the final centroids.
    LabelVector labels;
    /// Inertia after every (assign, update) pass of the winning restart.
    std::vector<double> inertia_trace;
    /// Final inertia of every restart, in restart order.
    std::vector<double> restart_inertia;
    /// Row indices of the points chosen by k-means++ in the winning restart.
    std::vector<Eigen::Index> seed_indices;
};

/// Lloyd's algorithm with k-means++ seeding, best of `n_restarts`.
/// `points` is n x d (one point per row). Throws ValueError when n < k or the
/// input contains non-finite values.
KMeansModel kmeans_fit(const Eigen::MatrixXd& points, const KMeansConfig& config);

/// Nearest centroid by squared Euclidean distance; ties go to the lowest
/// centroid index. Throws DimensionMismatch when d differs from the model.
LabelVector assign(const KMeansModel& model, const Eigen::MatrixXd& points, int threads = 1);

} // namespace lmvsc
