#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lmvsc/anchor_graph.hpp"
#include "lmvsc/dataset.hpp"
#include "lmvsc/embedding.hpp"
#include "lmvsc/kmeans.hpp"
#include "lmvsc/metrics.hpp"

namespace lmvsc {

/// Independent stream seed from a base seed (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

struct LmvscConfig {
    int k = 2;
    int m = 50;
    double alpha = 0.01;
    /// k is overwritten with m; the seed is derived from `seed` per view.
    KMeansConfig kmeans_anchor{};
    /// k is overwritten with k; the seed is derived from `seed`.
    KMeansConfig kmeans_final{};
    /// alpha is overwritten with `alpha`.
    QpSettings qp{};
    StandardizeMode standardize_mode = StandardizeMode::none;
    std::uint64_t seed = 0;
    /// Parallelism budget (0 = all cores). Results do not depend on it.
    int threads = 1;
    /// Scale rows of Q to unit length before the final k-means.
    bool normalize_q = false;
    /// Keep the per-view anchor graphs in the result.
    bool keep_graphs = false;

    /// Throws ValueError: k >= 2, m >= k (fewer anchors than subspaces cannot
    /// represent every cluster), alpha > 0.
    void validate() const;
};

struct StageTimings {
    double anchor_kmeans = 0.0;
    double graph_learning = 0.0;
    double embedding = 0.0;
    double final_kmeans = 0.0;
    double total = 0.0;
};

struct ClusteringResult {
    LabelVector labels;
    std::optional<MetricValues> metrics;
    StageTimings timings;
    LmvscConfig config;
    std::vector<AnchorGraph> per_view_graphs;
    Eigen::VectorXd singular_values;
    double eigengap = 0.0;
    /// Inertia of the final k-means on the embedding.
    double final_inertia = 0.0;
    std::vector<std::string> warnings;
};

/// Anchor selection, per-view graph learning, normalization, concatenation,
/// spectral embedding and final k-means. Metrics are filled iff the dataset
/// carries labels. Errors keep their type and gain a "[stage]" prefix.
ClusteringResult lmvsc_fit(const MultiViewDataset& data, const LmvscConfig& config);

/// The one-view case; identical to lmvsc_fit on the wrapped view.
ClusteringResult single_view_fit(const ViewMatrix& view, const LmvscConfig& config,
                                 std::optional<LabelVector> labels = std::nullopt);

enum class GridSelection { best_acc, best_inertia };

GridSelection parse_grid_selection(std::string_view name);
std::string_view to_string(GridSelection selection);

struct GridSpec {
    std::vector<int> m_values;
    std::vector<double> alpha_values;
    /// best_inertia picks the lowest final k-means inertia; it is a heuristic
    /// for unlabeled data, not a model-selection criterion.
    GridSelection selection = GridSelection::best_acc;

    /// m in {k, 50, 100}, alpha in {0.001, 0.01, 0.1, 1, 10}.
    static GridSpec defaults(int k);
};

struct GridCell {
    int m = 0;
    double alpha = 0.0;
    bool skipped = false;
    std::string reason;
    std::optional<MetricValues> metrics;
    double final_inertia = 0.0;
    StageTimings timings;
};

struct GridResult {
    ClusteringResult best;
    std::size_t best_index = 0;
    std::vector<GridCell> table;
};

/// Fits every (m, alpha) cell with the shared seed. Cells failing with
/// ValueError, ConvergenceError, RankDeficient or DegenerateGraph are recorded
/// as skipped. Throws ValueError when best_acc is requested without labels or
/// when every cell is skipped.
GridResult grid_search(const MultiViewDataset& data, const GridSpec& grid,
                       const LmvscConfig& base);

nlohmann::json to_json(const LmvscConfig& config);
nlohmann::json to_json(const ClusteringResult& result);
/// Columns: m,alpha,status,acc,nmi,purity,final_inertia,total_seconds,reason
std::string grid_table_csv(const GridResult& grid);

struct BenchSpec {
    std::vector<Eigen::Index> ladder{5000, 10000, 20000, 40000};
    int m = 50;
    int v = 3;
    int k = 10;
    Eigen::Index d = 50;
    Eigen::Index subspace_dim = 5;
    double noise_sigma = 0.01;
    double alpha = 0.01;
    int reps = 5;
    std::uint64_t seed = 0;
    int threads = 1;
    /// Anchor k-means is outside the timed stages; keep it short.
    int anchor_kmeans_iters = 20;
    int anchor_kmeans_restarts = 1;
};

struct BenchRow {
    Eigen::Index n = 0;
    double anchor_kmeans = 0.0;
    /// Medians over the repetitions.
    double graph_learning = 0.0;
    double embedding = 0.0;
    double learn_plus_embed = 0.0;
    double final_kmeans = 0.0;
};

struct BenchReport {
    std::vector<BenchRow> rows;
    /// Least-squares slope of log(learn_plus_embed) on log(n); empty for a
    /// ladder with fewer than two distinct sizes.
    std::optional<double> slope;
};

/// Times graph learning + embedding across the ladder of sample counts on
/// synthetic data (median of `reps` runs per size).
BenchReport run_scaling_bench(const BenchSpec& spec);

std::string bench_csv(const BenchReport& report);

/// Least-squares slope of log(y) against log(x).
std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace lmvsc
