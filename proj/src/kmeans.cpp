#include "lmvsc/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "lmvsc/errors.hpp"
#include "lmvsc/parallel.hpp"

namespace lmvsc {
namespace {

// Neumaier compensated summation.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Points and centroids are stored column-wise (d x n, d x k) internally.
void assign_columns(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centroids, int threads,
                    std::vector<int>& labels, std::vector<double>& dist) {
    const Eigen::Index n = x.cols();
    const Eigen::Index k = centroids.cols();
    labels.resize(static_cast<std::size_t>(n));
    dist.resize(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            const auto p = x.col(static_cast<Eigen::Index>(j));
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (Eigen::Index c = 0; c < k; ++c) {
                const double d = (p - centroids.col(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = static_cast<int>(c);
                }
            }
            labels[j] = best;
            dist[j] = best_d;
        }
    });
}

double total(const std::vector<double>& dist) {
    CompensatedSum s;
    for (double d : dist) s.add(d);
    return s.value();
}

struct RestartResult {
    Eigen::MatrixXd centroids;
    std::vector<int> labels;
    double inertia = 0.0;
    int n_iters = 0;
    std::vector<double> trace;
    std::vector<Eigen::Index> seeds;
};

Eigen::MatrixXd seed_plus_plus(const Eigen::MatrixXd& x, int k, std::mt19937_64& rng,
                               std::vector<Eigen::Index>& chosen) {
    const Eigen::Index n = x.cols();
    Eigen::MatrixXd centroids(x.rows(), k);
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    chosen.clear();
    Eigen::Index first = pick(rng);
    chosen.push_back(first);
    centroids.col(0) = x.col(first);
    std::vector<double> d2(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j)
        d2[static_cast<std::size_t>(j)] = (x.col(j) - centroids.col(0)).squaredNorm();

    for (int c = 1; c < k; ++c) {
        const double mass = total(d2);
        Eigen::Index next = -1;
        if (mass > 0.0) {
            const double target = unit(rng) * mass;
            double acc = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                const double w = d2[static_cast<std::size_t>(j)];
                if (w <= 0.0) continue;
                acc += w;
                next = j;
                if (acc > target) break;
            }
        }
        if (next < 0) next = pick(rng); // every point already coincides with a centroid
        chosen.push_back(next);
        centroids.col(c) = x.col(next);
        for (Eigen::Index j = 0; j < n; ++j) {
            const double d = (x.col(j) - centroids.col(c)).squaredNorm();
            auto& cur = d2[static_cast<std::size_t>(j)];
            if (d < cur) cur = d;
        }
    }
    return centroids;
}

RestartResult lloyd(const Eigen::MatrixXd& x, const KMeansConfig& config, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                      static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    std::mt19937_64 rng(seq);

    RestartResult r;
    r.centroids = seed_plus_plus(x, config.k, rng, r.seeds);
    std::vector<double> dist;
    assign_columns(x, r.centroids, config.threads, r.labels, dist);
    r.inertia = total(dist);
    r.trace.push_back(r.inertia);

    const Eigen::Index n = x.cols();
    const int k = config.k;
    std::vector<int> next_labels;
    std::vector<double> next_dist;
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k));
    for (int iter = 0; iter < config.max_iters; ++iter) {
        // Update step.
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(x.rows(), k);
        std::fill(counts.begin(), counts.end(), 0);
        for (Eigen::Index j = 0; j < n; ++j) {
            const int c = r.labels[static_cast<std::size_t>(j)];
            sums.col(c) += x.col(j);
            ++counts[static_cast<std::size_t>(c)];
        }
        std::vector<char> taken(static_cast<std::size_t>(n), 0);
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                r.centroids.col(c) = sums.col(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
                continue;
            }
            // Empty cluster: move it onto the point worst served by its centroid.
            Eigen::Index far = -1;
            double far_d = -1.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (taken[static_cast<std::size_t>(j)]) continue;
                if (dist[static_cast<std::size_t>(j)] > far_d) {
                    far_d = dist[static_cast<std::size_t>(j)];
                    far = j;
                }
            }
            taken[static_cast<std::size_t>(far)] = 1;
            r.centroids.col(c) = x.col(far);
        }

        assign_columns(x, r.centroids, config.threads, next_labels, next_dist);
        const double next_inertia = total(next_dist);
        ++r.n_iters;
        r.trace.push_back(next_inertia);
        if (next_inertia > r.inertia * (1.0 + 1e-10) + 1e-300)
            throw std::logic_error("k-means inertia increased from " + std::to_string(r.inertia) +
                                   " to " + std::to_string(next_inertia));

        const bool unchanged = next_labels == r.labels;
        const double drop = r.inertia - next_inertia;
        r.labels.swap(next_labels);
        dist.swap(next_dist);
        const double prev = r.inertia;
        r.inertia = next_inertia;
        if (unchanged || drop <= config.tol * prev) break;
    }
    return r;
}

} // namespace

void KMeansConfig::validate() const {
    if (k < 1) throw ValueError("k-means: k must be >= 1");
    if (max_iters < 1) throw ValueError("k-means: max_iters must be >= 1");
    if (!(tol >= 0.0)) throw ValueError("k-means: tol must be >= 0");
    if (n_restarts < 1) throw ValueError("k-means: n_restarts must be >= 1");
}

KMeansModel kmeans_fit(const Eigen::MatrixXd& points, const KMeansConfig& config) {
    config.validate();
    if (points.rows() < config.k)
        throw ValueError("k-means: " + std::to_string(points.rows()) + " points < k = " +
                         std::to_string(config.k));
    if (points.cols() < 1) throw ValueError("k-means: points have no features");
    if (!points.allFinite()) throw ValueError("k-means: input contains NaN or Inf");

    const Eigen::MatrixXd x = points.transpose();
    KMeansModel model;
    RestartResult best;
    bool have = false;
    for (int r = 0; r < config.n_restarts; ++r) {
        RestartResult cur = lloyd(x, config, static_cast<std::uint64_t>(r));
        model.restart_inertia.push_back(cur.inertia);
        if (!have || cur.inertia < best.inertia) {
            best = std::move(cur);
            have = true;
        }
    }
    model.centroids = best.centroids.transpose();
    model.inertia = best.inertia;
    model.n_iters = best.n_iters;
    model.labels = LabelVector(std::move(best.labels), config.k);
    model.inertia_trace = std::move(best.trace);
    model.seed_indices = std::move(best.seeds);
    return model;
}

LabelVector assign(const KMeansModel& model, const Eigen::MatrixXd& points, int threads) {
    if (points.cols() != model.centroids.cols())
        throw DimensionMismatch("assign: points have " + std::to_string(points.cols()) +
                                " features, centroids have " +
                                std::to_string(model.centroids.cols()));
    std::vector<int> labels;
    std::vector<double> dist;
    const Eigen::MatrixXd x = points.transpose();
    const Eigen::MatrixXd c = model.centroids.transpose();
    assign_columns(x, c, threads, labels, dist);
    return LabelVector(std::move(labels), static_cast<int>(model.centroids.rows()));
}

} // namespace lmvsc
