#include "lmvsc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lmvsc/errors.hpp"

namespace lmvsc {

ContingencyTable contingency(const LabelVector& pred, const LabelVector& truth) {
    if (pred.size() != truth.size())
        throw LengthMismatch("label vectors differ in length (" + std::to_string(pred.size()) +
                             " vs " + std::to_string(truth.size()) + ")");
    if (pred.size() == 0) throw ValueError("label vectors are empty");
    ContingencyTable t;
    t.counts.setZero(pred.num_classes(), truth.num_classes());
    for (std::size_t i = 0; i < pred.size(); ++i) ++t.counts(pred[i], truth[i]);
    t.n = static_cast<std::int64_t>(pred.size());
    return t;
}

std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    if (cost.cols() != cost.rows()) throw DimensionMismatch("assignment cost must be square");
    const double inf = std::numeric_limits<double>::infinity();
    // Potentials u (rows) and v (columns); p[j] is the row matched to column j.
    // Index 0 is a sentinel, real rows/columns are 1-based.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] != 0) row_to_col[static_cast<std::size_t>(p[j] - 1)] = j - 1;
    return row_to_col;
}

double accuracy(const LabelVector& pred, const LabelVector& truth) {
    const ContingencyTable t = contingency(pred, truth);
    const auto size = std::max(t.counts.rows(), t.counts.cols());
    Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(size, size);
    cost.topLeftCorner(t.counts.rows(), t.counts.cols()) = -t.counts.cast<double>();
    const auto match = solve_assignment(cost);
    std::int64_t hits = 0;
    for (Eigen::Index r = 0; r < t.counts.rows(); ++r) {
        const int c = match[static_cast<std::size_t>(r)];
        if (c < t.counts.cols()) hits += t.counts(r, c);
    }
    return static_cast<double>(hits) / static_cast<double>(t.n);
}

namespace {

double entropy(const Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>& marginal, double n) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < marginal.size(); ++i) {
        if (marginal(i) == 0) continue;
        const double p = static_cast<double>(marginal(i)) / n;
        h -= p * std::log(p);
    }
    return h;
}

} // namespace

double nmi(const LabelVector& pred, const LabelVector& truth) {
    const ContingencyTable t = contingency(pred, truth);
    const double n = static_cast<double>(t.n);
    const Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> rows = t.counts.rowwise().sum();
    const Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> cols = t.counts.colwise().sum().transpose();
    const double hp = entropy(rows, n);
    const double ht = entropy(cols, n);
    if (hp == 0.0 && ht == 0.0) return 1.0;
    if (hp == 0.0 || ht == 0.0) return 0.0;
    double mi = 0.0;
    for (Eigen::Index r = 0; r < t.counts.rows(); ++r) {
        for (Eigen::Index c = 0; c < t.counts.cols(); ++c) {
            const auto nij = t.counts(r, c);
            if (nij == 0) continue;
            const double pij = static_cast<double>(nij) / n;
            mi += pij * std::log(n * static_cast<double>(nij) /
                                 (static_cast<double>(rows(r)) * static_cast<double>(cols(c))));
        }
    }
    return std::clamp(mi / std::sqrt(hp * ht), 0.0, 1.0);
}

double purity(const LabelVector& pred, const LabelVector& truth) {
    const ContingencyTable t = contingency(pred, truth);
    std::int64_t total = 0;
    for (Eigen::Index r = 0; r < t.counts.rows(); ++r) total += t.counts.row(r).maxCoeff();
    return static_cast<double>(total) / static_cast<double>(t.n);
}

MetricValues evaluate(const LabelVector& pred, const LabelVector& truth) {
    return {accuracy(pred, truth), nmi(pred, truth), purity(pred, truth)};
}

} // namespace lmvsc
