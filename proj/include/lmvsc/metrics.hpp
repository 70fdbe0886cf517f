#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "lmvsc/dataset.hpp"

namespace lmvsc {

/// Co-occurrence counts, predicted classes on rows and true classes on columns.
struct ContingencyTable {
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;
    std::int64_t n = 0;
};

/// Throws LengthMismatch when the vectors differ in length, ValueError when empty.
ContingencyTable contingency(const LabelVector& pred, const LabelVector& truth);

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method,
/// O(k^3)). Returns the column assigned to each row.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

/// Best one-to-one matching of predicted to true classes, as a fraction of n.
double accuracy(const LabelVector& pred, const LabelVector& truth);

/// Mutual information over the geometric mean of the two entropies (natural
/// log). Two single-cluster partitions score 1; otherwise a zero entropy on
/// either side scores 0.
double nmi(const LabelVector& pred, const LabelVector& truth);

/// Fraction of samples that belong to the majority true class of their cluster.
double purity(const LabelVector& pred, const LabelVector& truth);

struct MetricValues {
    double acc = 0.0;
    double nmi = 0.0;
    double purity = 0.0;
};

MetricValues evaluate(const LabelVector& pred, const LabelVector& truth);

} // namespace lmvsc
