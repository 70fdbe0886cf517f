#include "lmvsc/embedding.hpp"

#include <cmath>
#include <string>

#include "lmvsc/errors.hpp"
#include "lmvsc/io.hpp"
#include "lmvsc/parallel.hpp"

namespace lmvsc {

NormalizedGraph normalize_graph(const AnchorGraph& graph) {
    NormalizedGraph out;
    std::vector<Eigen::Index> kept;
    for (Eigen::Index j = 0; j < graph.degrees.size(); ++j) {
        if (graph.degrees(j) < kMinAnchorDegree) {
            out.dropped_anchors.push_back(j);
        } else {
            kept.push_back(j);
        }
    }
    if (kept.empty()) throw DegenerateGraph("every anchor has zero degree");
    const auto n = graph.Z.rows();
    out.Zhat.resize(n, static_cast<Eigen::Index>(kept.size()));
    out.degrees.resize(static_cast<Eigen::Index>(kept.size()));
    for (std::size_t c = 0; c < kept.size(); ++c) {
        const auto col = static_cast<Eigen::Index>(c);
        const double deg = graph.degrees(kept[c]);
        out.degrees(col) = deg;
        out.Zhat.col(col) = graph.Z.col(kept[c]) / std::sqrt(deg);
    }
    return out;
}

ConcatGraph concat_views(const std::vector<NormalizedGraph>& graphs) {
    if (graphs.empty()) throw ValueError("concat_views needs at least one graph");
    const Eigen::Index n = graphs.front().Zhat.rows();
    Eigen::Index cols = 0;
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        if (graphs[i].Zhat.rows() != n)
            throw DimensionMismatch("graph " + std::to_string(i) + " has " +
                                    std::to_string(graphs[i].Zhat.rows()) + " rows, expected " +
                                    std::to_string(n));
        cols += graphs[i].Zhat.cols();
    }
    ConcatGraph out;
    if (graphs.size() == 1) {
        out.Zbar = graphs.front().Zhat;
        out.view_offsets.emplace_back(0, cols);
        return out;
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(graphs.size()));
    out.Zbar.resize(n, cols);
    Eigen::Index at = 0;
    for (const auto& g : graphs) {
        out.Zbar.middleCols(at, g.Zhat.cols()) = scale * g.Zhat;
        out.view_offsets.emplace_back(at, at + g.Zhat.cols());
        at += g.Zhat.cols();
    }
    return out;
}

void apply_sign_convention(Eigen::MatrixXd& Q) {
    for (Eigen::Index c = 0; c < Q.cols(); ++c) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index r = 0; r < Q.rows(); ++r) {
            const double a = std::abs(Q(r, c));
            if (a > best) {
                best = a;
                arg = r;
            }
        }
        if (Q.rows() > 0 && Q(arg, c) < 0.0) Q.col(c) = -Q.col(c);
    }
}

Eigen::MatrixXd blocked_gram(const Eigen::MatrixXd& Z, int threads) {
    constexpr Eigen::Index kBlock = 2048;
    const Eigen::Index n = Z.rows();
    const Eigen::Index blocks = (n + kBlock - 1) / kBlock;
    std::vector<Eigen::MatrixXd> partial(static_cast<std::size_t>(blocks));
    parallel_for(static_cast<std::size_t>(blocks), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t b = begin; b < end; ++b) {
            const Eigen::Index start = static_cast<Eigen::Index>(b) * kBlock;
            const Eigen::Index rows = std::min(kBlock, n - start);
            const auto block = Z.middleRows(start, rows);
            partial[b].noalias() = block.transpose() * block;
        }
    });
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(Z.cols(), Z.cols());
    for (const auto& p : partial) gram += p;
    return gram;
}

Embedding embed(const ConcatGraph& zbar, int k, int threads) {
    const Eigen::MatrixXd& Z = zbar.Zbar;
    const Eigen::Index cols = Z.cols();
    if (k < 1 || k > std::min(Z.rows(), cols))
        throw DimensionMismatch("embed: k = " + std::to_string(k) + " must lie in [1, " +
                                std::to_string(std::min(Z.rows(), cols)) + "]");

    Eigen::MatrixXd gram = blocked_gram(Z, threads);
    gram = 0.5 * (gram + gram.transpose()).eval();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success) throw Error("embed: eigendecomposition failed");
    // Eigenvalues come back in increasing order.
    const Eigen::VectorXd& values = eig.eigenvalues();
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < values.size(); ++i)
        if (values(i) > kRankThreshold) ++rank;
    if (rank < static_cast<std::size_t>(k))
        throw RankDeficient("embed: numerical rank " + std::to_string(rank) + " < k = " +
                                std::to_string(k),
                            rank);

    Embedding out;
    out.singular_values.resize(k);
    Eigen::MatrixXd lift(cols, k);
    for (int c = 0; c < k; ++c) {
        const Eigen::Index idx = cols - 1 - c;
        const double sigma = std::sqrt(values(idx));
        out.singular_values(c) = sigma;
        lift.col(c) = eig.eigenvectors().col(idx) / sigma;
    }
    const double next = k < cols ? std::max(0.0, values(cols - 1 - k)) : 0.0;
    out.eigengap = values(cols - k) - next;
    out.Q.noalias() = Z * lift;
    apply_sign_convention(out.Q);
    return out;
}

Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& Q) {
    Eigen::MatrixXd out = Q;
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        const double norm = out.row(r).norm();
        if (norm > 0.0) out.row(r) /= norm;
    }
    return out;
}

void write_embedding_csv(const std::filesystem::path& path, const Embedding& embedding) {
    io::write_file_atomic(path, io::format_csv(embedding.Q));
}

} // namespace lmvsc
