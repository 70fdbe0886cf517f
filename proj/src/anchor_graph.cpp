#include "lmvsc/anchor_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lmvsc/errors.hpp"
#include "lmvsc/io.hpp"
#include "lmvsc/parallel.hpp"

namespace lmvsc {

AnchorSet::AnchorSet(Eigen::MatrixXd anchors) : anchors_(std::move(anchors)) {
    if (anchors_.cols() < 1 || anchors_.rows() < 1)
        throw ValueError("anchor set must contain at least one anchor");
    if (!anchors_.allFinite()) throw ValueError("anchor set contains NaN or Inf");
}

std::vector<Eigen::Index> AnchorSet::duplicate_columns() const {
    std::vector<Eigen::Index> dups;
    for (Eigen::Index j = 1; j < anchors_.cols(); ++j)
        for (Eigen::Index i = 0; i < j; ++i)
            if (anchors_.col(i) == anchors_.col(j)) {
                dups.push_back(j);
                break;
            }
    return dups;
}

AnchorGraph AnchorGraph::from_coefficients(Eigen::MatrixXd Z) {
    AnchorGraph g;
    g.degrees = Z.colwise().sum().transpose();
    g.Z = std::move(Z);
    return g;
}

double AnchorGraph::invariant_violation() const {
    double worst = 0.0;
    if (Z.size() == 0) return worst;
    worst = std::max(worst, -Z.minCoeff());
    worst = std::max(worst, (Z.rowwise().sum().array() - 1.0).abs().maxCoeff());
    worst = std::max(worst, (Z.colwise().sum().transpose() - degrees).cwiseAbs().maxCoeff());
    return worst;
}

void QpSettings::validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ValueError("QP: alpha must be > 0");
    if (max_iters < 1) throw ValueError("QP: max_iters must be >= 1");
    if (!(kkt_tol > 0.0)) throw ValueError("QP: kkt_tol must be > 0");
}

Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
    const Eigen::Index m = v.size();
    std::vector<double> sorted(v.data(), v.data() + m);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumsum = 0.0;
    double theta = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        cumsum += sorted[static_cast<std::size_t>(i)];
        const double t = (cumsum - 1.0) / static_cast<double>(i + 1);
        if (sorted[static_cast<std::size_t>(i)] - t > 0.0) theta = t;
    }
    Eigen::VectorXd z = (v.array() - theta).max(0.0).matrix();
    const double s = z.sum();
    if (s > 0.0) z /= s;
    return z;
}

double anchor_objective(const Eigen::VectorXd& x, const AnchorSet& anchors, double alpha,
                        const Eigen::VectorXd& z) {
    return (x - anchors.anchors() * z).squaredNorm() + alpha * z.squaredNorm();
}

namespace {

double largest_eigenvalue(const Eigen::MatrixXd& sym) {
    Eigen::VectorXd u = Eigen::VectorXd::Ones(sym.rows()) / std::sqrt(static_cast<double>(sym.rows()));
    double lambda = 0.0;
    for (int it = 0; it < 300; ++it) {
        Eigen::VectorXd w = sym * u;
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        const double next = u.dot(w);
        u = w / norm;
        if (std::abs(next - lambda) <= 1e-12 * std::abs(next)) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    return lambda;
}

double quad_value(const Eigen::MatrixXd& G, const Eigen::VectorXd& b, const Eigen::VectorXd& z) {
    return 0.5 * z.dot(G * z) - b.dot(z);
}

} // namespace

SimplexQp::SimplexQp(const AnchorSet& anchors, const QpSettings& settings)
    : anchors_(anchors), settings_(settings) {
    settings_.validate();
    const Eigen::MatrixXd& A = anchors_.anchors();
    const Eigen::MatrixXd gram = A.transpose() * A;
    hessian_ = 2.0 * gram;
    hessian_.diagonal().array() += 2.0 * settings_.alpha;
    // Power iteration underestimates slightly; the 1% margin keeps 1/L a safe step.
    lipschitz_ = 2.0 * (1.01 * largest_eigenvalue(gram) + settings_.alpha);
    hessian_scale_ = std::max(1.0, hessian_.cwiseAbs().maxCoeff());
}

double SimplexQp::kkt_residual(const Eigen::VectorXd& b, const Eigen::VectorXd& z) const {
    const Eigen::VectorXd g = hessian_ * z - b;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < z.size(); ++j) {
        if (z(j) > 0.0) {
            lo = std::min(lo, g(j));
            hi = std::max(hi, g(j));
        }
    }
    if (!std::isfinite(lo)) return std::numeric_limits<double>::infinity();
    const double residual = std::max(hi - lo, lo - g.minCoeff());
    const double feas = std::max({std::abs(z.sum() - 1.0), -std::min(0.0, z.minCoeff())});
    const double scale = std::max(hessian_scale_, b.cwiseAbs().maxCoeff());
    return std::max(residual / scale, feas);
}

QpSolution SimplexQp::solve(const Eigen::VectorXd& x, bool keep_trace) const {
    if (x.size() != anchors_.features())
        throw DimensionMismatch("sample has " + std::to_string(x.size()) +
                                " features, anchors have " + std::to_string(anchors_.features()));
    return solve_linear_term(2.0 * (anchors_.anchors().transpose() * x), keep_trace);
}

QpSolution SimplexQp::solve_linear_term(const Eigen::VectorXd& b, bool keep_trace) const {
    const Eigen::Index m = hessian_.rows();
    const Eigen::MatrixXd& G = hessian_;
    QpSolution out;
    if (m == 1) {
        out.z = Eigen::VectorXd::Ones(1);
        out.kkt_residual = 0.0;
        if (keep_trace) out.objective_trace.push_back(quad_value(G, b, out.z));
        return out;
    }

    Eigen::VectorXd z = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
    double q = quad_value(G, b, z);
    if (keep_trace) out.objective_trace.push_back(q);
    int iters = 0;
    const int max_iters = settings_.max_iters;
    const double tol = settings_.kkt_tol;

    // Phase 1: monotone accelerated projected gradient until the support settles.
    {
        double L = lipschitz_;
        Eigen::VectorXd prev = z;
        double t = 1.0;
        int stable = 0;
        auto support_of = [](const Eigen::VectorXd& v) {
            std::vector<char> s(static_cast<std::size_t>(v.size()));
            for (Eigen::Index j = 0; j < v.size(); ++j) s[static_cast<std::size_t>(j)] = v(j) > 0.0;
            return s;
        };
        std::vector<char> support = support_of(z);
        const int budget = std::min(max_iters / 2, 200);
        while (iters < budget) {
            ++iters;
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            const Eigen::VectorXd y = z + ((t - 1.0) / t_next) * (z - prev);
            Eigen::VectorXd cand = project_simplex(y - (G * y - b) / L);
            double q_cand = quad_value(G, b, cand);
            if (q_cand > q) {
                // Momentum overshoot: restart from a plain projected step.
                t = 1.0;
                cand = project_simplex(z - (G * z - b) / L);
                q_cand = quad_value(G, b, cand);
                while (q_cand > q && L < 1e300) {
                    L *= 2.0;
                    cand = project_simplex(z - (G * z - b) / L);
                    q_cand = quad_value(G, b, cand);
                }
                if (q_cand > q) break;
            } else {
                t = t_next;
            }
            prev = z;
            z = std::move(cand);
            q = q_cand;
            if (keep_trace) out.objective_trace.push_back(q);
            auto next_support = support_of(z);
            stable = next_support == support ? stable + 1 : 0;
            support.swap(next_support);
            if (stable >= 3 && iters >= 5) break;
        }
    }

    // Phase 2: primal active set, starting from the support found above.
    std::vector<Eigen::Index> free;
    for (Eigen::Index j = 0; j < m; ++j) {
        if (z(j) > 0.0) {
            free.push_back(j);
        } else {
            z(j) = 0.0;
        }
    }
    double residual = kkt_residual(b, z);
    while (residual > tol && iters < max_iters) {
        ++iters;
        const auto f = static_cast<Eigen::Index>(free.size());
        Eigen::MatrixXd Gff(f, f);
        Eigen::VectorXd bf(f);
        Eigen::VectorXd zf(f);
        for (Eigen::Index a = 0; a < f; ++a) {
            bf(a) = b(free[static_cast<std::size_t>(a)]);
            zf(a) = z(free[static_cast<std::size_t>(a)]);
            for (Eigen::Index c = 0; c < f; ++c)
                Gff(a, c) = G(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(c)]);
        }
        // Minimizer on the face: z = G^-1 (b - mu 1), with mu fixed by 1'z = 1.
        const Eigen::LLT<Eigen::MatrixXd> llt(Gff);
        const Eigen::VectorXd gb = llt.solve(bf);
        const Eigen::VectorXd g1 = llt.solve(Eigen::VectorXd::Ones(f));
        const double mu = (gb.sum() - 1.0) / g1.sum();
        const Eigen::VectorXd target = gb - mu * g1;
        const Eigen::VectorXd step = target - zf;

        double alpha_step = 1.0;
        Eigen::Index blocking = -1;
        for (Eigen::Index a = 0; a < f; ++a) {
            if (step(a) < 0.0) {
                const double limit = -zf(a) / step(a);
                if (limit < alpha_step) {
                    alpha_step = limit;
                    blocking = a;
                }
            }
        }
        zf += alpha_step * step;
        if (blocking >= 0) zf(blocking) = 0.0;
        for (Eigen::Index a = 0; a < f; ++a) z(free[static_cast<std::size_t>(a)]) = std::max(0.0, zf(a));

        if (blocking >= 0) {
            free.erase(free.begin() + blocking);
        } else {
            // On the face optimum: release the most violated zero coordinate.
            const Eigen::VectorXd g = G * z - b;
            const double lambda = -mu;
            Eigen::Index enter = -1;
            double worst = 0.0;
            for (Eigen::Index j = 0; j < m; ++j) {
                if (std::find(free.begin(), free.end(), j) != free.end()) continue;
                const double nu = g(j) - lambda;
                if (nu < worst) {
                    worst = nu;
                    enter = j;
                }
            }
            if (enter >= 0) {
                free.insert(std::upper_bound(free.begin(), free.end(), enter), enter);
            }
        }
        if (keep_trace) out.objective_trace.push_back(quad_value(G, b, z));
        residual = kkt_residual(b, z);
    }

    const double s = z.sum();
    if (s > 0.0) z /= s;
    residual = kkt_residual(b, z);
    out.iterations = iters;
    out.kkt_residual = residual;
    if (residual > tol)
        throw ConvergenceError("simplex QP did not reach KKT tolerance " + std::to_string(tol) +
                                   " in " + std::to_string(max_iters) +
                                   " iterations (residual " + std::to_string(residual) + ")",
                               residual);
    out.z = std::move(z);
    return out;
}

Eigen::VectorXd solve_anchor_coeffs(const Eigen::VectorXd& x, const AnchorSet& anchors,
                                    const QpSettings& settings) {
    return SimplexQp(anchors, settings).solve(x).z;
}

AnchorGraph learn_anchor_graph(const ViewMatrix& view, const AnchorSet& anchors,
                               const QpSettings& settings, int threads) {
    if (view.features() != anchors.features())
        throw DimensionMismatch("view has " + std::to_string(view.features()) +
                                " features, anchors have " + std::to_string(anchors.features()));
    const SimplexQp qp(anchors, settings);
    const Eigen::MatrixXd linear = 2.0 * (anchors.anchors().transpose() * view.data());
    const Eigen::Index n = view.samples();
    Eigen::MatrixXd Z(n, anchors.m());
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            const auto col = static_cast<Eigen::Index>(j);
            try {
                Z.row(col) = qp.solve_linear_term(linear.col(col)).z.transpose();
            } catch (const ConvergenceError& e) {
                throw ConvergenceError("sample " + std::to_string(j) + ": " + e.what(),
                                       e.residual(), j);
            }
        }
    });
    return AnchorGraph::from_coefficients(std::move(Z));
}

AnchorGraph gaussian_anchor_graph(const ViewMatrix& view, const AnchorSet& anchors, int r,
                                  double delta) {
    const Eigen::Index m = anchors.m();
    if (r < 1 || r >= m)
        throw ValueError("gaussian anchor graph needs 1 <= r < m (r=" + std::to_string(r) +
                         ", m=" + std::to_string(m) + ")");
    if (!(delta > 0.0)) throw ValueError("gaussian anchor graph needs delta > 0");
    if (view.features() != anchors.features())
        throw DimensionMismatch("view and anchors disagree on feature count");

    const Eigen::Index n = view.samples();
    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n, m);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    Eigen::VectorXd d2(m);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < m; ++j)
            d2(j) = (view.data().col(i) - anchors.anchors().col(j)).squaredNorm();
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](Eigen::Index a, Eigen::Index b) { return d2(a) < d2(b); });
        // Shifting by the nearest distance leaves the normalized weights unchanged.
        const double shift = d2(order.front());
        double total = 0.0;
        for (int t = 0; t < r; ++t) {
            const Eigen::Index j = order[static_cast<std::size_t>(t)];
            const double w = std::exp(-(d2(j) - shift) / (2.0 * delta * delta));
            Z(i, j) = w;
            total += w;
        }
        Z.row(i) /= total;
    }
    return AnchorGraph::from_coefficients(std::move(Z));
}

double median_anchor_distance(const ViewMatrix& view, const AnchorSet& anchors) {
    if (view.features() != anchors.features())
        throw DimensionMismatch("view and anchors disagree on feature count");
    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(view.samples() * anchors.m()));
    for (Eigen::Index i = 0; i < view.samples(); ++i)
        for (Eigen::Index j = 0; j < anchors.m(); ++j)
            d.push_back((view.data().col(i) - anchors.anchors().col(j)).norm());
    const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    return *mid;
}

AnchorSet select_anchors(const ViewMatrix& view, int m, const KMeansConfig& config) {
    if (m < 1) throw ValueError("anchor count must be >= 1");
    if (view.samples() < m)
        throw ValueError("cannot select " + std::to_string(m) + " anchors from " +
                         std::to_string(view.samples()) + " samples");
    KMeansConfig cfg = config;
    cfg.k = m;
    const KMeansModel model = kmeans_fit(view.data().transpose(), cfg);
    return AnchorSet(model.centroids.transpose());
}

void write_anchor_graph(const std::filesystem::path& path, const AnchorGraph& graph,
                        MatrixMarketLayout layout) {
    io::write_file_atomic(path, layout == MatrixMarketLayout::array
                                    ? io::format_matrix_market_array(graph.Z)
                                    : io::format_matrix_market_coordinate(graph.Z));
}

AnchorGraph read_anchor_graph(const std::filesystem::path& path) {
    return AnchorGraph::from_coefficients(io::read_matrix_market(path));
}

} // namespace lmvsc
