#include "lmvsc/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "lmvsc/errors.hpp"
#include "lmvsc/io.hpp"

namespace lmvsc {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Re-throws library errors with the same dynamic type and a stage prefix.
template <class Fn>
decltype(auto) in_stage(const std::string& stage, Fn&& fn) {
    const std::string p = "[" + stage + "] ";
    try {
        return fn();
    } catch (const Error& e) {
        rethrow_with_prefix(e, p);
    }
}

const char* kStageAnchors = "anchor_kmeans";
const char* kStageGraph = "graph_learning";
const char* kStageEmbed = "embedding";
const char* kStageFinal = "final_kmeans";

} // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream));
}


void LmvscConfig::validate() const {
    if (k < 2) throw ValueError("k must be >= 2");
    if (m < k)
        throw ValueError("m = " + std::to_string(m) + " < k = " + std::to_string(k) +
                         ": the anchor count must not be less than the number of subspaces "
                         "(clusters), otherwise some cluster has no anchor to represent it");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ValueError("alpha must be > 0");
    QpSettings q = qp;
    q.alpha = alpha;
    q.validate();
}

ClusteringResult lmvsc_fit(const MultiViewDataset& data, const LmvscConfig& config) {
    in_stage("config", [&] { config.validate(); });
    const auto start = Clock::now();
    const Eigen::Index n = data.samples();
    if (n < config.m)
        throw ValueError("[" + std::string(kStageAnchors) + "] n = " + std::to_string(n) +
                         " samples < m = " + std::to_string(config.m) + " anchors");

    ClusteringResult result;
    result.config = config;
    QpSettings qp = config.qp;
    qp.alpha = config.alpha;

    std::vector<NormalizedGraph> normalized;
    normalized.reserve(data.num_views());
    for (std::size_t i = 0; i < data.num_views(); ++i) {
        const ViewMatrix view = standardize(data.view(i), config.standardize_mode);

        auto t0 = Clock::now();
        const AnchorSet anchors = in_stage(kStageAnchors, [&] {
            KMeansConfig km = config.kmeans_anchor;
            km.seed = derive_seed(config.seed, 1 + i);
            km.threads = config.threads;
            return select_anchors(view, config.m, km);
        });
        result.timings.anchor_kmeans += seconds_since(t0);
        if (const auto dups = anchors.duplicate_columns(); !dups.empty())
            result.warnings.push_back("view " + std::to_string(i) + ": " +
                                      std::to_string(dups.size()) + " duplicate anchors");

        t0 = Clock::now();
        AnchorGraph graph = in_stage(kStageGraph + std::string(" view ") + std::to_string(i),
                                     [&] { return learn_anchor_graph(view, anchors, qp, config.threads); });
        result.timings.graph_learning += seconds_since(t0);

        t0 = Clock::now();
        NormalizedGraph ng = in_stage(kStageEmbed, [&] { return normalize_graph(graph); });
        if (!ng.dropped_anchors.empty())
            result.warnings.push_back("view " + std::to_string(i) + ": dropped " +
                                      std::to_string(ng.dropped_anchors.size()) +
                                      " zero-degree anchors");
        normalized.push_back(std::move(ng));
        result.timings.embedding += seconds_since(t0);
        if (config.keep_graphs) result.per_view_graphs.push_back(std::move(graph));
    }

    auto t0 = Clock::now();
    const Embedding embedding = in_stage(kStageEmbed, [&] {
        const ConcatGraph zbar = concat_views(normalized);
        return embed(zbar, config.k, config.threads);
    });
    result.timings.embedding += seconds_since(t0);
    result.singular_values = embedding.singular_values;
    result.eigengap = embedding.eigengap;

    t0 = Clock::now();
    const KMeansModel final_model = in_stage(kStageFinal, [&] {
        KMeansConfig km = config.kmeans_final;
        km.k = config.k;
        km.seed = derive_seed(config.seed, 0);
        km.threads = config.threads;
        return kmeans_fit(config.normalize_q ? normalize_rows(embedding.Q) : embedding.Q, km);
    });
    result.timings.final_kmeans = seconds_since(t0);
    result.labels = final_model.labels;
    result.final_inertia = final_model.inertia;

    if (data.labels()) result.metrics = evaluate(result.labels, *data.labels());
    result.timings.total = seconds_since(start);
    return result;
}

ClusteringResult single_view_fit(const ViewMatrix& view, const LmvscConfig& config,
                                 std::optional<LabelVector> labels) {
    return lmvsc_fit(MultiViewDataset({view}, std::move(labels)), config);
}

GridSelection parse_grid_selection(std::string_view name) {
    if (name == "best_acc") return GridSelection::best_acc;
    if (name == "best_inertia") return GridSelection::best_inertia;
    throw ValueError("unknown grid selection '" + std::string(name) + "'");
}

std::string_view to_string(GridSelection selection) {
    return selection == GridSelection::best_acc ? "best_acc" : "best_inertia";
}

GridSpec GridSpec::defaults(int k) {
    GridSpec g;
    g.m_values = {k, 50, 100};
    g.alpha_values = {0.001, 0.01, 0.1, 1, 10};
    return g;
}

GridResult grid_search(const MultiViewDataset& data, const GridSpec& grid,
                       const LmvscConfig& base) {
    if (grid.m_values.empty() || grid.alpha_values.empty())
        throw ValueError("grid needs at least one m and one alpha value");
    if (grid.selection == GridSelection::best_acc && !data.labels())
        throw ValueError("best_acc selection requires labels");

    GridResult out;
    std::optional<ClusteringResult> best;
    for (int m : grid.m_values) {
        for (double alpha : grid.alpha_values) {
            GridCell cell;
            cell.m = m;
            cell.alpha = alpha;
            LmvscConfig cfg = base;
            cfg.m = m;
            cfg.alpha = alpha;
            try {
                ClusteringResult r = lmvsc_fit(data, cfg);
                cell.metrics = r.metrics;
                cell.final_inertia = r.final_inertia;
                cell.timings = r.timings;
                bool better = !best;
                if (best) {
                    better = grid.selection == GridSelection::best_acc
                                 ? r.metrics->acc > best->metrics->acc
                                 : r.final_inertia < best->final_inertia;
                }
                if (better) {
                    best = std::move(r);
                    out.best_index = out.table.size();
                }
            } catch (const ValueError& e) {
                cell.skipped = true;
                cell.reason = e.what();
            } catch (const ConvergenceError& e) {
                cell.skipped = true;
                cell.reason = e.what();
            } catch (const RankDeficient& e) {
                cell.skipped = true;
                cell.reason = e.what();
            } catch (const DegenerateGraph& e) {
                cell.skipped = true;
                cell.reason = e.what();
            }
            out.table.push_back(std::move(cell));
        }
    }
    if (!best) throw ValueError("every grid cell was skipped");
    out.best = std::move(*best);
    return out;
}

nlohmann::json to_json(const LmvscConfig& c) {
    return {
        {"k", c.k},
        {"m", c.m},
        {"alpha", c.alpha},
        {"seed", c.seed},
        {"standardize", std::string(to_string(c.standardize_mode))},
        {"normalize_q", c.normalize_q},
        {"kmeans_anchor",
         {{"max_iters", c.kmeans_anchor.max_iters},
          {"tol", c.kmeans_anchor.tol},
          {"n_restarts", c.kmeans_anchor.n_restarts}}},
        {"kmeans_final",
         {{"max_iters", c.kmeans_final.max_iters},
          {"tol", c.kmeans_final.tol},
          {"n_restarts", c.kmeans_final.n_restarts}}},
        {"qp", {{"max_iters", c.qp.max_iters}, {"kkt_tol", c.qp.kkt_tol}}},
    };
}

nlohmann::json to_json(const ClusteringResult& r) {
    nlohmann::json j;
    j["config"] = to_json(r.config);
    if (r.metrics) {
        j["metrics"] = {{"acc", r.metrics->acc}, {"nmi", r.metrics->nmi}, {"purity", r.metrics->purity}};
    } else {
        j["metrics"] = nullptr;
    }
    j["timings"] = {{"anchor_kmeans", r.timings.anchor_kmeans},
                    {"graph_learning", r.timings.graph_learning},
                    {"embedding", r.timings.embedding},
                    {"final_kmeans", r.timings.final_kmeans},
                    {"total", r.timings.total}};
    j["n"] = r.labels.size();
    j["labels"] = r.labels.labels();
    std::vector<double> sv(r.singular_values.data(), r.singular_values.data() + r.singular_values.size());
    j["singular_values"] = sv;
    j["eigengap"] = r.eigengap;
    j["final_inertia"] = r.final_inertia;
    j["warnings"] = r.warnings;
    return j;
}

std::string grid_table_csv(const GridResult& grid) {
    std::string out = "m,alpha,status,acc,nmi,purity,final_inertia,total_seconds,reason\n";
    for (const auto& c : grid.table) {
        out += std::to_string(c.m) + "," + io::format_double(c.alpha) + ",";
        out += c.skipped ? "skipped," : "ok,";
        if (c.metrics) {
            out += io::format_double(c.metrics->acc) + "," + io::format_double(c.metrics->nmi) + "," +
                   io::format_double(c.metrics->purity) + ",";
        } else {
            out += ",,,";
        }
        if (c.skipped) {
            out += ",,";
        } else {
            out += io::format_double(c.final_inertia) + "," + io::format_double(c.timings.total) + ",";
        }
        std::string reason = c.reason;
        std::replace(reason.begin(), reason.end(), '"', '\'');
        out += reason.empty() ? "" : "\"" + reason + "\"";
        out += "\n";
    }
    return out;
}

std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) return std::nullopt;
    const double count = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= count;
    my /= count;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y[i]) - my);
    }
    if (sxx == 0.0) return std::nullopt;
    return sxy / sxx;
}

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

} // namespace

BenchReport run_scaling_bench(const BenchSpec& spec) {
    if (spec.ladder.empty()) throw ValueError("bench ladder is empty");
    if (spec.reps < 1) throw ValueError("bench needs at least one repetition");
    BenchReport report;
    for (std::size_t step = 0; step < spec.ladder.size(); ++step) {
        const Eigen::Index n = spec.ladder[step];
        SynthSpec synth;
        synth.n = n;
        synth.k = spec.k;
        synth.v = spec.v;
        synth.dims = {spec.d};
        synth.subspace_dim = spec.subspace_dim;
        synth.noise_sigma = spec.noise_sigma;
        synth.seed = derive_seed(spec.seed, step);
        const auto [data, truth] = synth_multiview(synth);

        BenchRow row;
        row.n = n;
        auto t0 = Clock::now();
        std::vector<AnchorSet> anchors;
        for (std::size_t i = 0; i < data.num_views(); ++i) {
            KMeansConfig km;
            km.max_iters = spec.anchor_kmeans_iters;
            km.n_restarts = spec.anchor_kmeans_restarts;
            km.seed = derive_seed(spec.seed, 1 + i);
            km.threads = spec.threads;
            anchors.push_back(select_anchors(data.view(i), spec.m, km));
        }
        row.anchor_kmeans = seconds_since(t0);

        QpSettings qp;
        qp.alpha = spec.alpha;
        std::vector<double> learn, emb, both;
        Embedding embedding;
        for (int rep = 0; rep < spec.reps; ++rep) {
            t0 = Clock::now();
            std::vector<AnchorGraph> graphs;
            for (std::size_t i = 0; i < data.num_views(); ++i)
                graphs.push_back(learn_anchor_graph(data.view(i), anchors[i], qp, spec.threads));
            const double t_learn = seconds_since(t0);
            t0 = Clock::now();
            std::vector<NormalizedGraph> normalized;
            for (const auto& g : graphs) normalized.push_back(normalize_graph(g));
            embedding = embed(concat_views(normalized), spec.k, spec.threads);
            const double t_embed = seconds_since(t0);
            learn.push_back(t_learn);
            emb.push_back(t_embed);
            both.push_back(t_learn + t_embed);
        }
        row.graph_learning = median(learn);
        row.embedding = median(emb);
        row.learn_plus_embed = median(both);

        t0 = Clock::now();
        KMeansConfig km;
        km.k = spec.k;
        km.n_restarts = 1;
        km.seed = derive_seed(spec.seed, 0);
        km.threads = spec.threads;
        kmeans_fit(embedding.Q, km);
        row.final_kmeans = seconds_since(t0);
        report.rows.push_back(row);
    }
    std::vector<double> xs, ys;
    for (const auto& r : report.rows) {
        xs.push_back(static_cast<double>(r.n));
        ys.push_back(r.learn_plus_embed);
    }
    report.slope = loglog_slope(xs, ys);
    return report;
}

std::string bench_csv(const BenchReport& report) {
    std::string out = "n,anchor_kmeans,graph_learning,embedding,learn_plus_embed,final_kmeans\n";
    for (const auto& r : report.rows) {
        out += std::to_string(r.n) + "," + io::format_double(r.anchor_kmeans) + "," +
               io::format_double(r.graph_learning) + "," + io::format_double(r.embedding) + "," +
               io::format_double(r.learn_plus_embed) + "," + io::format_double(r.final_kmeans) + "\n";
    }
    return out;
}

} // namespace lmvsc
