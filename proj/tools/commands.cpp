#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lmvsc/dataset.hpp"
#include "lmvsc/errors.hpp"
#include "lmvsc/io.hpp"
#include "lmvsc/metrics.hpp"
#include "lmvsc/parallel.hpp"
#include "lmvsc/pipeline.hpp"

namespace fs = std::filesystem;

namespace lmvsc::cli {
namespace {

struct DataArgs {
    std::vector<std::string> views;
    std::string manifest;
    std::string labels;
    bool header = false;
    bool rescale_255 = false;
};

struct FitArgs {
    DataArgs data;
    int k = 0;
    int m = 50;
    double alpha = 0.01;
    std::uint64_t seed = 0;
    int threads = default_threads();
    int restarts = 10;
    std::string standardize = "none";
    std::string out;
    bool normalize_q = false;
    bool require_metrics = false;
    std::vector<int> grid_m;
    std::vector<double> grid_alpha;
    std::string selection = "best_acc";
};

struct SynthArgs {
    Eigen::Index n = 0;
    int k = 0;
    int v = 1;
    std::vector<Eigen::Index> dims;
    Eigen::Index subspace_dim = 1;
    double noise_sigma = 0.0;
    std::string base;
    std::string labels;
    std::vector<std::string> noise;
    bool header = false;
    bool rescale_255 = false;
    std::uint64_t seed = 0;
    std::string out;
};

struct EvalArgs {
    std::string pred;
    std::string truth;
    std::string out;
};

struct BenchArgs {
    BenchSpec spec;
    std::string out;
};

void add_data_options(CLI::App* cmd, DataArgs& a) {
    auto* views = cmd->add_option("--views", a.views, "view files (CSV or .mtx), one sample per row");
    auto* manifest = cmd->add_option("--manifest", a.manifest, "dataset manifest with view/labels lines");
    views->excludes(manifest);
    cmd->add_option("--labels", a.labels, "ground-truth label file");
    cmd->add_flag("--header", a.header, "CSV files start with a header row");
    cmd->add_flag("--rescale-255", a.rescale_255, "divide features by 255");
}

void add_fit_options(CLI::App* cmd, FitArgs& a) {
    add_data_options(cmd, a.data);
    cmd->add_option("--k", a.k, "number of clusters")->required();
    cmd->add_option("--m", a.m, "anchors per view")->capture_default_str();
    cmd->add_option("--alpha", a.alpha, "ridge weight of the anchor QP")->capture_default_str();
    cmd->add_option("--seed", a.seed, "base random seed")->required();
    cmd->add_option("--threads", a.threads, "parallelism budget")->capture_default_str();
    cmd->add_option("--restarts", a.restarts, "final k-means restarts")->capture_default_str();
    cmd->add_option("--standardize", a.standardize, "per-view feature scaling")
        ->check(CLI::IsMember({"none", "zscore", "unit_range"}))
        ->capture_default_str();
    cmd->add_option("--out", a.out, "output directory")->required();
    cmd->add_flag("--normalize-q", a.normalize_q, "row-normalize the embedding before k-means");
}

MultiViewDataset load_data(const DataArgs& a) {
    LoadOptions opts;
    opts.has_header = a.header;
    opts.rescale_255 = a.rescale_255;
    try {
        if (!a.manifest.empty()) {
            MultiViewDataset data = load_multiview(a.manifest, opts);
            if (a.labels.empty()) return data;
            return MultiViewDataset(data.views(), load_labels(a.labels));
        }
        if (a.views.empty()) throw ValueError("either --views or --manifest is required");
        std::vector<ViewMatrix> views;
        for (std::size_t i = 0; i < a.views.size(); ++i) {
            ViewMatrix v = load_view(a.views[i], opts);
            views.emplace_back(v.data(), static_cast<int>(i));
        }
        std::optional<LabelVector> labels;
        if (!a.labels.empty()) labels = load_labels(a.labels);
        return MultiViewDataset(std::move(views), std::move(labels));
    } catch (const Error& e) {
        rethrow_with_prefix(e, "[load] ");
    }
}

LmvscConfig make_config(const FitArgs& a) {
    LmvscConfig cfg;
    cfg.k = a.k;
    cfg.m = a.m;
    cfg.alpha = a.alpha;
    cfg.seed = a.seed;
    cfg.threads = a.threads;
    cfg.kmeans_final.n_restarts = a.restarts;
    cfg.standardize_mode = parse_standardize_mode(a.standardize);
    cfg.normalize_q = a.normalize_q;
    return cfg;
}

std::string fixed(double x, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

void print_result_table(std::ostream& out, const ClusteringResult& r) {
    out << "Acc      NMI      Purity   Time(s)\n";
    if (r.metrics) {
        out << fixed(r.metrics->acc, 4) << "   " << fixed(r.metrics->nmi, 4) << "   "
            << fixed(r.metrics->purity, 4) << "   ";
    } else {
        out << "-        -        -        ";
    }
    out << fixed(r.timings.total, 3) << '\n';
}

void write_result(const fs::path& dir, const ClusteringResult& r) {
    try {
        fs::create_directories(dir);
        io::write_file_atomic(dir / "result.json", to_json(r).dump(2) + "\n");
        write_labels(dir / "labels.txt", r.labels);
    } catch (const fs::filesystem_error& e) {
        throw IoError(std::string("[write] ") + e.what());
    } catch (const Error& e) {
        rethrow_with_prefix(e, "[write] ");
    }
}

int cmd_fit(const FitArgs& a, std::ostream& out) {
    const MultiViewDataset data = load_data(a.data);
    if (a.require_metrics && !data.labels()) throw ValueError("[load] labels required");
    const ClusteringResult r = lmvsc_fit(data, make_config(a));
    write_result(a.out, r);
    for (const auto& w : r.warnings) out << "warning: " << w << '\n';
    print_result_table(out, r);
    return 0;
}

int cmd_grid(const FitArgs& a, std::ostream& out, std::ostream& err) {
    const MultiViewDataset data = load_data(a.data);
    GridSpec grid = GridSpec::defaults(a.k);
    if (!a.grid_m.empty()) grid.m_values = a.grid_m;
    if (!a.grid_alpha.empty()) grid.alpha_values = a.grid_alpha;
    grid.selection = parse_grid_selection(a.selection);
    const GridResult g = grid_search(data, grid, make_config(a));
    try {
        fs::create_directories(a.out);
        io::write_file_atomic(fs::path(a.out) / "grid.csv", grid_table_csv(g));
    } catch (const fs::filesystem_error& e) {
        throw IoError(std::string("[write] ") + e.what());
    }
    write_result(a.out, g.best);

    out << "m      alpha      Acc      NMI      Purity   Time(s)\n";
    for (std::size_t i = 0; i < g.table.size(); ++i) {
        const GridCell& c = g.table[i];
        if (c.skipped) {
            err << "skipped m=" << c.m << " alpha=" << io::format_double(c.alpha) << ": "
                << c.reason << '\n';
            continue;
        }
        char head[64];
        std::snprintf(head, sizeof head, "%-6d %-10g ", c.m, c.alpha);
        out << head;
        if (c.metrics) {
            out << fixed(c.metrics->acc, 4) << "   " << fixed(c.metrics->nmi, 4) << "   "
                << fixed(c.metrics->purity, 4) << "   ";
        } else {
            out << "-        -        -        ";
        }
        out << fixed(c.timings.total, 3) << (i == g.best_index ? "  *" : "") << '\n';
    }
    return 0;
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
    MultiViewDataset data;
    if (!a.base.empty()) {
        if (a.noise.empty()) throw ValueError("--base needs at least one --noise kind:level");
        LoadOptions opts;
        opts.has_header = a.header;
        opts.rescale_255 = a.rescale_255;
        std::vector<NoiseSpec> specs;
        for (std::size_t i = 0; i < a.noise.size(); ++i) {
            NoiseSpec s = parse_noise_spec(a.noise[i]);
            s.seed = derive_seed(a.seed, i + 1);
            specs.push_back(s);
        }
        std::optional<LabelVector> labels;
        if (!a.labels.empty()) labels = load_labels(a.labels);
        data = noisy_views(load_view(a.base, opts), specs, std::move(labels));
    } else {
        SynthSpec spec;
        spec.n = a.n;
        spec.k = a.k;
        spec.v = a.v;
        spec.dims = a.dims.empty() ? std::vector<Eigen::Index>{10} : a.dims;
        spec.subspace_dim = a.subspace_dim;
        spec.noise_sigma = a.noise_sigma;
        spec.seed = a.seed;
        auto [views, labels] = synth_multiview(spec);
        data = std::move(views);
    }
    fs::create_directories(a.out);
    const fs::path manifest = write_multiview(a.out, data);
    out << "wrote " << data.num_views() << " views of " << data.samples() << " samples to "
        << manifest.string() << '\n';
    return 0;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
    const LabelVector pred = load_labels(a.pred);
    const LabelVector truth = load_labels(a.truth);
    const MetricValues m = evaluate(pred, truth);
    out << "Acc      NMI      Purity\n"
        << fixed(m.acc, 4) << "   " << fixed(m.nmi, 4) << "   " << fixed(m.purity, 4) << '\n';
    if (!a.out.empty()) {
        nlohmann::json j{{"acc", m.acc}, {"nmi", m.nmi}, {"purity", m.purity}, {"n", pred.size()}};
        io::write_file_atomic(a.out, j.dump(2) + "\n");
    }
    return 0;
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
    const BenchReport report = run_scaling_bench(a.spec);
    const std::string csv = bench_csv(report);
    if (!a.out.empty()) io::write_file_atomic(a.out, csv);
    out << csv;
    if (report.slope)
        out << "slope(graph_learning+embedding vs n): " << fixed(*report.slope, 3) << '\n';
    else
        out << "slope(graph_learning+embedding vs n): not applicable\n";
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-view subspace clustering with learned anchor graphs"};
    app.require_subcommand(1);

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "cluster a multi-view dataset");
    add_fit_options(fit, fit_args);
    fit->add_flag("--require-metrics", fit_args.require_metrics, "fail when no labels are given");

    FitArgs grid_args;
    auto* grid = app.add_subcommand("grid", "grid search over anchors and alpha");
    add_fit_options(grid, grid_args);
    grid->add_option("--grid-m", grid_args.grid_m, "anchor counts (default: k 50 100)")
        ->delimiter(',');
    grid->add_option("--grid-alpha", grid_args.grid_alpha,
                     "alpha values (default: 0.001 0.01 0.1 1 10)")
        ->delimiter(',');
    grid->add_option("--selection", grid_args.selection, "best_acc or best_inertia")
        ->check(CLI::IsMember({"best_acc", "best_inertia"}))
        ->capture_default_str();

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "generate a synthetic or noisy multi-view dataset");
    synth->add_option("--n", synth_args.n, "samples");
    synth->add_option("--k", synth_args.k, "subspaces");
    synth->add_option("--v", synth_args.v, "views")->capture_default_str();
    synth->add_option("--dims", synth_args.dims, "ambient dimension per view")->delimiter(',');
    synth->add_option("--subspace-dim", synth_args.subspace_dim)->capture_default_str();
    synth->add_option("--noise-sigma", synth_args.noise_sigma)->capture_default_str();
    auto* base = synth->add_option("--base", synth_args.base, "base view; one noisy view per --noise");
    synth->add_option("--noise", synth_args.noise, "kind:level, kind in gaussian|salt_pepper|speckle")
        ->needs(base);
    synth->add_option("--labels", synth_args.labels, "labels of the base view")->needs(base);
    synth->add_flag("--header", synth_args.header);
    synth->add_flag("--rescale-255", synth_args.rescale_255);
    synth->add_option("--seed", synth_args.seed)->required();
    synth->add_option("--out", synth_args.out, "output directory")->required();

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "metrics from a predicted/true label file pair");
    eval->add_option("--pred", eval_args.pred)->required();
    eval->add_option("--truth", eval_args.truth)->required();
    eval->add_option("--out", eval_args.out, "optional JSON output");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "timing ladder on synthetic data");
    BenchSpec& bs = bench_args.spec;
    bs.threads = default_threads();
    bench->add_option("--ladder", bs.ladder, "sample counts")->delimiter(',');
    bench->add_option("--m", bs.m)->capture_default_str();
    bench->add_option("--v", bs.v)->capture_default_str();
    bench->add_option("--k", bs.k)->capture_default_str();
    bench->add_option("--d", bs.d)->capture_default_str();
    bench->add_option("--subspace-dim", bs.subspace_dim)->capture_default_str();
    bench->add_option("--alpha", bs.alpha)->capture_default_str();
    bench->add_option("--reps", bs.reps)->capture_default_str();
    bench->add_option("--seed", bs.seed)->required();
    bench->add_option("--threads", bs.threads)->capture_default_str();
    bench->add_option("--out", bench_args.out, "CSV output");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }

    try {
        if (*fit) return cmd_fit(fit_args, out);
        if (*grid) return cmd_grid(grid_args, out, err);
        if (*synth) return cmd_synth(synth_args, out);
        if (*eval) return cmd_eval(eval_args, out);
        if (*bench) return cmd_bench(bench_args, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

} // namespace lmvsc::cli
