#include "lmvsc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "lmvsc/errors.hpp"
#include "lmvsc/io.hpp"

namespace lmvsc {
namespace fs = std::filesystem;

ViewMatrix::ViewMatrix(Eigen::MatrixXd data, int view_id)
    : data_(std::move(data)), view_id_(view_id) {
    if (data_.rows() < 1 || data_.cols() < 1)
        throw ValueError("view matrix must have at least one feature and one sample");
    if (!data_.allFinite()) throw ValueError("view matrix contains NaN or Inf");
}

LabelVector::LabelVector(std::vector<int> labels, int num_classes)
    : labels_(std::move(labels)), num_classes_(num_classes) {
    if (num_classes_ < 0) throw ValueError("negative class count");
    for (int id : labels_)
        if (id < 0 || id >= num_classes_)
            throw ValueError("label id " + std::to_string(id) + " outside [0, " +
                             std::to_string(num_classes_) + ")");
}

LabelVector::LabelVector(std::vector<int> labels) {
    int hi = -1;
    for (int id : labels) {
        if (id < 0) throw ValueError("negative label id");
        hi = std::max(hi, id);
    }
    labels_ = std::move(labels);
    num_classes_ = hi + 1;
}

LabelVector LabelVector::compact(const std::vector<int>& raw) {
    std::map<int, int> remap;
    for (int id : raw) remap.emplace(id, 0);
    int next = 0;
    for (auto& [id, dense] : remap) dense = next++;
    std::vector<int> out;
    out.reserve(raw.size());
    for (int id : raw) out.push_back(remap.at(id));
    return LabelVector(std::move(out), next);
}

int LabelVector::distinct() const {
    std::vector<char> seen(static_cast<std::size_t>(num_classes_), 0);
    int count = 0;
    for (int id : labels_) {
        if (!seen[static_cast<std::size_t>(id)]) {
            seen[static_cast<std::size_t>(id)] = 1;
            ++count;
        }
    }
    return count;
}

MultiViewDataset::MultiViewDataset(std::vector<ViewMatrix> views,
                                   std::optional<LabelVector> labels)
    : views_(std::move(views)), labels_(std::move(labels)) {
    if (views_.empty()) throw ValueError("dataset needs at least one view");
    n_ = views_.front().samples();
    for (std::size_t i = 0; i < views_.size(); ++i) {
        if (views_[i].samples() != n_)
            throw DimensionMismatch("view " + std::to_string(i) + " has " +
                                    std::to_string(views_[i].samples()) +
                                    " samples, view 0 has " + std::to_string(n_));
    }
    if (labels_ && static_cast<Eigen::Index>(labels_->size()) != n_)
        throw DimensionMismatch("labels have length " + std::to_string(labels_->size()) +
                                ", views have " + std::to_string(n_) + " samples");
}

NoiseKind parse_noise_kind(std::string_view name) {
    if (name == "gaussian") return NoiseKind::gaussian;
    if (name == "salt_pepper" || name == "salt&pepper") return NoiseKind::salt_pepper;
    if (name == "speckle") return NoiseKind::speckle;
    throw ValueError("unknown noise kind '" + std::string(name) + "'");
}

std::string_view to_string(NoiseKind kind) {
    switch (kind) {
    case NoiseKind::gaussian: return "gaussian";
    case NoiseKind::salt_pepper: return "salt_pepper";
    case NoiseKind::speckle: return "speckle";
    }
    return "unknown";
}

void NoiseSpec::validate() const {
    if (!std::isfinite(level)) throw ValueError("noise level must be finite");
    if (kind == NoiseKind::salt_pepper) {
        if (!(level > 0.0 && level < 1.0))
            throw ValueError("salt_pepper density must lie in (0,1)");
    } else if (!(level > 0.0)) {
        throw ValueError(std::string(to_string(kind)) + " variance must be > 0");
    }
}

NoiseSpec parse_noise_spec(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos)
        throw ValueError("noise spec must look like kind:level, got '" + std::string(text) + "'");
    NoiseSpec spec;
    spec.kind = parse_noise_kind(text.substr(0, colon));
    const std::string level(text.substr(colon + 1));
    std::size_t used = 0;
    try {
        spec.level = std::stod(level, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != level.size())
        throw ValueError("bad noise level '" + level + "'");
    spec.validate();
    return spec;
}

StandardizeMode parse_standardize_mode(std::string_view name) {
    if (name == "none") return StandardizeMode::none;
    if (name == "zscore") return StandardizeMode::zscore;
    if (name == "unit_range") return StandardizeMode::unit_range;
    throw ValueError("unknown standardize mode '" + std::string(name) + "'");
}

std::string_view to_string(StandardizeMode mode) {
    switch (mode) {
    case StandardizeMode::none: return "none";
    case StandardizeMode::zscore: return "zscore";
    case StandardizeMode::unit_range: return "unit_range";
    }
    return "unknown";
}

namespace {

ViewMatrix from_rows(Eigen::MatrixXd rows_are_samples, const LoadOptions& options,
                     const fs::path& path) {
    if (options.rescale_255) rows_are_samples /= 255.0;
    if (!rows_are_samples.allFinite())
        throw ValueError(path.string() + ": contains NaN or Inf");
    return ViewMatrix(rows_are_samples.transpose());
}

} // namespace

ViewMatrix load_view_csv(const fs::path& path, bool has_header) {
    return load_view_csv(path, LoadOptions{has_header, false});
}

ViewMatrix load_view_csv(const fs::path& path, const LoadOptions& options) {
    return from_rows(io::read_csv(path, options.has_header), options, path);
}

ViewMatrix load_view_mtx(const fs::path& path, const LoadOptions& options) {
    return from_rows(io::read_matrix_market(path), options, path);
}

ViewMatrix load_view(const fs::path& path, const LoadOptions& options) {
    if (path.extension() == ".mtx") return load_view_mtx(path, options);
    return load_view_csv(path, options);
}

void write_view_csv(const fs::path& path, const ViewMatrix& view) {
    io::write_file_atomic(path, io::format_csv(view.data().transpose()));
}

void write_view_mtx(const fs::path& path, const ViewMatrix& view) {
    io::write_file_atomic(path, io::format_matrix_market_array(view.data().transpose()));
}

LabelVector load_labels(const fs::path& path) {
    const Eigen::MatrixXd m = io::read_csv(path, false);
    if (m.cols() != 1) throw ParseError(path.string() + ": expected one label per line");
    std::vector<int> raw;
    raw.reserve(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double x = m(i, 0);
        if (x != std::floor(x) || std::abs(x) > 1e9)
            throw ParseError(path.string() + ": label on line " + std::to_string(i + 1) +
                             " is not an integer");
        raw.push_back(static_cast<int>(x));
    }
    return LabelVector::compact(raw);
}

void write_labels(const fs::path& path, const LabelVector& labels) {
    std::string out;
    out.reserve(labels.size() * 3);
    for (int id : labels.labels()) {
        out += std::to_string(id);
        out += '\n';
    }
    io::write_file_atomic(path, out);
}

MultiViewDataset load_multiview(const fs::path& manifest, const LoadOptions& options) {
    const std::string text = io::read_file(manifest);
    const fs::path base = manifest.parent_path();
    auto resolve = [&](const std::string& p) {
        fs::path path(p);
        return path.is_absolute() ? path : base / path;
    };
    std::vector<ViewMatrix> views;
    std::optional<LabelVector> labels;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string{};
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        line = strip(line);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(manifest.string() + ":" + std::to_string(line_no) +
                             ": expected 'key = value'");
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        if (value.empty())
            throw ParseError(manifest.string() + ":" + std::to_string(line_no) + ": empty path");
        if (key == "view") {
            ViewMatrix loaded = load_view(resolve(value), options);
            views.emplace_back(loaded.data(), static_cast<int>(views.size()));
        } else if (key == "labels") {
            labels = load_labels(resolve(value));
        } else {
            throw ParseError(manifest.string() + ":" + std::to_string(line_no) +
                             ": unknown key '" + key + "'");
        }
    }
    if (views.empty()) throw ParseError(manifest.string() + ": no 'view' entries");
    return MultiViewDataset(std::move(views), std::move(labels));
}

fs::path write_multiview(const fs::path& dir, const MultiViewDataset& data) {
    fs::create_directories(dir);
    std::string manifest;
    for (std::size_t i = 0; i < data.num_views(); ++i) {
        const std::string name = "view_" + std::to_string(i) + ".csv";
        write_view_csv(dir / name, data.view(i));
        manifest += "view = " + name + "\n";
    }
    if (data.labels()) {
        write_labels(dir / "labels.txt", *data.labels());
        manifest += "labels = labels.txt\n";
    }
    const fs::path path = dir / "manifest.txt";
    io::write_file_atomic(path, manifest);
    return path;
}

ViewMatrix standardize(const ViewMatrix& view, StandardizeMode mode) {
    if (mode == StandardizeMode::none) return view;
    Eigen::MatrixXd out = view.data();
    const double n = static_cast<double>(out.cols());
    for (Eigen::Index f = 0; f < out.rows(); ++f) {
        auto row = out.row(f);
        if (mode == StandardizeMode::zscore) {
            const double mean = row.sum() / n;
            row.array() -= mean;
            const double sd = std::sqrt(row.squaredNorm() / n);
            if (sd > 0.0) {
                row /= sd;
            } else {
                row.setZero();
            }
        } else {
            const double lo = row.minCoeff();
            const double span = row.maxCoeff() - lo;
            if (span > 0.0) {
                row = (row.array() - lo) / span;
            } else {
                row.setZero();
            }
        }
    }
    return ViewMatrix(std::move(out), view.view_id());
}

std::pair<MultiViewDataset, LabelVector> synth_multiview(const SynthSpec& spec) {
    if (spec.k < 1) throw ValueError("synth: k must be >= 1");
    if (spec.n < spec.k) throw ValueError("synth: need n >= k");
    if (spec.v < 1) throw ValueError("synth: need at least one view");
    if (spec.subspace_dim < 1) throw ValueError("synth: subspace_dim must be >= 1");
    if (!(spec.noise_sigma >= 0.0)) throw ValueError("synth: noise_sigma must be >= 0");
    if (spec.dims.size() != 1 && spec.dims.size() != static_cast<std::size_t>(spec.v))
        throw ValueError("synth: dims must have one entry or one per view");
    for (auto d : spec.dims)
        if (d < spec.subspace_dim) throw ValueError("synth: every view dim must be >= subspace_dim");

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<int> ids(static_cast<std::size_t>(spec.n));
    for (std::size_t j = 0; j < ids.size(); ++j) ids[j] = static_cast<int>(j % static_cast<std::size_t>(spec.k));
    std::shuffle(ids.begin(), ids.end(), rng);
    LabelVector labels(ids, spec.k);

    std::vector<ViewMatrix> views;
    for (int v = 0; v < spec.v; ++v) {
        const Eigen::Index d = spec.dims.size() == 1 ? spec.dims[0] : spec.dims[static_cast<std::size_t>(v)];
        std::vector<Eigen::MatrixXd> bases;
        for (int c = 0; c < spec.k; ++c) {
            Eigen::MatrixXd g(d, spec.subspace_dim);
            for (Eigen::Index j = 0; j < g.cols(); ++j)
                for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = gauss(rng);
            Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
            bases.push_back(qr.householderQ() * Eigen::MatrixXd::Identity(d, spec.subspace_dim));
        }
        Eigen::MatrixXd x(d, spec.n);
        Eigen::VectorXd coeff(spec.subspace_dim);
        for (Eigen::Index j = 0; j < spec.n; ++j) {
            for (Eigen::Index t = 0; t < coeff.size(); ++t) coeff(t) = gauss(rng);
            x.col(j) = bases[static_cast<std::size_t>(ids[static_cast<std::size_t>(j)])] * coeff;
        }
        if (spec.noise_sigma > 0.0) {
            for (Eigen::Index j = 0; j < x.cols(); ++j)
                for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) += spec.noise_sigma * gauss(rng);
        }
        views.emplace_back(std::move(x), v);
    }
    MultiViewDataset data(std::move(views), labels);
    return {std::move(data), std::move(labels)};
}

ViewMatrix add_noise(const ViewMatrix& view, const NoiseSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    Eigen::MatrixXd out = view.data();
    switch (spec.kind) {
    case NoiseKind::gaussian: {
        std::normal_distribution<double> eps(0.0, std::sqrt(spec.level));
        for (Eigen::Index j = 0; j < out.cols(); ++j)
            for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, j) += eps(rng);
        break;
    }
    case NoiseKind::speckle: {
        std::normal_distribution<double> eps(0.0, std::sqrt(spec.level));
        for (Eigen::Index j = 0; j < out.cols(); ++j)
            for (Eigen::Index i = 0; i < out.rows(); ++i) {
                const double x = out(i, j);
                out(i, j) = std::clamp(x + x * eps(rng), 0.0, 1.0);
            }
        break;
    }
    case NoiseKind::salt_pepper: {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (Eigen::Index j = 0; j < out.cols(); ++j)
            for (Eigen::Index i = 0; i < out.rows(); ++i) {
                const double hit = u(rng);
                const double coin = u(rng);
                if (hit < spec.level) {
                    out(i, j) = coin < 0.5 ? 0.0 : 1.0;
                } else {
                    out(i, j) = std::clamp(out(i, j), 0.0, 1.0);
                }
            }
        break;
    }
    }
    return ViewMatrix(std::move(out), view.view_id());
}

MultiViewDataset noisy_views(const ViewMatrix& base, const std::vector<NoiseSpec>& specs,
                             std::optional<LabelVector> labels) {
    if (specs.empty()) throw ValueError("need at least one noise spec");
    std::vector<ViewMatrix> views;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        ViewMatrix noisy = add_noise(base, specs[i]);
        views.emplace_back(noisy.data(), static_cast<int>(i));
    }
    return MultiViewDataset(std::move(views), std::move(labels));
}

} // namespace lmvsc
