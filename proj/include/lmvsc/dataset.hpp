#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace lmvsc {

/// One view of a multi-view dataset: features x samples (samples are columns).
class ViewMatrix {
public:
    ViewMatrix() = default;
    /// Throws ValueError on an empty matrix or non-finite entries.
    explicit ViewMatrix(Eigen::MatrixXd data, int view_id = 0);

    const Eigen::MatrixXd& data() const noexcept { return data_; }
    Eigen::Index features() const noexcept { return data_.rows(); }
    Eigen::Index samples() const noexcept { return data_.cols(); }
    int view_id() const noexcept { return view_id_; }

private:
    Eigen::MatrixXd data_;
    int view_id_ = 0;
};

/// Integer class id per sample. Ids lie in [0, num_classes()).
///
/// Ground-truth vectors are "dense" (every id occurs); predictions coming from
/// `assign` on new points may leave some ids unused.
class LabelVector {
public:
    LabelVector() = default;
    /// Throws ValueError on negative ids or ids >= num_classes.
    LabelVector(std::vector<int> labels, int num_classes);
    /// num_classes = max id + 1.
    explicit LabelVector(std::vector<int> labels);

    /// Maps arbitrary integer ids onto 0..c-1 in increasing id order.
    static LabelVector compact(const std::vector<int>& raw);

    const std::vector<int>& labels() const noexcept { return labels_; }
    std::size_t size() const noexcept { return labels_.size(); }
    int operator[](std::size_t i) const { return labels_[i]; }
    int num_classes() const noexcept { return num_classes_; }
    /// Number of ids that actually occur.
    int distinct() const;
    bool is_dense() const { return distinct() == num_classes_; }

    bool operator==(const LabelVector&) const = default;

private:
    std::vector<int> labels_;
    int num_classes_ = 0;
};

class MultiViewDataset {
public:
    MultiViewDataset() = default;
    /// Throws ValueError when empty, DimensionMismatch when views or labels
    /// disagree on the sample count.
    explicit MultiViewDataset(std::vector<ViewMatrix> views,
                              std::optional<LabelVector> labels = std::nullopt);

    const std::vector<ViewMatrix>& views() const noexcept { return views_; }
    const ViewMatrix& view(std::size_t i) const { return views_.at(i); }
    std::size_t num_views() const noexcept { return views_.size(); }
    Eigen::Index samples() const noexcept { return n_; }
    const std::optional<LabelVector>& labels() const noexcept { return labels_; }

private:
    std::vector<ViewMatrix> views_;
    std::optional<LabelVector> labels_;
    Eigen::Index n_ = 0;
};

enum class NoiseKind { gaussian, salt_pepper, speckle };

NoiseKind parse_noise_kind(std::string_view name);
std::string_view to_string(NoiseKind kind);

struct NoiseSpec {
    NoiseKind kind = NoiseKind::gaussian;
    /// Variance for gaussian/speckle, corrupted fraction for salt_pepper.
    double level = 0.0;
    std::uint64_t seed = 0;

    /// Throws ValueError when the level is outside the kind's valid range.
    void validate() const;
};

/// Parses "kind:level", e.g. "salt_pepper:0.1". The seed is left at 0.
NoiseSpec parse_noise_spec(std::string_view text);

enum class StandardizeMode { none, zscore, unit_range };

StandardizeMode parse_standardize_mode(std::string_view name);
std::string_view to_string(StandardizeMode mode);

struct LoadOptions {
    bool has_header = false;
    /// Divide every value by 255 (integer pixel data onto [0,1]).
    bool rescale_255 = false;
};

// File layout: one sample per row in both CSV and Matrix Market files.
ViewMatrix load_view_csv(const std::filesystem::path& path, bool has_header = false);
ViewMatrix load_view_csv(const std::filesystem::path& path, const LoadOptions& options);
ViewMatrix load_view_mtx(const std::filesystem::path& path, const LoadOptions& options = {});
/// Dispatches on extension: ".mtx" is Matrix Market, anything else CSV.
ViewMatrix load_view(const std::filesystem::path& path, const LoadOptions& options = {});
void write_view_csv(const std::filesystem::path& path, const ViewMatrix& view);
void write_view_mtx(const std::filesystem::path& path, const ViewMatrix& view);

/// One integer per line; ids are compacted onto 0..c-1.
LabelVector load_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const LabelVector& labels);

/// Reads a key/value manifest: `view = <path>` (repeatable, in order) and an
/// optional `labels = <path>`. Relative paths resolve against the manifest's
/// directory. Blank lines and lines starting with '#' are ignored.
MultiViewDataset load_multiview(const std::filesystem::path& manifest,
                                const LoadOptions& options = {});

/// Writes view_<i>.csv, labels.txt (if present) and manifest.txt into `dir`.
/// Returns the manifest path.
std::filesystem::path write_multiview(const std::filesystem::path& dir,
                                      const MultiViewDataset& data);

ViewMatrix standardize(const ViewMatrix& view, StandardizeMode mode);

struct SynthSpec {
    Eigen::Index n = 0;
    int k = 1;
    int v = 1;
    /// Feature count per view; a single entry is broadcast to all views.
    std::vector<Eigen::Index> dims;
    Eigen::Index subspace_dim = 1;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
};

/// Union-of-subspaces generator. Every view draws k random orthonormal bases
/// of rank subspace_dim; sample j lies in the subspace of its class in every
/// view, plus isotropic Gaussian noise. Labels are balanced and shuffled.
std::pair<MultiViewDataset, LabelVector> synth_multiview(const SynthSpec& spec);

ViewMatrix add_noise(const ViewMatrix& view, const NoiseSpec& spec);

/// Builds one corrupted copy of `base` per noise spec, each becoming a view.
MultiViewDataset noisy_views(const ViewMatrix& base, const std::vector<NoiseSpec>& specs,
                             std::optional<LabelVector> labels = std::nullopt);

} // namespace lmvsc
