#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gol/frequency.hpp"
#include "gol/matrix.hpp"

namespace gol {

// ---------------------------------------------------------------------------
// COCO/LVIS-style annotations
// ---------------------------------------------------------------------------

struct ImageInfo {
    long id = 0;
    double width = 0.0;
    double height = 0.0;

    bool operator==(const ImageInfo&) const = default;
};

struct CategoryInfo {
    long id = 0;
    std::string name;

    bool operator==(const CategoryInfo&) const = default;
};

struct ObjectInfo {
    long image_id = 0;
    long category_id = 0;
    std::array<double, 4> bbox{};  // x, y, w, h in pixels
    double cx = 0.0;               // x + w / 2
    double cy = 0.0;               // y + h / 2
    // Optional per-object feature vector consumed by predicted_joint_grid.
    std::vector<double> features;

    bool operator==(const ObjectInfo&) const = default;
};

struct AnnotationTable {
    std::vector<ImageInfo> images;
    std::vector<ObjectInfo> objects;
    std::vector<CategoryInfo> categories;

    bool operator==(const AnnotationTable&) const = default;

    const ImageInfo& image(long id) const;
    // Position of a category id in `categories`.
    std::size_t category_index(long id) const;
};

// Throws ParseError naming the offending JSON path.
AnnotationTable parse_annotations(std::string_view json_text);
AnnotationTable load_annotations(const std::string& path);
std::string serialize_annotations(const AnnotationTable& table);

// Image and instance counts per category, in `categories` order.
ClassFrequencyTable frequency_table(const AnnotationTable& table, GroupThresholds thresholds = {});

// ---------------------------------------------------------------------------
// Spatial distributions over a normalized grid
// ---------------------------------------------------------------------------

enum class GridKind { occurrence, membership, joint };

std::string to_string(GridKind kind);
GridKind grid_kind_from_string(std::string_view name);

struct SpatialGrid {
    std::size_t grid_h = 0;
    std::size_t grid_w = 0;
    GridKind kind = GridKind::occurrence;
    Matrix cells;
    // Membership grids only: 1 marks cells holding no object, where the
    // conditional is undefined and the cell value is 0.
    std::vector<std::uint8_t> empty_mask;

    double sum() const;
};

// Cell index of a normalized coordinate; 1.0 maps to the last cell.
std::size_t cell_index(double normalized, std::size_t cells);

struct CellCounts {
    std::size_t grid_h = 0;
    std::size_t grid_w = 0;
    long total_objects = 0;
    std::vector<long> all;        // grid_h * grid_w, row-major
    std::vector<long> per_class;  // class_count * grid_h * grid_w, class-major
    std::size_t class_count = 0;

    long at(std::size_t cls, std::size_t i, std::size_t j) const {
        return per_class[(cls * grid_h + i) * grid_w + j];
    }
};

// OpenMP kernels; results do not depend on the thread count.
CellCounts cell_counts(const AnnotationTable& table, std::size_t grid_h, std::size_t grid_w);
SpatialGrid occurrence_grid(const AnnotationTable& table, std::size_t grid_h, std::size_t grid_w);
SpatialGrid membership_grid(const AnnotationTable& table, long category_id, std::size_t grid_h,
                            std::size_t grid_w);
SpatialGrid joint_grid(const AnnotationTable& table, long category_id, std::size_t grid_h,
                       std::size_t grid_w);
// One joint grid per category, in `categories` order.
std::vector<SpatialGrid> joint_grids(const AnnotationTable& table, std::size_t grid_h,
                                     std::size_t grid_w);

SpatialGrid occurrence_grid(const CellCounts& counts);
SpatialGrid membership_grid(const CellCounts& counts, std::size_t cls);
SpatialGrid joint_grid(const CellCounts& counts, std::size_t cls);

// Single-threaded reference versions, kept for testing and benchmarking.
namespace reference {
CellCounts cell_counts(const AnnotationTable& table, std::size_t grid_h, std::size_t grid_w);
SpatialGrid occurrence_grid(const AnnotationTable& table, std::size_t grid_h, std::size_t grid_w);
SpatialGrid membership_grid(const AnnotationTable& table, long category_id, std::size_t grid_h,
                            std::size_t grid_w);
SpatialGrid joint_grid(const AnnotationTable& table, long category_id, std::size_t grid_h,
                       std::size_t grid_w);
}  // namespace reference

// CSV: "grid_h,grid_w,kind" header, one metadata row, then grid_h rows of
// grid_w values (%.17g).
std::string grid_to_csv(const SpatialGrid& grid);
SpatialGrid grid_from_csv(std::string_view text);
SpatialGrid load_grid_csv(const std::string& path);

// ---------------------------------------------------------------------------
// Synthetic long-tailed classification data
// ---------------------------------------------------------------------------

struct Dataset {
    Matrix features;  // samples x dim
    std::vector<int> labels;
    std::size_t class_count = 0;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t dim() const noexcept { return features.cols(); }
    Dataset subset(std::span<const std::size_t> indices) const;

    bool operator==(const Dataset&) const = default;
};

struct SyntheticDataset : Dataset {
    std::vector<long> class_sizes;
    double imbalance_factor = 1.0;
};

struct LongtailSpec {
    std::size_t classes = 100;
    double imbalance_factor = 100.0;
    long n_head = 500;
    std::size_t dim = 32;
    std::uint64_t seed = 0;
    // Class means are drawn from N(0, mean_scale^2 I); samples add N(0, I).
    double mean_scale = 1.0;
};

// Class k holds round(n_head * IF^(-k / (C - 1))) samples.
std::vector<long> longtail_class_sizes(std::size_t classes, double imbalance_factor, long n_head);
SyntheticDataset make_longtail(const LongtailSpec& spec);

struct Split {
    Dataset train;
    Dataset test;
};

// Per class, round(test_fraction * n) samples (at least one, and at least one
// left for training when n >= 2) go to the test split.
Split stratified_split(const Dataset& data, double test_fraction, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Repeat-factor sampling
// ---------------------------------------------------------------------------

// r_c = max(1, sqrt(t / f_c)), f_c the image fraction of category c.
std::vector<double> category_repeat_factors(const ClassFrequencyTable& freq, double threshold);
// r_i = max over the categories present in image i (1 for images without any).
std::vector<double> image_repeat_factors(std::span<const std::vector<std::size_t>> image_categories,
                                         std::span<const double> category_factors);
// floor(r_i) copies of image i plus one more with probability frac(r_i).
std::vector<std::size_t> expand_repeat_factors(std::span<const double> image_factors,
                                               std::mt19937_64& rng);

}  // namespace gol
