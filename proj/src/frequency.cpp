#include "gol/frequency.hpp"

#include "gol/error.hpp"

namespace gol {

std::string to_string(FrequencyGroup g) {
    switch (g) {
        case FrequencyGroup::rare: return "rare";
        case FrequencyGroup::common: return "common";
        case FrequencyGroup::frequent: return "frequent";
    }
    return "unknown";
}

FrequencyGroup classify_group(long image_count, GroupThresholds thresholds) {
    if (image_count <= thresholds.rare_max) return FrequencyGroup::rare;
    if (image_count <= thresholds.common_max) return FrequencyGroup::common;
    return FrequencyGroup::frequent;
}

ClassFrequencyTable ClassFrequencyTable::from_counts(std::span<const long> image_counts,
                                                     std::span<const long> instance_counts,
                                                     long total_images, GroupThresholds thresholds) {
    if (image_counts.size() != instance_counts.size()) {
        throw Error("frequency table: image and instance count lengths differ");
    }
    if (total_images <= 0) {
        throw Error("frequency table: total image count must be positive");
    }
    if (thresholds.rare_max < 0 || thresholds.common_max < thresholds.rare_max) {
        throw Error("frequency table: group thresholds must satisfy 0 <= rare_max <= common_max");
    }
    ClassFrequencyTable table;
    table.total_images_ = total_images;
    table.thresholds_ = thresholds;
    table.classes_.reserve(image_counts.size());
    for (std::size_t c = 0; c < image_counts.size(); ++c) {
        if (image_counts[c] < 0 || instance_counts[c] < 0) {
            throw Error("frequency table: negative count for class " + std::to_string(c));
        }
        table.classes_.push_back(
            {image_counts[c], instance_counts[c], classify_group(image_counts[c], thresholds)});
    }
    return table;
}

ClassFrequencyTable ClassFrequencyTable::from_labels(std::span<const int> labels,
                                                     std::size_t class_count,
                                                     GroupThresholds thresholds) {
    std::vector<long> counts(class_count, 0);
    for (int y : labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= class_count) {
            throw Error("frequency table: label " + std::to_string(y) + " out of range");
        }
        ++counts[static_cast<std::size_t>(y)];
    }
    return from_counts(counts, counts, static_cast<long>(labels.size()), thresholds);
}

double ClassFrequencyTable::image_fraction(std::size_t c) const {
    return static_cast<double>(classes_.at(c).image_count) / static_cast<double>(total_images_);
}

std::vector<std::size_t> ClassFrequencyTable::members(FrequencyGroup g) const {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < classes_.size(); ++c) {
        if (classes_[c].group == g) out.push_back(c);
    }
    return out;
}

}  // namespace gol
