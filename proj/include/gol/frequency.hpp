#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace gol {

enum class FrequencyGroup { rare = 0, common = 1, frequent = 2 };

inline constexpr std::array<FrequencyGroup, 3> kAllGroups = {
    FrequencyGroup::rare, FrequencyGroup::common, FrequencyGroup::frequent};

std::string to_string(FrequencyGroup g);

// Image-count thresholds: rare has 1..rare_max images, common up to
// common_max, frequent above that.
struct GroupThresholds {
    long rare_max = 10;
    long common_max = 100;
};

struct ClassFrequency {
    long image_count = 0;
    long instance_count = 0;
    FrequencyGroup group = FrequencyGroup::rare;
};

class ClassFrequencyTable {
public:
    ClassFrequencyTable() = default;

    // total_images is the number of images (samples) in the dataset; it
    // defines the image-frequency fraction used by the EQL/DropLoss indicator.
    static ClassFrequencyTable from_counts(std::span<const long> image_counts,
                                           std::span<const long> instance_counts,
                                           long total_images, GroupThresholds thresholds = {});

    // Single-label data: every sample is one image holding one instance.
    static ClassFrequencyTable from_labels(std::span<const int> labels, std::size_t class_count,
                                           GroupThresholds thresholds = {});

    std::size_t size() const noexcept { return classes_.size(); }
    const ClassFrequency& operator[](std::size_t c) const { return classes_.at(c); }
    FrequencyGroup group(std::size_t c) const { return classes_.at(c).group; }
    long total_images() const noexcept { return total_images_; }
    const GroupThresholds& thresholds() const noexcept { return thresholds_; }

    // image_count / total_images
    double image_fraction(std::size_t c) const;
    // 1 if the class image fraction is below lambda.
    bool is_tail(std::size_t c, double lambda) const { return image_fraction(c) < lambda; }

    std::vector<std::size_t> members(FrequencyGroup g) const;

private:
    std::vector<ClassFrequency> classes_;
    long total_images_ = 0;
    GroupThresholds thresholds_{};
};

FrequencyGroup classify_group(long image_count, GroupThresholds thresholds);

}  // namespace gol
