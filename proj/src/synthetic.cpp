#include <algorithm>
#include <cmath>

#include "gol/error.hpp"
#include "gol/longtail_data.hpp"

namespace gol {

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Dataset out;
    out.class_count = class_count;
    out.features = Matrix(indices.size(), dim());
    out.labels.reserve(indices.size());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const auto src = features.row(indices[r]);
        std::copy(src.begin(), src.end(), out.features.row(r).begin());
        out.labels.push_back(labels.at(indices[r]));
    }
    return out;
}

std::vector<long> longtail_class_sizes(std::size_t classes, double imbalance_factor, long n_head) {
    if (classes < 2) throw Error("long-tailed data needs at least 2 classes");
    if (!(imbalance_factor >= 1.0)) throw Error("imbalance factor must be >= 1");
    if (n_head < static_cast<long>(classes)) throw Error("n_head must be >= class count");
    std::vector<long> sizes(classes);
    const double last = static_cast<double>(classes - 1);
    for (std::size_t k = 0; k < classes; ++k) {
        const double n = static_cast<double>(n_head) *
                         std::pow(imbalance_factor, -static_cast<double>(k) / last);
        sizes[k] = std::lround(n);
        if (sizes[k] == 0) {
            throw Error("class " + std::to_string(k) + " size rounds to 0");
        }
    }
    return sizes;
}

SyntheticDataset make_longtail(const LongtailSpec& spec) {
    if (spec.dim == 0) throw Error("feature dimension must be positive");
    SyntheticDataset data;
    data.class_sizes = longtail_class_sizes(spec.classes, spec.imbalance_factor, spec.n_head);
    data.imbalance_factor = spec.imbalance_factor;
    data.class_count = spec.classes;

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    Matrix means(spec.classes, spec.dim);
    for (double& v : means.flat()) v = spec.mean_scale * normal(rng);

    long total = 0;
    for (long n : data.class_sizes) total += n;
    data.features = Matrix(static_cast<std::size_t>(total), spec.dim);
    data.labels.reserve(static_cast<std::size_t>(total));
    std::size_t r = 0;
    for (std::size_t k = 0; k < spec.classes; ++k) {
        for (long s = 0; s < data.class_sizes[k]; ++s, ++r) {
            auto row = data.features.row(r);
            for (std::size_t d = 0; d < spec.dim; ++d) row[d] = means(k, d) + normal(rng);
            data.labels.push_back(static_cast<int>(k));
        }
    }
    return data;
}

Split stratified_split(const Dataset& data, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw Error("test fraction must lie in (0, 1)");
    }
    std::vector<std::vector<std::size_t>> by_class(data.class_count);
    for (std::size_t i = 0; i < data.size(); ++i) {
        by_class.at(static_cast<std::size_t>(data.labels[i])).push_back(i);
    }
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> train, test;
    for (auto& members : by_class) {
        if (members.empty()) continue;
        std::shuffle(members.begin(), members.end(), rng);
        const auto n = static_cast<long>(members.size());
        long n_test = std::max(1L, std::lround(test_fraction * static_cast<double>(n)));
        if (n >= 2) n_test = std::min(n_test, n - 1);
        test.insert(test.end(), members.begin(), members.begin() + n_test);
        train.insert(train.end(), members.begin() + n_test, members.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {data.subset(train), data.subset(test)};
}

std::vector<double> category_repeat_factors(const ClassFrequencyTable& freq, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw Error("repeat-factor threshold must lie in (0, 1]");
    }
    std::vector<double> out(freq.size());
    for (std::size_t c = 0; c < freq.size(); ++c) {
        const double f = freq.image_fraction(c);
        if (!(f > 0.0)) {
            throw Error("category " + std::to_string(c) + " has zero image frequency");
        }
        out[c] = std::max(1.0, std::sqrt(threshold / f));
    }
    return out;
}

std::vector<double> image_repeat_factors(std::span<const std::vector<std::size_t>> image_categories,
                                         std::span<const double> category_factors) {
    std::vector<double> out(image_categories.size(), 1.0);
    for (std::size_t i = 0; i < image_categories.size(); ++i) {
        for (std::size_t c : image_categories[i]) {
            out[i] = std::max(out[i], category_factors[c]);
        }
    }
    return out;
}

std::vector<std::size_t> expand_repeat_factors(std::span<const double> image_factors,
                                               std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < image_factors.size(); ++i) {
        const double r = image_factors[i];
        const double whole = std::floor(r);
        const double frac = r - whole;
        auto copies = static_cast<long>(whole);
        // No draw for integral factors, so an all-ones list is returned unchanged.
        if (frac > 0.0 && unit(rng) < frac) ++copies;
        out.insert(out.end(), static_cast<std::size_t>(copies), i);
    }
    return out;
}

}  // namespace gol
