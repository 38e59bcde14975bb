#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gol/activation.hpp"
#include "gol/classifier_init.hpp"
#include "gol/matrix.hpp"

namespace gol {

enum class LossKind { sigmoid_bce, softmax_ce, gumbel, gol, eql_gumbel };

std::string to_string(LossKind kind);
LossKind loss_kind_from_string(std::string_view name);
// gumbel, gol and eql_gumbel share the clipped Gumbel activation.
bool uses_gumbel(LossKind kind);

// ReLU layer: h = max(0, W^T x + b), W is input_dim x width.
struct HiddenLayer {
    Matrix weights;
    std::vector<double> bias;

    std::size_t width() const noexcept { return weights.cols(); }
    bool operator==(const HiddenLayer&) const = default;
};

// FNV-1a over the raw parameter bytes.
std::uint64_t parameter_hash(const HiddenLayer& layer);
std::uint64_t parameter_hash(const ClassifierParams& params);

struct Model {
    std::optional<HiddenLayer> hidden;
    ClassifierParams classifier;
    // Activation used to turn scores into probabilities.
    LossKind activation = LossKind::softmax_ce;
    ClipRange clip{};
    Temperature temperature{};

    std::size_t input_dim() const noexcept {
        return hidden ? hidden->weights.rows() : classifier.feature_dim();
    }
    std::size_t feature_dim() const noexcept { return classifier.feature_dim(); }
    std::size_t class_count() const noexcept { return classifier.class_count(); }

    // Classifier input for sample x; h.size() == feature_dim().
    void embed(std::span<const double> x, std::span<double> h) const;
    // Raw scores q; q.size() == class_count().
    void scores(std::span<const double> x, std::span<double> q) const;
    ProbVector predict_proba(std::span<const double> x) const;
    // argmax of the raw scores; every activation here is monotone.
    int predict(std::span<const double> x) const;

    bool operator==(const Model& other) const {
        return hidden == other.hidden && classifier == other.classifier &&
               activation == other.activation;
    }
};

// Weights N(0, std^2), zero bias; the usual detection-head initialization.
ClassifierParams normal_classifier(std::size_t feature_dim, std::size_t class_count, double std,
                                   std::mt19937_64& rng);
// U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
HiddenLayer fan_in_hidden(std::size_t input_dim, std::size_t width, std::mt19937_64& rng);

}  // namespace gol
