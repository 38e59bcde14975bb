#include "gol/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "gol/error.hpp"

namespace gol {

std::string to_string(LossKind kind) {
    switch (kind) {
        case LossKind::sigmoid_bce: return "sigmoid_bce";
        case LossKind::softmax_ce: return "softmax_ce";
        case LossKind::gumbel: return "gumbel";
        case LossKind::gol: return "gol";
        case LossKind::eql_gumbel: return "eql_gumbel";
    }
    return "unknown";
}

LossKind loss_kind_from_string(std::string_view name) {
    for (LossKind k : {LossKind::sigmoid_bce, LossKind::softmax_ce, LossKind::gumbel, LossKind::gol,
                       LossKind::eql_gumbel}) {
        if (to_string(k) == name) return k;
    }
    throw ParseError("unknown loss \"" + std::string(name) + "\"");
}

bool uses_gumbel(LossKind kind) {
    return kind == LossKind::gumbel || kind == LossKind::gol || kind == LossKind::eql_gumbel;
}

namespace {

std::uint64_t fnv1a(std::uint64_t h, std::span<const double> values) {
    for (double v : values) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &v, sizeof v);
        for (unsigned char b : bytes) {
            h ^= b;
            h *= 1099511628211ULL;
        }
    }
    return h;
}

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;

}  // namespace

std::uint64_t parameter_hash(const HiddenLayer& layer) {
    return fnv1a(fnv1a(kFnvOffset, layer.weights.flat()), layer.bias);
}

std::uint64_t parameter_hash(const ClassifierParams& params) {
    return fnv1a(fnv1a(kFnvOffset, params.weights.flat()), params.bias);
}

void Model::embed(std::span<const double> x, std::span<double> h) const {
    if (!hidden) {
        std::copy(x.begin(), x.end(), h.begin());
        return;
    }
    const Matrix& w = hidden->weights;
    std::copy(hidden->bias.begin(), hidden->bias.end(), h.begin());
    for (std::size_t i = 0; i < w.rows(); ++i) {
        const double xi = x[i];
        const auto row = w.row(i);
        for (std::size_t k = 0; k < row.size(); ++k) h[k] += xi * row[k];
    }
    for (double& v : h) v = std::max(v, 0.0);
}

void Model::scores(std::span<const double> x, std::span<double> q) const {
    std::vector<double> h(feature_dim());
    embed(x, h);
    const Matrix& w = classifier.weights;
    std::copy(classifier.bias.begin(), classifier.bias.end(), q.begin());
    for (std::size_t i = 0; i < w.rows(); ++i) {
        const double hi = h[i];
        const auto row = w.row(i);
        for (std::size_t c = 0; c < row.size(); ++c) q[c] += hi * row[c];
    }
}

ProbVector Model::predict_proba(std::span<const double> x) const {
    std::vector<double> q(class_count());
    scores(x, q);
    switch (activation) {
        case LossKind::softmax_ce: return softmax(q);
        case LossKind::sigmoid_bce:
            for (double& v : q) v = sigmoid(v);
            return q;
        default:
            for (double& v : q) v = gumbel_cdf(clip_score(v, clip), temperature);
            return q;
    }
}

int Model::predict(std::span<const double> x) const {
    std::vector<double> q(class_count());
    scores(x, q);
    return static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
}

ClassifierParams normal_classifier(std::size_t feature_dim, std::size_t class_count, double std,
                                   std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, std);
    ClassifierParams p{Matrix(feature_dim, class_count), std::vector<double>(class_count, 0.0)};
    for (double& v : p.weights.flat()) v = n(rng);
    return p;
}

HiddenLayer fan_in_hidden(std::size_t input_dim, std::size_t width, std::mt19937_64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
    std::uniform_real_distribution<double> u(-bound, bound);
    HiddenLayer layer{Matrix(input_dim, width), std::vector<double>(width)};
    for (double& v : layer.weights.flat()) v = u(rng);
    for (double& v : layer.bias) v = u(rng);
    return layer;
}

}  // namespace gol
