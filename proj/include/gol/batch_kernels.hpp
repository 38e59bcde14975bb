#pragma once

#include <span>
#include <vector>

#include "gol/frequency.hpp"
#include "gol/matrix.hpp"
#include "gol/model.hpp"

namespace gol {

struct LossSpec {
    LossKind kind = LossKind::softmax_ce;
    ClipRange clip{};
    Temperature temperature{};
    // Needed by gol and eql_gumbel for the tail indicator.
    const ClassFrequencyTable* freq = nullptr;
    double lambda = 0.0011;
};

// Loss and dL/dq for one sample with true class `label`. Gumbel-family
// losses clip q first; the clamp passes gradient only inside the range.
double sample_loss(const LossSpec& spec, std::span<const double> q, int label,
                   std::span<double> dq);

struct Gradients {
    std::optional<HiddenLayer> hidden;
    ClassifierParams classifier;
};

struct BatchResult {
    double loss = 0.0;  // mean over the batch
    Gradients grads;
    std::vector<double> per_sample_loss;
    // dL/dq of the true class for every sample, before batch averaging.
    std::vector<double> positive_grad;
};

// Mean loss and gradients over rows `rows` of `features`. Per-sample work
// runs in parallel; every parameter gradient is reduced in row order, so
// the result is bitwise independent of the thread count.
BatchResult batch_loss_grad(const Model& model, const LossSpec& spec, const Matrix& features,
                            std::span<const int> labels, std::span<const std::size_t> rows);

namespace reference {
// Straight single-threaded loop over samples; same summation order.
BatchResult batch_loss_grad(const Model& model, const LossSpec& spec, const Matrix& features,
                            std::span<const int> labels, std::span<const std::size_t> rows);
}  // namespace reference

}  // namespace gol
