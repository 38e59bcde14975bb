#include "gol/batch_kernels.hpp"

#include <algorithm>
#include <cmath>

#include "gol/error.hpp"
#include "gol/losses.hpp"

namespace gol {

double sample_loss(const LossSpec& spec, std::span<const double> q, int label,
                   std::span<double> dq) {
    const std::size_t classes = q.size();
    TargetVector y(classes, 0);
    y.at(static_cast<std::size_t>(label)) = 1;

    LossBreakdown out;
    switch (spec.kind) {
        case LossKind::softmax_ce:
            out = softmax_ce(q, y);
            break;
        case LossKind::sigmoid_bce:
            out = sigmoid_bce(q, y);
            break;
        case LossKind::gumbel:
        case LossKind::gol:
        case LossKind::eql_gumbel: {
            const ScoreVector clipped = clip_scores(q, spec.clip);
            if (spec.kind == LossKind::gumbel) {
                out = gumbel_loss(clipped, y, spec.temperature);
            } else {
                if (spec.freq == nullptr) {
                    throw Error(to_string(spec.kind) + " needs a class frequency table");
                }
                // Synthetic classification has no background samples, so
                // every sample takes the deterministic foreground branch.
                const WeightVector w = spec.kind == LossKind::gol
                                           ? droploss_weights(y, *spec.freq, true,
                                                              DropState{spec.lambda, 0.0, 0.0, 0})
                                           : eql_weights(y, *spec.freq, true, spec.lambda);
                out = gol_loss(clipped, y, w, spec.temperature);
            }
            for (std::size_t c = 0; c < classes; ++c) {
                if (q[c] < spec.clip.lo || q[c] > spec.clip.hi) out.grad[c] = 0.0;
            }
            break;
        }
    }
    std::copy(out.grad.begin(), out.grad.end(), dq.begin());
    return out.total;
}

namespace {

struct Workspace {
    Matrix inputs;   // B x input_dim
    Matrix hidden;   // B x feature_dim (post-ReLU), empty for linear models
    Matrix dq;       // B x C, already divided by B
    Matrix dh;       // B x feature_dim
};

Gradients zero_gradients(const Model& model) {
    Gradients g;
    if (model.hidden) {
        g.hidden = HiddenLayer{Matrix(model.hidden->weights.rows(), model.hidden->weights.cols()),
                               std::vector<double>(model.hidden->bias.size(), 0.0)};
    }
    g.classifier = {Matrix(model.classifier.weights.rows(), model.classifier.weights.cols()),
                    std::vector<double>(model.classifier.bias.size(), 0.0)};
    return g;
}

void check_batch(const Model& model, const Matrix& features, std::span<const int> labels,
                 std::span<const std::size_t> rows) {
    if (rows.empty()) throw Error("empty batch");
    if (features.cols() != model.input_dim()) {
        throw Error("feature dimension " + std::to_string(features.cols()) +
                    " does not match model input " + std::to_string(model.input_dim()));
    }
    if (labels.size() != features.rows()) throw Error("labels and features differ in length");
}

// Forward pass and dL/dq for sample b; shared by both code paths.
void forward_sample(const Model& model, const LossSpec& spec, const Matrix& features,
                    std::span<const int> labels, std::size_t row, std::size_t b, double inv_batch,
                    Workspace& ws, BatchResult& out) {
    const auto x = features.row(row);
    std::copy(x.begin(), x.end(), ws.inputs.row(b).begin());
    std::vector<double> h(model.feature_dim());
    model.embed(x, h);
    if (model.hidden) std::copy(h.begin(), h.end(), ws.hidden.row(b).begin());

    std::vector<double> q(model.class_count());
    const Matrix& w = model.classifier.weights;
    std::copy(model.classifier.bias.begin(), model.classifier.bias.end(), q.begin());
    for (std::size_t i = 0; i < w.rows(); ++i) {
        const auto wr = w.row(i);
        for (std::size_t c = 0; c < q.size(); ++c) q[c] += h[i] * wr[c];
    }
    auto dq = ws.dq.row(b);
    const int label = labels[row];
    out.per_sample_loss[b] = sample_loss(spec, q, label, dq);
    out.positive_grad[b] = dq[static_cast<std::size_t>(label)];
    for (double& v : dq) v *= inv_batch;
}

void backprop_sample(const Model& model, std::size_t b, Workspace& ws) {
    const Matrix& w = model.classifier.weights;
    const auto dq = ws.dq.row(b);
    const auto h = ws.hidden.row(b);
    auto dh = ws.dh.row(b);
    for (std::size_t i = 0; i < w.rows(); ++i) {
        if (h[i] <= 0.0) {
            dh[i] = 0.0;
            continue;
        }
        const auto wr = w.row(i);
        double s = 0.0;
        for (std::size_t c = 0; c < dq.size(); ++c) s += wr[c] * dq[c];
        dh[i] = s;
    }
}

Workspace make_workspace(const Model& model, std::size_t batch) {
    Workspace ws;
    ws.inputs = Matrix(batch, model.input_dim());
    ws.dq = Matrix(batch, model.class_count());
    if (model.hidden) {
        ws.hidden = Matrix(batch, model.feature_dim());
        ws.dh = Matrix(batch, model.feature_dim());
    }
    return ws;
}

double mean_loss(std::span<const double> per_sample) {
    double total = 0.0;
    for (double v : per_sample) total += v;
    return total / static_cast<double>(per_sample.size());
}

}  // namespace

BatchResult batch_loss_grad(const Model& model, const LossSpec& spec, const Matrix& features,
                            std::span<const int> labels, std::span<const std::size_t> rows) {
    check_batch(model, features, labels, rows);
    const std::size_t batch = rows.size();
    const auto nb = static_cast<long>(batch);
    const double inv_batch = 1.0 / static_cast<double>(batch);
    Workspace ws = make_workspace(model, batch);
    BatchResult out;
    out.per_sample_loss.resize(batch);
    out.positive_grad.resize(batch);
    out.grads = zero_gradients(model);

    bool failed = false;
    std::string failure;
#pragma omp parallel for schedule(static)
    for (long b = 0; b < nb; ++b) {
        try {
            forward_sample(model, spec, features, labels, rows[static_cast<std::size_t>(b)],
                           static_cast<std::size_t>(b), inv_batch, ws, out);
        } catch (const std::exception& e) {
#pragma omp critical
            {
                failed = true;
                failure = e.what();
            }
        }
    }
    if (failed) throw Error(failure);

    // Classifier: each row of dW (one input feature) is owned by one thread.
    const Matrix& inputs = model.hidden ? ws.hidden : ws.inputs;
    Matrix& dw = out.grads.classifier.weights;
    const auto feat = static_cast<long>(dw.rows());
    const std::size_t classes = dw.cols();
#pragma omp parallel for schedule(static)
    for (long i = 0; i < feat; ++i) {
        auto dwr = dw.row(static_cast<std::size_t>(i));
        for (std::size_t b = 0; b < batch; ++b) {
            const double hb = inputs(b, static_cast<std::size_t>(i));
            const auto dq = ws.dq.row(b);
            for (std::size_t c = 0; c < classes; ++c) dwr[c] += hb * dq[c];
        }
    }
    auto& db = out.grads.classifier.bias;
    for (std::size_t b = 0; b < batch; ++b) {
        const auto dq = ws.dq.row(b);
        for (std::size_t c = 0; c < classes; ++c) db[c] += dq[c];
    }

    if (model.hidden) {
#pragma omp parallel for schedule(static)
        for (long b = 0; b < nb; ++b) backprop_sample(model, static_cast<std::size_t>(b), ws);

        Matrix& dw1 = out.grads.hidden->weights;
        const auto in_dim = static_cast<long>(dw1.rows());
        const std::size_t width = dw1.cols();
#pragma omp parallel for schedule(static)
        for (long j = 0; j < in_dim; ++j) {
            auto dwr = dw1.row(static_cast<std::size_t>(j));
            for (std::size_t b = 0; b < batch; ++b) {
                const double xb = ws.inputs(b, static_cast<std::size_t>(j));
                const auto dh = ws.dh.row(b);
                for (std::size_t k = 0; k < width; ++k) dwr[k] += xb * dh[k];
            }
        }
        auto& db1 = out.grads.hidden->bias;
        for (std::size_t b = 0; b < batch; ++b) {
            const auto dh = ws.dh.row(b);
            for (std::size_t k = 0; k < width; ++k) db1[k] += dh[k];
        }
    }
    out.loss = mean_loss(out.per_sample_loss);
    return out;
}

namespace reference {

BatchResult batch_loss_grad(const Model& model, const LossSpec& spec, const Matrix& features,
                            std::span<const int> labels, std::span<const std::size_t> rows) {
    check_batch(model, features, labels, rows);
    const std::size_t batch = rows.size();
    const double inv_batch = 1.0 / static_cast<double>(batch);
    Workspace ws = make_workspace(model, batch);
    BatchResult out;
    out.per_sample_loss.resize(batch);
    out.positive_grad.resize(batch);
    out.grads = zero_gradients(model);

    Matrix& dw = out.grads.classifier.weights;
    auto& db = out.grads.classifier.bias;
    for (std::size_t b = 0; b < batch; ++b) {
        forward_sample(model, spec, features, labels, rows[b], b, inv_batch, ws, out);
        const auto in = model.hidden ? ws.hidden.row(b) : ws.inputs.row(b);
        const auto dq = ws.dq.row(b);
        for (std::size_t i = 0; i < dw.rows(); ++i) {
            for (std::size_t c = 0; c < dw.cols(); ++c) dw(i, c) += in[i] * dq[c];
        }
        for (std::size_t c = 0; c < db.size(); ++c) db[c] += dq[c];

        if (model.hidden) {
            backprop_sample(model, b, ws);
            Matrix& dw1 = out.grads.hidden->weights;
            auto& db1 = out.grads.hidden->bias;
            const auto x = ws.inputs.row(b);
            const auto dh = ws.dh.row(b);
            for (std::size_t j = 0; j < dw1.rows(); ++j) {
                for (std::size_t k = 0; k < dw1.cols(); ++k) dw1(j, k) += x[j] * dh[k];
            }
            for (std::size_t k = 0; k < db1.size(); ++k) db1[k] += dh[k];
        }
    }
    out.loss = mean_loss(out.per_sample_loss);
    return out;
}

}  // namespace reference

}  // namespace gol
