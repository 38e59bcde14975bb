#include "gol/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "gol/error.hpp"
#include "gol/losses.hpp"

namespace gol {

namespace {

struct Setup {
    std::vector<double> q;
    std::vector<int> y;
};

Setup make_setup(LossKind loss, double q, int y) {
    if (loss == LossKind::softmax_ce) {
        return {{q, 0.5, -1.0}, y == 1 ? std::vector<int>{1, 0, 0} : std::vector<int>{0, 1, 0}};
    }
    return {{q}, {y}};
}

LossBreakdown evaluate(LossKind loss, std::span<const double> q, std::span<const int> y) {
    switch (loss) {
        case LossKind::sigmoid_bce: return sigmoid_bce(q, y);
        case LossKind::softmax_ce: return softmax_ce(q, y);
        case LossKind::gumbel: return gumbel_loss(q, y);
        case LossKind::gol: {
            const std::vector<double> ones(q.size(), 1.0);
            return gol_loss(q, y, ones);
        }
        case LossKind::eql_gumbel: break;
    }
    throw Error("gradient check does not support loss " + to_string(loss));
}

}  // namespace

GradCheckRow gradient_check(LossKind loss, double q, int y, double h) {
    if (y != 0 && y != 1) throw Error("gradient check target must be 0 or 1");
    if (!(h > 0.0)) throw Error("finite-difference step must be positive");
    Setup s = make_setup(loss, q, y);
    GradCheckRow row{loss, q, y, evaluate(loss, s.q, s.y).grad, {}, 0.0};
    row.numeric.resize(s.q.size());
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < s.q.size(); ++i) {
        const double x = s.q[i];
        s.q[i] = x + h;
        const double up = evaluate(loss, s.q, s.y).total;
        s.q[i] = x - h;
        const double down = evaluate(loss, s.q, s.y).total;
        s.q[i] = x;
        row.numeric[i] = (up - down) / (2.0 * h);
        diff = std::max(diff, std::abs(row.analytic[i] - row.numeric[i]));
        scale = std::max({scale, std::abs(row.analytic[i]), std::abs(row.numeric[i])});
    }
    row.rel_error = scale == 0.0 ? 0.0 : diff / scale;
    return row;
}

std::vector<GradCheckRow> gradient_check_grid(std::span<const LossKind> losses,
                                              std::span<const double> grid, double h) {
    std::vector<GradCheckRow> rows;
    for (LossKind loss : losses) {
        for (double q : grid) {
            for (int y : {0, 1}) rows.push_back(gradient_check(loss, q, y, h));
        }
    }
    return rows;
}

std::string gradcheck_csv(std::span<const GradCheckRow> rows) {
    std::string out = "loss,q,y,analytic,numeric,rel_error\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%.17g,%d,%.17g,%.17g,%.6e\n", to_string(r.loss).c_str(),
                      r.q, r.y, r.analytic[0], r.numeric[0], r.rel_error);
        out += buf;
    }
    return out;
}

}  // namespace gol
