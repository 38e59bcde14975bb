// Serial reference vs OpenMP kernels.
#include <benchmark/benchmark.h>

#include <numeric>
#include <random>

#include "gol/batch_kernels.hpp"
#include "gol/classifier_init.hpp"
#include "gol/longtail_data.hpp"

namespace {

struct BatchSetup {
    gol::Model model;
    gol::Matrix features;
    std::vector<int> labels;
    std::vector<std::size_t> rows;
    gol::LossSpec spec;

    explicit BatchSetup(std::size_t batch) {
        std::mt19937_64 rng(1);
        const std::size_t dim = 32, width = 64, classes = 100;
        model.hidden = gol::fan_in_hidden(dim, width, rng);
        model.classifier = gol::init_classifier(width, classes);
        model.activation = gol::LossKind::gumbel;
        features = gol::Matrix(batch, dim, 0.0);
        std::normal_distribution<double> nd;
        for (double& v : features.flat()) v = nd(rng);
        for (std::size_t i = 0; i < batch; ++i) labels.push_back(static_cast<int>(i % classes));
        rows.resize(batch);
        std::iota(rows.begin(), rows.end(), std::size_t{0});
        spec.kind = gol::LossKind::gumbel;
    }
};

void BM_BatchSerial(benchmark::State& state) {
    BatchSetup s(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            gol::reference::batch_loss_grad(s.model, s.spec, s.features, s.labels, s.rows));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BatchParallel(benchmark::State& state) {
    BatchSetup s(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(gol::batch_loss_grad(s.model, s.spec, s.features, s.labels, s.rows));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

gol::AnnotationTable random_table(std::size_t objects) {
    std::mt19937_64 rng(3);
    gol::AnnotationTable t;
    for (long i = 0; i < 50; ++i) t.images.push_back({i, 640.0, 480.0});
    for (long c = 0; c < 100; ++c) t.categories.push_back({c, "c" + std::to_string(c)});
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<long> img(0, 49), cat(0, 99);
    for (std::size_t k = 0; k < objects; ++k) {
        gol::ObjectInfo o;
        o.image_id = img(rng);
        o.category_id = cat(rng);
        o.cx = u(rng) * 640.0;
        o.cy = u(rng) * 480.0;
        o.bbox = {o.cx, o.cy, 0.0, 0.0};
        t.objects.push_back(o);
    }
    return t;
}

void BM_GridsSerial(benchmark::State& state) {
    const auto t = random_table(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(gol::reference::cell_counts(t, 64, 64));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_GridsParallel(benchmark::State& state) {
    const auto t = random_table(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(gol::cell_counts(t, 64, 64));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_BatchSerial)->Arg(64)->Arg(512)->Arg(4096)->UseRealTime();
BENCHMARK(BM_BatchParallel)->Arg(64)->Arg(512)->Arg(4096)->UseRealTime();
BENCHMARK(BM_GridsSerial)->Arg(10000)->Arg(1000000)->UseRealTime();
BENCHMARK(BM_GridsParallel)->Arg(10000)->Arg(1000000)->UseRealTime();

BENCHMARK_MAIN();
