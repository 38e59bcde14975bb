#include <doctest.h>

#include <omp.h>

#include <cmath>

#include "gol/classifier_init.hpp"
#include "gol/error.hpp"
#include "gol/trainer.hpp"

using namespace gol;

namespace {

TrainConfig small_config(LossKind loss) {
    TrainConfig cfg;
    cfg.loss = loss;
    cfg.epochs = 5;
    cfg.hidden = 16;
    cfg.batch_size = 16;
    cfg.seed = 7;
    cfg.data.longtail.classes = 10;
    cfg.data.longtail.n_head = 60;
    cfg.data.longtail.imbalance_factor = 10.0;
    cfg.data.longtail.dim = 8;
    return cfg;
}

}  // namespace

TEST_CASE("evaluate_predictions averages per class") {
    const auto freq = ClassFrequencyTable::from_counts(std::vector<long>{5, 50, 500},
                                                       std::vector<long>{5, 50, 500}, 555);
    const std::vector<int> truth{0, 1, 1, 2, 2, 2, 2};
    const std::vector<int> pred{0, 1, 2, 2, 2, 2, 0};
    const auto m = evaluate_predictions(pred, truth, freq);
    CHECK(*m.per_class_accuracy[0] == 1.0);
    CHECK(*m.per_class_accuracy[1] == 0.5);
    CHECK(*m.per_class_accuracy[2] == 0.75);
    CHECK(m.overall_accuracy == doctest::Approx(0.75));
    CHECK(m.sample_accuracy == doctest::Approx(5.0 / 7.0));
    CHECK(*m.group_accuracy[0] == 1.0);
    CHECK(*m.group_accuracy[1] == 0.5);
    CHECK(*m.group_accuracy[2] == 0.75);

    const auto partial = evaluate_predictions(std::vector<int>{2}, std::vector<int>{2}, freq);
    CHECK_FALSE(partial.per_class_accuracy[0].has_value());
    CHECK_FALSE(partial.group_accuracy[0].has_value());
    CHECK(partial.overall_accuracy == 1.0);
    CHECK_THROWS_AS(evaluate_predictions(std::vector<int>{0}, std::vector<int>{3}, freq), Error);
}

TEST_CASE("training is deterministic for a seed and independent of thread count") {
    const auto cfg = small_config(LossKind::gumbel);
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto one = run_experiment(cfg);
    omp_set_num_threads(4);
    const auto four = run_experiment(cfg);
    omp_set_num_threads(saved);
    CHECK(same_results(one.report, four.report));
    CHECK(one.model == four.model);

    auto other = cfg;
    other.seed = 8;
    CHECK_FALSE(same_results(run_experiment(other).report, one.report));
}

TEST_CASE("training lowers the loss for every head") {
    for (LossKind kind : {LossKind::sigmoid_bce, LossKind::softmax_ce, LossKind::gumbel,
                          LossKind::gol, LossKind::eql_gumbel}) {
        const auto res = run_experiment(small_config(kind));
        INFO(to_string(kind));
        REQUIRE(res.report.epoch_loss.size() == 5);
        CHECK(res.report.epoch_loss.back() < res.report.epoch_loss.front());
        CHECK(res.report.metrics.overall_accuracy > 0.3);
    }
}

TEST_CASE("well separated classes are learned exactly") {
    auto cfg = small_config(LossKind::gumbel);
    cfg.data.longtail.mean_scale = 4.0;
    cfg.data.longtail.imbalance_factor = 2.0;
    cfg.epochs = 10;
    const auto res = run_experiment(cfg);
    CHECK(res.report.metrics.overall_accuracy == 1.0);
    CHECK(res.report.metrics.sample_accuracy == 1.0);
}

TEST_CASE("gumbel heads start at the zero-gradient initialization") {
    const auto cfg = small_config(LossKind::gumbel);
    const Model m = init_model(8, 10, cfg);
    CHECK(m.classifier == init_classifier(16, 10));
    auto sm = cfg;
    sm.loss = LossKind::softmax_ce;
    const Model s = init_model(8, 10, sm);
    for (double b : s.classifier.bias) CHECK(b == 0.0);
    CHECK(s.hidden == m.hidden);
}

TEST_CASE("classifier retraining freezes the hidden layer") {
    auto cfg = small_config(LossKind::softmax_ce);
    const auto data = make_dataset(cfg);
    const auto freq = ClassFrequencyTable::from_labels(data.labels, data.class_count);
    Model model = init_model(data.dim(), data.class_count, cfg);
    fit(model, data, cfg, freq);

    CHECK_THROWS_AS(retrain_classifier(model, data, cfg, freq), Error);

    cfg.stage2 = Stage2Config{0, 1e-2, LossKind::gumbel};
    const Model fresh = retrain_classifier(model, data, cfg, freq);
    CHECK(fresh.hidden == model.hidden);
    CHECK(fresh.classifier == init_classifier(16, 10));
    CHECK(fresh.activation == LossKind::gumbel);

    cfg.stage2->epochs = 3;
    FitOutput out;
    const Model tuned = retrain_classifier(model, data, cfg, freq, &out);
    CHECK(tuned.hidden == model.hidden);
    CHECK_FALSE(tuned.classifier == fresh.classifier);
    CHECK(out.epoch_loss.size() == 3);
}

TEST_CASE("two-stage runs report both stages") {
    auto cfg = small_config(LossKind::softmax_ce);
    cfg.stage2 = Stage2Config{2, 1e-2, LossKind::gumbel};
    const auto res = run_experiment(cfg);
    CHECK(res.report.epoch_loss.size() == 5);
    CHECK(res.report.stage2_epoch_loss.size() == 2);
    REQUIRE(res.report.stage1_metrics.has_value());
    CHECK(res.model.activation == LossKind::gumbel);
}

TEST_CASE("repeat-factor sampler trains") {
    auto cfg = small_config(LossKind::gumbel);
    cfg.sampler = SamplerKind::repeat_factor;
    cfg.rfs_threshold = 0.1;
    const auto res = run_experiment(cfg);
    CHECK(std::isfinite(res.report.epoch_loss.back()));
}

TEST_CASE("divergence is reported with epoch and step") {
    auto cfg = small_config(LossKind::sigmoid_bce);
    cfg.lr = 1e200;
    cfg.momentum = 0.0;
    try {
        run_experiment(cfg);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(std::string(e.what()).rfind("divergence at epoch 1, step ", 0) == 0);
    }
}

TEST_CASE("config validation") {
    TrainConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.lr = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.clip = {3.0, 1.0};
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.momentum = 1.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}
