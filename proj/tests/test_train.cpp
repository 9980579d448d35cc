#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "reluscan/errors.hpp"
#include "reluscan/train.hpp"

using namespace reluscan;

namespace {

bool params_equal(const Network& a, const Network& b) {
    for (int l = 0; l < a.num_layers(); ++l) {
        auto wa = a.layer_weights(l), wb = b.layer_weights(l);
        auto ba = a.layer_biases(l), bb = b.layer_biases(l);
        for (std::size_t i = 0; i < wa.size(); ++i)
            if (wa[i] != wb[i]) return false;
        for (std::size_t i = 0; i < ba.size(); ++i)
            if (ba[i] != bb[i]) return false;
    }
    return true;
}

// 20 points separated by x0 >= 0, comfortably away from the boundary
Dataset separable_toy() {
    Dataset ds;
    ds.n_classes = 2;
    ds.name = "separable";
    for (int i = 0; i < 10; ++i) {
        ds.inputs.push_back({0.3 + 0.07 * i, (i % 5) * 0.2 - 0.4});
        ds.labels.push_back(1);
        ds.inputs.push_back({-0.3 - 0.07 * i, (i % 5) * 0.2 - 0.4});
        ds.labels.push_back(0);
    }
    return ds;
}

} // namespace

TEST_CASE("a dead network with matching targets takes no step") {
    // hidden ReLUs all off everywhere nearby, output bias equals the target
    Network net(1, {2, 1}, {{0.1, -0.1}, {1.0, 1.0}}, {{-10.0, -10.0}, {1.0}});
    Dataset ds;
    ds.n_classes = 1;
    ds.inputs = {{0.5}, {-0.25}};
    ds.labels = {0, 0}; // one-hot target [1.0] equals the constant output
    TrainConfig cfg;
    cfg.loss = Loss::Mse;
    cfg.epochs = 3;
    cfg.batch_size = 2;
    TrainTrace trace = train(net, ds, cfg);
    CHECK(params_equal(net, *trace.final_net));
    CHECK(trace.checkpoints.front().train_loss == doctest::Approx(0.0));
}

TEST_CASE("first Adam step moves each coordinate by about lr") {
    // no hidden layer: loss gradients are constant near the start
    Network net(1, {1}, {{2.0}}, {{0.5}});
    Dataset ds;
    ds.n_classes = 1;
    ds.inputs = {{2.0}};
    ds.labels = {0}; // target 1.0
    TrainConfig cfg;
    cfg.loss = Loss::Mse;
    cfg.epochs = 1;
    cfg.batch_size = 1;
    cfg.lr = 1e-3;
    // out = 2*2 + 0.5 = 4.5, residual 3.5 > 0: grad_w = 7, grad_b = 3.5
    TrainTrace trace = train(net, ds, cfg);
    const Network& after = *trace.final_net;
    CHECK(std::abs((net.weight(0, 0, 0) - after.weight(0, 0, 0)) - cfg.lr) < 1e-6);
    CHECK(std::abs((net.bias(0, 0) - after.bias(0, 0)) - cfg.lr) < 1e-6);
}

TEST_CASE("separable toy set trains to 95%+ and the loss drops") {
    Network net = he_init(2, {8, 2}, InitSpec{1.0, 1e-3, 3});
    Dataset ds = separable_toy();
    TrainConfig cfg;
    cfg.epochs = 200;
    cfg.batch_size = 8;
    cfg.seed = 1;
    cfg.checkpoint_schedule = {0.0, 1.0, 200.0};
    TrainTrace trace = train(net, ds, cfg);
    REQUIRE(trace.checkpoints.size() == 3);
    CHECK(trace.checkpoints.back().train_accuracy >= 0.95);
    CHECK(trace.checkpoints.back().train_loss < trace.checkpoints.front().train_loss);
}

TEST_CASE("training is reproducible") {
    Network net = he_init(2, {6, 6, 2}, InitSpec{1.0, 1e-3, 7});
    Dataset ds = make_memorization_dataset(64, 2, 11);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.batch_size = 16;
    cfg.seed = 42;
    cfg.checkpoint_schedule = {0.0, 2.5, 5.0};
    TrainTrace a = train(net, ds, cfg);
    TrainTrace b = train(net, ds, cfg);
    REQUIRE(a.checkpoints.size() == b.checkpoints.size());
    for (std::size_t i = 0; i < a.checkpoints.size(); ++i) {
        CHECK(std::abs(a.checkpoints[i].train_loss - b.checkpoints[i].train_loss) <= 1e-12);
        CHECK(a.checkpoints[i].train_accuracy == b.checkpoints[i].train_accuracy);
    }
    CHECK(params_equal(*a.final_net, *b.final_net));
}

TEST_CASE("sub-epoch checkpoints land mid-epoch and snapshots are deep") {
    Network net = he_init(2, {4, 2}, InitSpec{1.0, 0.1, 1});
    Dataset ds = make_memorization_dataset(256, 2, 2);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch_size = 128; // 2 steps per epoch
    cfg.checkpoint_schedule = {0.0, 0.5, 1.0};
    TrainTrace trace = train(net, ds, cfg);
    REQUIRE(trace.checkpoints.size() == 3);
    CHECK(trace.checkpoints[0].epoch == 0.0);
    CHECK(trace.checkpoints[1].epoch == 0.5);
    // the epoch-0 snapshot is the untouched initial network
    CHECK(params_equal(net, *trace.checkpoints[0].net));
    // later snapshots differ (training moved)
    CHECK_FALSE(params_equal(net, *trace.checkpoints[2].net));

    TrainConfig bad = cfg;
    bad.checkpoint_schedule = {0.0, 2.0}; // beyond the final epoch
    CHECK_THROWS_AS(train(net, ds, bad), std::invalid_argument);
}

TEST_CASE("divergence raises with the epoch attached") {
    Network net = he_init(1, {4, 4, 1}, InitSpec{1.0, 0.1, 5});
    Dataset ds;
    ds.n_classes = 1;
    for (int i = 0; i < 8; ++i) {
        ds.inputs.push_back({static_cast<double>(i)});
        ds.labels.push_back(0);
    }
    TrainConfig cfg;
    cfg.loss = Loss::Mse;
    // one Adam step of ~1e80 per parameter overflows the squared loss on the
    // next batch
    cfg.lr = 1e80;
    cfg.epochs = 2;
    cfg.batch_size = 8;
    CHECK_THROWS_AS(train(net, ds, cfg), DivergenceError);
}

TEST_CASE("gradient check") {
    SUBCASE("linear network matches to 1e-8") {
        Network net(3, {2}, {{0.3, -0.2, 0.9, 1.1, 0.0, -0.4}}, {{0.05, -0.3}});
        Dataset ds = make_memorization_dataset(8, 3, 21);
        double err = finite_difference_gradcheck(net, ds, 20, 3);
        CHECK(err < 1e-8);
    }
    SUBCASE("depth-3 width-8 stays under 1e-4 on 100 probes") {
        Network net = he_init(4, {8, 8, 8, 2}, InitSpec{1.0, 0.1, 9});
        Dataset ds = make_memorization_dataset(16, 4, 23);
        double err = finite_difference_gradcheck(net, ds, 100, 5);
        CHECK(err < 1e-4);
    }
    SUBCASE("mse path too") {
        Network net = he_init(2, {6, 2}, InitSpec{1.0, 0.1, 31});
        Dataset ds = make_memorization_dataset(8, 2, 33);
        double err = finite_difference_gradcheck(net, ds, 40, 7, Loss::Mse);
        CHECK(err < 1e-4);
    }
}

TEST_CASE("evaluate reports loss and accuracy") {
    // net that always predicts class 1 by a margin
    Network net(1, {2}, {{0.0, 0.0}}, {{0.0, 5.0}});
    Dataset ds;
    ds.n_classes = 2;
    ds.inputs = {{0.1}, {0.2}, {0.3}, {0.4}};
    ds.labels = {1, 1, 0, 1};
    auto [loss, acc] = evaluate(net, ds, Loss::CrossEntropy);
    CHECK(acc == doctest::Approx(0.75));
    CHECK(loss > 0.0);
}
