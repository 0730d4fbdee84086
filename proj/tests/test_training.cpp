#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ritzhom/losses.hpp"
#include "ritzhom/material.hpp"
#include "ritzhom/training.hpp"

using namespace ritzhom;

namespace {

// minimal objective for closed-form tests
struct QuadraticObjective {
    void begin_epoch(long) {}
    double value(std::span<const double> p) const {
        double s = 0.0;
        for (double v : p) s += v * v;
        return s;
    }
    double value_and_grad(std::span<const double> p, std::span<double> g) const {
        for (std::size_t i = 0; i < p.size(); ++i) g[i] = 2.0 * p[i];
        return value(p);
    }
};

}  // namespace

TEST_CASE("learning-rate schedule") {
    TrainConfig cfg;
    CHECK(lr_at(cfg, 0) == 0.005);
    CHECK(lr_at(cfg, 499) == 0.005);
    CHECK(lr_at(cfg, 500) == Catch::Approx(0.00475).margin(1e-15));
    CHECK(lr_at(cfg, 1000) == Catch::Approx(0.0045125).margin(1e-15));
    for (long e = 0; e < 5000; e += 37) CHECK(lr_at(cfg, e + 1) <= lr_at(cfg, e));
}

TEST_CASE("adam with zero gradient leaves parameters unchanged") {
    AdamState st(3);
    std::vector<double> p{1.0, -2.0, 0.5};
    const std::vector<double> g{0.0, 0.0, 0.0};
    adam_step(st, p, g, 0.01);
    CHECK(st.step == 1);
    CHECK(p[0] == 1.0);
    CHECK(p[1] == -2.0);
    CHECK(p[2] == 0.5);
}

TEST_CASE("adam first step magnitude is close to the learning rate") {
    for (double g0 : {1e-3, 0.1, 5.0, 1234.0}) {
        AdamState st(1);
        std::vector<double> p{0.0};
        adam_step(st, p, std::vector<double>{g0}, 0.01);
        // bias-corrected first step: lr * g / (|g| + eps), eps = 1e-8
        CHECK(std::abs(p[0]) == Catch::Approx(0.01).epsilon(1e-4));
        CHECK(p[0] < 0.0);
    }
}

TEST_CASE("adam drives a 1-parameter quadratic to zero, matching a reference recursion") {
    // independent oracle: the same recursion written directly
    double theta = 1.0, m = 0.0, v = 0.0;
    const double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    for (int t = 1; t <= 2000; ++t) {
        const double g = 2.0 * theta;
        m = b1 * m + (1 - b1) * g;
        v = b2 * v + (1 - b2) * g * g;
        theta -= lr * (m / (1 - std::pow(b1, t))) / (std::sqrt(v / (1 - std::pow(b2, t))) + eps);
    }
    REQUIRE(std::abs(theta) < 1e-4);

    AdamState st(1);
    std::vector<double> p{1.0};
    for (int t = 0; t < 2000; ++t) {
        const std::vector<double> g{2.0 * p[0]};
        adam_step(st, p, g, lr);
    }
    CHECK(p[0] == Catch::Approx(theta).margin(1e-12));
    CHECK(std::abs(p[0]) < 1e-4);
}

TEST_CASE("adam rejects mismatched shapes") {
    AdamState st(2);
    std::vector<double> p{1.0, 2.0, 3.0};
    const std::vector<double> g{0.0, 0.0, 0.0};
    CHECK_THROWS_AS(adam_step(st, p, g, 0.01), std::invalid_argument);
}

TEST_CASE("train with zero epochs changes nothing") {
    ResidualNet net = init_params(4, 1, Activation::kTanh, 3);
    const std::vector<double> before = net.params;
    QuadraticObjective obj;
    TrainConfig cfg;
    cfg.epochs = 0;
    const TrainRecord rec = train(net, obj, cfg);
    CHECK(rec.loss_history.empty());
    CHECK(rec.epochs_run == 0);
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(net.params[i] == before[i]);
}

TEST_CASE("training a convex quadratic has a non-increasing smoothed loss") {
    ResidualNet net = init_params(4, 1, Activation::kTanh, 5);
    QuadraticObjective obj;
    TrainConfig cfg;
    cfg.epochs = 1200;
    cfg.lr0 = 0.01;
    const TrainRecord rec = train(net, obj, cfg);
    REQUIRE(rec.loss_history.size() == 1200);
    auto moving = [&](std::size_t start) {
        double s = 0.0;
        for (std::size_t k = start; k < start + 100; ++k) s += rec.loss_history[k];
        return s / 100.0;
    };
    for (std::size_t e = 200; e + 101 < rec.loss_history.size(); e += 50)
        CHECK(moving(e + 1) <= moving(e) + 1e-12);
}

TEST_CASE("training is deterministic") {
    const auto micro = make_microstructure(CircleCase{0.3, 0.1});
    SamplingPlan plan;
    plan.n_interior = 128;
    plan.seed = 4;
    plan.resample_each_epoch = true;
    TrainConfig cfg;
    cfg.epochs = 40;
    auto run = [&] {
        ResidualNet net = init_params(5, 1, Activation::kTanh, 10);
        EnergyObjective obj =
            make_lower_cell_objective(net.arch, unit_square(), 1, micro, plan, {});
        return train(net, obj, cfg);
    };
    const TrainRecord a = run();
    const TrainRecord b = run();
    REQUIRE(a.loss_history.size() == b.loss_history.size());
    for (std::size_t i = 0; i < a.loss_history.size(); ++i)
        CHECK(a.loss_history[i] == b.loss_history[i]);
    for (std::size_t i = 0; i < a.final_params.size(); ++i)
        CHECK(a.final_params[i] == b.final_params[i]);
}

TEST_CASE("homogeneous-material cell training stays near zero") {
    // zero right-hand side: the exact minimizer is N == 0
    const auto micro = Microstructure::homogeneous(1.0);
    SamplingPlan plan;
    plan.n_interior = 2000;
    plan.seed = 6;
    plan.resample_each_epoch = true;
    TrainConfig cfg;
    cfg.epochs = 2000;
    ResidualNet net = init_params(10, 4, Activation::kTanh, 1);
    EnergyObjective obj = make_lower_cell_objective(net.arch, unit_square(), 1, micro, plan, {});
    const TrainRecord rec = train(net, obj, cfg);
    CHECK(std::abs(rec.loss_history.back()) <= 1e-4);
    const HardConstrainedNet hc{net, unit_square()};
    double max_abs = 0.0;
    for (int i = 0; i <= 100; ++i)
        for (int j = 0; j <= 100; ++j)
            max_abs = std::max(max_abs, std::abs(forward(hc, {i / 100.0, j / 100.0})));
    CHECK(max_abs <= 5e-3);
}
