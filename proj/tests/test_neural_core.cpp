#include <cmath>
#include <filesystem>

#include <doctest.h>

#include "dtrl/checkpoint.hpp"
#include "dtrl/gradcheck.hpp"
#include "dtrl/losses.hpp"
#include "dtrl/mlp.hpp"
#include "dtrl/optimizer.hpp"
#include "dtrl/rng.hpp"

using namespace dtrl;
using namespace dtrl::nn;

namespace {

const double kLn2 = std::log(2.0);

// Independent forward pass used as the oracle for mlp_forward: plain nested
// loops, no shared code with the implementation.
std::vector<double> naive_forward(const MLPSpec& spec, const ParamStore<double>& params,
                                  const std::string& prefix, const std::vector<double>& input) {
    std::vector<double> x = input;
    for (std::size_t layer = 0; layer < spec.layer_count(); ++layer) {
        const auto& w = params.at(weight_name(prefix, layer)).value;
        const auto& b = params.at(bias_name(prefix, layer)).value;
        std::vector<double> y(w.cols);
        for (std::size_t j = 0; j < w.cols; ++j) {
            double acc = b.data[j];
            for (std::size_t i = 0; i < w.rows; ++i) {
                acc += x[i] * w(i, j);
            }
            if (spec.activations[layer] == Activation::rectifier && acc < 0.0) {
                acc = 0.0;
            }
            if (spec.activations[layer] == Activation::logistic) {
                acc = 1.0 / (1.0 + std::exp(-acc));
            }
            y[j] = acc;
        }
        x = std::move(y);
    }
    return x;
}

}  // namespace

TEST_SUITE("neural_core") {

TEST_CASE("mlp_forward: zero weights and identity layer") {
    ParamStore<double> params;
    MLPSpec spec = MLPSpec::rectifier_stack({3, 2}, Activation::affine);
    params.add("net.w0", Mat<double>(3, 2));
    params.add("net.b0", Mat<double>(1, 2));
    Mat<double> input(4, 3);
    Rng rng(1);
    for (auto& v : input.data) {
        v = rng.uniform(-1, 1);
    }
    Mat<double> out = mlp_forward(spec, params, "net", input);
    for (double v : out.data) {
        CHECK(v == 0.0);
    }

    // identity-initialized square affine layer passes input through
    ParamStore<double> id_params;
    MLPSpec id_spec = MLPSpec::rectifier_stack({3, 3}, Activation::affine);
    Mat<double> eye(3, 3);
    for (std::size_t i = 0; i < 3; ++i) {
        eye(i, i) = 1.0;
    }
    id_params.add("net.w0", eye);
    id_params.add("net.b0", Mat<double>(1, 3));
    Mat<double> passthrough = mlp_forward(id_spec, id_params, "net", input);
    for (std::size_t i = 0; i < input.data.size(); ++i) {
        CHECK(passthrough.data[i] == doctest::Approx(input.data[i]).epsilon(1e-15));
    }
}

TEST_CASE("mlp_forward matches an independently coded forward pass") {
    MLPSpec spec = MLPSpec::rectifier_stack({2, 3, 1}, Activation::affine);
    ParamStore<double> params;
    Rng init(77);
    init_mlp_params(params, spec, "net", init);

    Mat<double> input(1, 2);
    input(0, 0) = 0.3;
    input(0, 1) = -1.2;
    const Mat<double> out = mlp_forward(spec, params, "net", input);
    const std::vector<double> oracle = naive_forward(spec, params, "net", {0.3, -1.2});
    REQUIRE(out.data.size() == oracle.size());
    CHECK(out.data[0] == doctest::Approx(oracle[0]).epsilon(1e-12));
}

TEST_CASE("mlp_forward rejects shape mismatch") {
    MLPSpec spec = MLPSpec::rectifier_stack({4, 2}, Activation::affine);
    ParamStore<double> params;
    Rng init(5);
    init_mlp_params(params, spec, "net", init);
    CHECK_THROWS_AS(mlp_forward(spec, params, "net", Mat<double>(2, 3)), DimensionError);
}

TEST_CASE("cross entropy: uniform and confident cases") {
    Mat<double> logits(2, 2);  // all-zero logits = uniform prediction
    auto uniform = cross_entropy_loss(logits, {0, 1});
    CHECK(uniform.loss == doctest::Approx(kLn2).epsilon(1e-12));

    Mat<double> confident(1, 2);
    confident(0, 0) = 30.0;
    confident(0, 1) = -30.0;
    CHECK(cross_entropy_loss(confident, {0}).loss < 1e-12);

    CHECK_THROWS_AS(cross_entropy_loss(logits, {0, 2}), ValidationError);
    CHECK_THROWS_AS(cross_entropy_loss(logits, {0}), DimensionError);
}

TEST_CASE("cross entropy gradient matches finite differences") {
    Rng rng(123);
    Mat<double> logits(5, 3);
    for (auto& v : logits.data) {
        v = rng.uniform(-2, 2);
    }
    const std::vector<int> labels = {0, 2, 1, 1, 0};
    auto loss = cross_entropy_loss(logits, labels);
    const double h = 1e-6;
    for (std::size_t i = 0; i < logits.data.size(); ++i) {
        const double saved = logits.data[i];
        logits.data[i] = saved + h;
        const double fp = cross_entropy_loss(logits, labels).loss;
        logits.data[i] = saved - h;
        const double fm = cross_entropy_loss(logits, labels).loss;
        logits.data[i] = saved;
        const double numeric = (fp - fm) / (2 * h);
        CHECK(loss.grad.data[i] == doctest::Approx(numeric).epsilon(1e-6));
    }
}

TEST_CASE("binary logistic loss: symmetry and saturation") {
    Mat<double> zero(1, 1);
    CHECK(binary_logistic_loss(zero, {0}).loss == doctest::Approx(kLn2).epsilon(1e-12));
    CHECK(binary_logistic_loss(zero, {1}).loss == doctest::Approx(kLn2).epsilon(1e-12));

    Mat<double> hot(1, 1);
    hot(0, 0) = 40.0;
    const double saturated = binary_logistic_loss(hot, {1}).loss;
    CHECK(saturated >= 0.0);
    CHECK(saturated < 1e-12);
    CHECK(std::isfinite(saturated));
}

TEST_CASE("losses stay finite at logit magnitude 1e4") {
    Mat<double> logits(1, 2);
    logits(0, 0) = 1e4;
    logits(0, 1) = -1e4;
    CHECK(std::isfinite(cross_entropy_loss(logits, {1}).loss));
    Mat<double> scores(2, 1);
    scores(0, 0) = 1e4;
    scores(1, 0) = -1e4;
    const auto loss = binary_logistic_loss(scores, {0, 1});
    CHECK(std::isfinite(loss.loss));
    for (double g : loss.grad.data) {
        CHECK(std::isfinite(g));
    }
}

TEST_CASE("binary logistic gradient matches finite differences") {
    Rng rng(321);
    Mat<double> scores(8, 1);
    std::vector<int> targets(8);
    for (std::size_t i = 0; i < 8; ++i) {
        scores.data[i] = rng.uniform(-3, 3);
        targets[i] = static_cast<int>(rng.index(2));
    }
    auto loss = binary_logistic_loss(scores, targets);
    const double h = 1e-6;
    for (std::size_t i = 0; i < scores.data.size(); ++i) {
        const double saved = scores.data[i];
        scores.data[i] = saved + h;
        const double fp = binary_logistic_loss(scores, targets).loss;
        scores.data[i] = saved - h;
        const double fm = binary_logistic_loss(scores, targets).loss;
        scores.data[i] = saved;
        CHECK(loss.grad.data[i] == doctest::Approx((fp - fm) / (2 * h)).epsilon(1e-6));
    }
}

TEST_CASE("adam first step moves a scalar by about lr") {
    ParamStore<double> params;
    Mat<double> value(1, 1);
    value(0, 0) = 1.0;
    params.add("w", value);
    params.at("w").grad(0, 0) = 1.0;
    OptimConfig config;
    config.kind = OptimKind::adam;
    config.lr = 0.1;
    optimizer_step(params, config);
    // bias-corrected first step: mhat = 1, vhat = 1 -> update = lr / (1 + eps)
    CHECK(params.at("w").value(0, 0) == doctest::Approx(1.0 - 0.1).epsilon(1e-6));
    CHECK(params.step_count == 1);
}

TEST_CASE("zero gradient: adam holds still, adamw decays") {
    OptimConfig adam;
    adam.kind = OptimKind::adam;
    adam.lr = 0.05;
    ParamStore<double> params;
    Mat<double> value(1, 2);
    value(0, 0) = 2.0;
    value(0, 1) = -3.0;
    params.add("w", value);
    optimizer_step(params, adam);
    CHECK(params.at("w").value(0, 0) == doctest::Approx(2.0));
    CHECK(params.at("w").value(0, 1) == doctest::Approx(-3.0));

    OptimConfig adamw;
    adamw.kind = OptimKind::adamw;
    adamw.lr = 0.05;
    adamw.weight_decay = 0.1;
    optimizer_step(params, adamw);
    CHECK(params.at("w").value(0, 0) == doctest::Approx(2.0 * (1.0 - 0.05 * 0.1)).epsilon(1e-12));
    CHECK(params.at("w").value(0, 1) == doctest::Approx(-3.0 * (1.0 - 0.05 * 0.1)).epsilon(1e-12));
}

TEST_CASE("adamw with zero decay equals adam") {
    auto run = [](OptimKind kind) {
        ParamStore<double> params;
        Mat<double> value(2, 2);
        Rng rng(9);
        for (auto& v : value.data) {
            v = rng.uniform(-1, 1);
        }
        params.add("w", value);
        OptimConfig config;
        config.kind = kind;
        config.lr = 0.01;
        config.weight_decay = 0.0;
        for (int step = 0; step < 5; ++step) {
            Rng grads(static_cast<std::uint64_t>(step));
            for (auto& g : params.at("w").grad.data) {
                g = grads.uniform(-1, 1);
            }
            optimizer_step(params, config);
        }
        return params.at("w").value.data;
    };
    const auto adam_values = run(OptimKind::adam);
    const auto adamw_values = run(OptimKind::adamw);
    for (std::size_t i = 0; i < adam_values.size(); ++i) {
        CHECK(adam_values[i] == doctest::Approx(adamw_values[i]).epsilon(1e-15));
    }
}

TEST_CASE("optimizer rejects non-positive lr") {
    ParamStore<double> params;
    params.add("w", Mat<double>(1, 1));
    OptimConfig config;
    config.lr = 0.0;
    CHECK_THROWS_AS(optimizer_step(params, config), ConfigError);
}

TEST_CASE("gradient_check: quadratic exactness, mlp accuracy, fault detection") {
    // linear model + squared loss: central differences are exact up to rounding
    {
        ParamStore<double> params;
        Mat<double> w(1, 3);
        w(0, 0) = 0.5;
        w(0, 1) = -1.0;
        w(0, 2) = 2.0;
        params.add("w", w);
        const std::vector<double> x = {1.0, 2.0, -1.0};
        auto loss_fn = [&x](ParamStore<double>& p, bool grads) {
            const auto& wv = p.at("w").value;
            double y = 0.0;
            for (std::size_t i = 0; i < 3; ++i) {
                y += wv.data[i] * x[i];
            }
            const double loss = 0.5 * y * y;
            if (grads) {
                for (std::size_t i = 0; i < 3; ++i) {
                    p.at("w").grad.data[i] += y * x[i];
                }
            }
            return loss;
        };
        Rng rng(3);
        CHECK(gradient_check(params, loss_fn, 30, rng).max_rel_error < 1e-9);
    }

    // 3-layer rectifier MLP + cross-entropy
    MLPSpec spec = MLPSpec::rectifier_stack({4, 8, 8, 3}, Activation::affine);
    ParamStore<double> params;
    Rng init(17);
    init_mlp_params(params, spec, "net", init);
    Mat<double> input(6, 4);
    Rng data_rng(18);
    for (auto& v : input.data) {
        v = data_rng.uniform(-1, 1);
    }
    std::vector<int> labels(6);
    for (auto& label : labels) {
        label = static_cast<int>(data_rng.index(3));
    }
    auto loss_fn = [&](ParamStore<double>& p, bool grads) {
        MLPCache<double> cache;
        Mat<double> logits = mlp_forward(spec, p, "net", input, &cache);
        auto loss = cross_entropy_loss(logits, labels);
        if (grads) {
            mlp_backward(spec, p, "net", cache, loss.grad);
        }
        return loss.loss;
    };
    Rng probe_rng(19);
    CHECK(gradient_check(params, loss_fn, 60, probe_rng).max_rel_error < 1e-4);

    // corrupted gradient must be detected
    auto corrupted_fn = [&](ParamStore<double>& p, bool grads) {
        const double loss = loss_fn(p, grads);
        if (grads) {
            for (auto& g : p.at("net.w1").grad.data) {
                g += 0.25;
            }
        }
        return loss;
    };
    Rng fault_rng(20);
    CHECK(gradient_check(params, corrupted_fn, 60, fault_rng).max_rel_error > 1e-2);
}

TEST_CASE("forward/backward determinism: bit-identical losses across runs") {
    auto run = [] {
        MLPSpec spec = MLPSpec::rectifier_stack({5, 7, 2}, Activation::affine);
        ParamStore<float> params;
        Rng init(55);
        init_mlp_params(params, spec, "net", init);
        Mat<float> input(3, 5);
        Rng data_rng(56);
        for (auto& v : input.data) {
            v = static_cast<float>(data_rng.uniform(-1, 1));
        }
        MLPCache<float> cache;
        Mat<float> logits = mlp_forward(spec, params, "net", input, &cache);
        auto loss = cross_entropy_loss(logits, {0, 1, 0});
        mlp_backward(spec, params, "net", cache, loss.grad);
        OptimConfig opt;
        opt.lr = 1e-3;
        optimizer_step(params, opt);
        return std::make_pair(loss.loss, params.at("net.w0").value.data);
    };
    const auto a = run();
    const auto b = run();
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
}

TEST_CASE("param store enforces unique names and prefix lookup") {
    ParamStore<float> params;
    params.add("a.w0", Mat<float>(1, 1));
    params.add("b.w0", Mat<float>(1, 1));
    CHECK_THROWS_AS(params.add("a.w0", Mat<float>(1, 1)), ValidationError);
    CHECK(params.names_with_prefix("a.").size() == 1);
    CHECK_THROWS_AS(params.at("missing"), ValidationError);
}

TEST_CASE("checkpoint round-trip and shape validation") {
    MLPSpec spec = MLPSpec::rectifier_stack({3, 4, 2}, Activation::affine);
    ParamStore<float> params;
    Rng init(91);
    init_mlp_params(params, spec, "net", init);
    const auto path = std::filesystem::temp_directory_path() / "dtrl_test_ckpt.bin";
    save_checkpoint(path.string(), params);

    ParamStore<float> restored;
    Rng other(92);
    init_mlp_params(restored, spec, "net", other);
    load_checkpoint(path.string(), restored);
    for (const auto& name : params.names()) {
        CHECK(params.at(name).value.data == restored.at(name).value.data);
    }

    ParamStore<float> wrong_shape;
    MLPSpec other_spec = MLPSpec::rectifier_stack({3, 5, 2}, Activation::affine);
    Rng third(93);
    init_mlp_params(wrong_shape, other_spec, "net", third);
    CHECK_THROWS_AS(load_checkpoint(path.string(), wrong_shape), ValidationError);
    std::filesystem::remove(path);
}

}  // TEST_SUITE
