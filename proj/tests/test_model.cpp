#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "mcc/checkpoint.hpp"
#include "mcc/model.hpp"
#include "support/oracles.hpp"

using namespace mcc;

namespace {

bool stacks_equal(const MlpParams& a, const MlpParams& b) {
    if (a.layers.size() != b.layers.size()) return false;
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        if (a.layers[l].act != b.layers[l].act) return false;
        if (a.layers[l].w != b.layers[l].w) return false;
        if (a.layers[l].b != b.layers[l].b) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("forward: identity layer") {
    MlpParams p;
    p.layers.push_back({{{1, 0}, {0, 1}}, {0, 0}, Activation::identity});
    CHECK(forward(p, {3.5, -2.0}) == Vec{3.5, -2.0});
}

TEST_CASE("forward: zero weights leave relu(bias)") {
    MlpParams p;
    p.layers.push_back({{{0, 0}, {0, 0}, {0, 0}}, {1.5, -0.5, 0.0}, Activation::relu});
    CHECK(forward(p, {7.0, -3.0}) == Vec{1.5, 0.0, 0.0});
}

TEST_CASE("forward: 2-3-2 stack hand arithmetic") {
    MlpParams p;
    p.layers.push_back({{{1, 2}, {-1, 0.5}, {0.25, -0.75}}, {0.1, -0.2, 0.3}, Activation::relu});
    p.layers.push_back({{{1, -1, 2}, {0.5, 0.25, -0.5}}, {0.0, 0.1}, Activation::identity});
    Vec out = forward(p, {1.0, 1.0});
    CHECK(out[0] == doctest::Approx(3.1).epsilon(1e-15));
    CHECK(out[1] == doctest::Approx(1.65).epsilon(1e-15));
    CHECK_THROWS_AS(forward(p, {1.0, 1.0, 1.0}), DimMismatch);
}

TEST_CASE("backward: zero upstream, linear layer closed form") {
    MlpParams p;
    p.layers.push_back({{{0.3, -0.2, 0.7}, {1.1, 0.4, -0.6}}, {0.0, 0.0}, Activation::identity});

    MlpGrad g = backward(p, {1, 2, 3}, {0, 0});
    for (const Vec& row : g.w[0]) {
        for (double x : row) CHECK(x == 0.0);
    }

    Vec dx;
    g = backward(p, {1, 2, 3}, {2, -1}, &dx);
    CHECK(g.w[0][0] == Vec{2, 4, 6});
    CHECK(g.w[0][1] == Vec{-1, -2, -3});
    CHECK(g.b[0] == Vec{2, -1});
    // dx = W^T upstream
    CHECK(dx[0] == doctest::Approx(0.3 * 2 + 1.1 * -1));
    CHECK(dx[1] == doctest::Approx(-0.2 * 2 + 0.4 * -1));
    CHECK(dx[2] == doctest::Approx(0.7 * 2 + -0.6 * -1));
}

TEST_CASE("backward matches finite differences on a relu stack") {
    Rng rng(211);
    MlpParams p = make_mlp({3, 4, 2}, {Activation::relu, Activation::identity}, rng);
    Vec x = {0.4, -0.9, 1.3};
    Vec upstream = {0.7, -1.2};
    MlpGrad g = backward(p, x, upstream);
    auto loss = [&] { return dot(upstream, forward(p, x)); };
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        for (std::size_t r = 0; r < p.layers[l].out_dim(); ++r) {
            for (std::size_t c = 0; c < p.layers[l].in_dim(); ++c) {
                double num = oracle::fd(loss, p.layers[l].w[r][c]);
                CHECK_MESSAGE(oracle::close(g.w[l][r][c], num, 1e-5, 1e-9),
                              "w " << l << "," << r << "," << c);
            }
            double num = oracle::fd(loss, p.layers[l].b[r]);
            CHECK_MESSAGE(oracle::close(g.b[l][r], num, 1e-5, 1e-9), "b " << l << "," << r);
        }
    }
}

TEST_CASE("augment") {
    Rng rng(223);
    Vec x = {1.0, -2.0, 3.0};

    SUBCASE("identity config leaves the input unchanged") {
        AugmentConfig cfg;  // sigma 0, mask 0, scale (1,1)
        CHECK(augment(x, cfg, rng) == x);
    }
    SUBCASE("degenerate scale range is a pure scaling") {
        AugmentConfig cfg;
        cfg.scale_lo = cfg.scale_hi = 2.0;
        CHECK(augment(x, cfg, rng) == Vec{2.0, -4.0, 6.0});
    }
    SUBCASE("same seed gives the same draw") {
        AugmentConfig cfg{0.5, 0.2, 0.8, 1.2};
        Rng r1(99), r2(99);
        CHECK(augment(x, cfg, r1) == augment(x, cfg, r2));
    }
    SUBCASE("invalid configs are rejected") {
        AugmentConfig bad;
        bad.mask_prob = 1.0;
        CHECK_THROWS_AS(augment(x, bad, rng), ValidationError);
        bad = AugmentConfig{};
        bad.scale_lo = 0.0;
        CHECK_THROWS_AS(augment(x, bad, rng), ValidationError);
    }
}

TEST_CASE("ema update") {
    Rng rng(227);
    MccModel model = make_mcc_model(2, 3, 1, 2, 2, rng);

    SUBCASE("boundary value m=0.99") {
        for (Layer& l : model.target.f.layers) {
            for (Vec& row : l.w) {
                for (double& v : row) v = 1.0;
            }
        }
        for (Layer& l : model.online.f.layers) {
            for (Vec& row : l.w) {
                for (double& v : row) v = 0.0;
            }
        }
        ema_update(model, EmaMomentum(0.99));
        CHECK(model.target.f.layers[0].w[0][0] == 0.99);
    }
    SUBCASE("equal parameters are an exact fixed point") {
        MccModel copy = model;
        ema_update(model, EmaMomentum(0.99));
        CHECK(stacks_equal(model.target.f, copy.target.f));
        CHECK(stacks_equal(model.target.g_i, copy.target.g_i));
        CHECK(stacks_equal(model.target.g_c, copy.target.g_c));
        CHECK(stacks_equal(model.online.f, copy.online.f));  // online untouched
    }
    SUBCASE("gap contracts geometrically") {
        model.target.f.layers[0].w[0][0] = 1.0;
        model.online.f.layers[0].w[0][0] = 0.0;
        double m = 0.5;
        for (int k = 1; k <= 20; ++k) {
            ema_update(model, EmaMomentum(m));
            CHECK(model.target.f.layers[0].w[0][0] == std::pow(m, k));
        }
    }
    SUBCASE("version counters reflect writes") {
        auto before = model.target.versions();
        ema_update(model, EmaMomentum(0.9));
        auto after = model.target.versions();
        CHECK(after[0] == before[0] + 1);
        CHECK(after[1] == before[1] + 1);
        CHECK(after[2] == before[2] + 1);
    }
}

TEST_CASE("train step: lr=0 leaves online parameters, target still moves") {
    Rng rng(229);
    MccModel model = make_mcc_model(2, 6, 1, 4, 3, rng);
    // Separate the branches so the EMA has a gap to close.
    model.target.f.layers[0].w[0][0] += 0.5;
    MccModel before = model;

    TrainConfig cfg;
    cfg.lr = 0.0;
    cfg.aug.noise_sigma = 0.3;
    ModelOptimizer opt(OptimKind::sgd);
    std::vector<Vec> batch = {{0.1, 0.2}, {-0.4, 0.9}, {1.2, -0.3}};
    Rng step_rng(7);
    mcc_train_step(model, batch, cfg, opt, step_rng);

    CHECK(stacks_equal(model.online.f, before.online.f));
    CHECK(stacks_equal(model.online.g_i, before.online.g_i));
    CHECK(stacks_equal(model.online.g_c, before.online.g_c));
    CHECK_FALSE(stacks_equal(model.target.f, before.target.f));
}

TEST_CASE("train step descends on a fixed batch") {
    Rng rng(233);
    MccModel model = make_mcc_model(2, 8, 1, 4, 3, rng);
    TrainConfig cfg;  // identity augmentation keeps the objective fixed
    cfg.lr = 1e-3;
    ModelOptimizer opt(OptimKind::sgd);
    std::vector<Vec> batch;
    Rng data_rng(17);
    for (int i = 0; i < 8; ++i) {
        batch.push_back({data_rng.normal(), data_rng.normal()});
    }
    Rng step_rng(23);
    double first = mcc_train_step(model, batch, cfg, opt, step_rng).loss;
    double second = mcc_train_step(model, batch, cfg, opt, step_rng).loss;
    CHECK(second < first);
}

TEST_CASE("instance-only step never touches the online cluster head") {
    Rng rng(239);
    MccModel model = make_mcc_model(2, 6, 1, 4, 3, rng);
    MccModel before = model;

    TrainConfig cfg;
    cfg.loss_mode = LossMode::instance_only;
    cfg.lr = 0.05;
    cfg.aug.noise_sigma = 0.2;
    ModelOptimizer opt(OptimKind::sgd);
    std::vector<Vec> batch = {{0.5, 0.5}, {-0.5, 0.2}, {0.9, -0.8}, {0.0, 1.1}};
    Rng step_rng(31);
    for (int s = 0; s < 3; ++s) mcc_train_step(model, batch, cfg, opt, step_rng);

    CHECK(stacks_equal(model.online.g_c, before.online.g_c));
    CHECK_FALSE(stacks_equal(model.online.f, before.online.f));
    CHECK_FALSE(stacks_equal(model.online.g_i, before.online.g_i));
}

TEST_CASE("cluster-only step keeps the encoder bit-frozen") {
    Rng rng(241);
    MccModel model = make_mcc_model(2, 6, 1, 4, 3, rng);
    MccModel before = model;  // target == online at construction

    TrainConfig cfg;
    cfg.loss_mode = LossMode::cluster_only;
    cfg.lr = 0.05;
    cfg.aug.noise_sigma = 0.2;
    ModelOptimizer opt(OptimKind::sgd);
    std::vector<Vec> batch = {{0.5, 0.5}, {-0.5, 0.2}, {0.9, -0.8}, {0.0, 1.1}};
    Rng step_rng(37);
    for (int s = 0; s < 3; ++s) mcc_train_step(model, batch, cfg, opt, step_rng);

    CHECK(stacks_equal(model.online.f, before.online.f));
    CHECK(stacks_equal(model.target.f, before.target.f));
    CHECK(stacks_equal(model.online.g_i, before.online.g_i));
    CHECK_FALSE(stacks_equal(model.online.g_c, before.online.g_c));
}

TEST_CASE("adam with zero learning rate is also a no-op on parameters") {
    Rng rng(251);
    MlpParams p = make_mlp({2, 3}, {Activation::identity}, rng);
    MlpParams before = p;
    MlpGrad g = zero_grad_like(p);
    g.w[0][0][0] = 1.25;
    StackOptimizer opt;
    opt.kind = OptimKind::adam;
    opt.apply(p, g, 0.0);
    CHECK(stacks_equal(p, before));
}

TEST_CASE("checkpoint round trip") {
    Rng rng(257);
    MccModel model = make_mcc_model(3, 5, 2, 4, 2, rng);
    // Make the branches differ so the round trip covers all six stacks.
    model.target.g_c.layers[0].b[1] = 0.123456789;

    std::vector<std::uint8_t> stack_bytes = serialize_stack(model.online.f);
    MlpParams back = deserialize_stack(stack_bytes);
    CHECK(stacks_equal(back, model.online.f));

    std::filesystem::path path =
        std::filesystem::temp_directory_path() / "mcc_ckpt_test.bin";
    save_checkpoint(model, path.string());
    MccModel loaded = load_checkpoint(path.string());
    CHECK(stacks_equal(loaded.online.f, model.online.f));
    CHECK(stacks_equal(loaded.online.g_i, model.online.g_i));
    CHECK(stacks_equal(loaded.online.g_c, model.online.g_c));
    CHECK(stacks_equal(loaded.target.f, model.target.f));
    CHECK(stacks_equal(loaded.target.g_i, model.target.g_i));
    CHECK(stacks_equal(loaded.target.g_c, model.target.g_c));
    std::filesystem::remove(path);

    std::vector<std::uint8_t> garbage = {1, 2, 3};
    CHECK_THROWS_AS(deserialize_model(garbage), IoError);
}

TEST_CASE("softmax sums to one and matches shift invariance") {
    Vec y = softmax({1.0, 2.0, 3.0});
    double sum = y[0] + y[1] + y[2];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
    Vec y2 = softmax({101.0, 102.0, 103.0});
    for (int i = 0; i < 3; ++i) CHECK(y[i] == doctest::Approx(y2[i]).epsilon(1e-12));
}
