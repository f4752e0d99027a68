#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "dynframe/train.hpp"
#include "dynframe/rng.hpp"

using namespace dynframe;

namespace {

ModelConfig tiny_model() {
    ModelConfig cfg;
    cfg.d = 16;
    cfg.heads = 4;
    cfg.blocks = 2;
    cfg.ffn_mult = 2;
    cfg.frame_method = FrameMethod::Max;
    cfg.sigma_lo = 0.5;
    cfg.sigma_hi = 2.0;
    cfg.sigma_init = 1.0;
    return cfg;
}

}  // namespace

TEST_CASE("learning rate schedule values") {
    CHECK(lr_schedule(5e-4, 0) == 5e-4);
    CHECK(lr_schedule(5e-4, 4000) == doctest::Approx(5e-4 / std::sqrt(2.0)).epsilon(1e-15));
    double prev = lr_schedule(5e-4, 0);
    for (int64_t t = 1; t < 100; ++t) {
        double cur = lr_schedule(5e-4, t * 37);
        CHECK(cur < prev);
        prev = cur;
    }
    // exact ratio contract
    for (int64_t t : {1, 10, 500, 12345})
        CHECK(lr_schedule(1.0, t) == std::sqrt(4000.0 / (4000.0 + double(t))));
}

TEST_CASE("mae loss and its subgradient convention") {
    CHECK(mae_loss({1.0, 2.0}, {1.0, 2.0}) == 0.0);
    CHECK(mae_loss({1.0, 3.0}, {2.0, 2.0}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(mae_loss({}, {}), DataError);
    CHECK_THROWS_AS(mae_loss({1.0}, {1.0, 2.0}), DataError);
}

TEST_CASE("adam with clipping and schedule solves a quadratic") {
    // single parameter, f(x) = (x - 3)^2, gradient 2(x - 3); at lr0 = 5e-4
    // the bias-corrected step is about lr per iteration, so the start must
    // sit within ~1 of the minimum for a 2000-step budget
    ModelParams p;
    p.add("x", Tensor::scalar(2.2));
    TrainConfig cfg;
    cfg.lr0 = 5e-4;
    cfg.weight_decay = 0.0;
    AdamState st;
    adam_init(st, p);
    for (int t = 0; t < 2000; ++t) {
        double x = double(p.at("x").data[0]);
        std::vector<Tensor> g = {Tensor::scalar(real(2.0 * (x - 3.0)))};
        adam_step(p, g, st, cfg);
    }
    CHECK(std::abs(double(p.at("x").data[0]) - 3.0) < 1e-3);
}

TEST_CASE("gradient clipping caps the global norm") {
    ModelParams p;
    p.add("a", Tensor::row({0.0, 0.0}));
    p.add("b", Tensor::scalar(0.0));
    TrainConfig cfg;
    cfg.lr0 = 1.0;
    cfg.weight_decay = 0.0;
    AdamState st;
    adam_init(st, p);
    std::vector<Tensor> g = {Tensor::row({30.0, 40.0}), Tensor::scalar(0.0)};
    adam_step(p, g, st, cfg);
    // post-clip norm 1: momentum m = 0.1 * g_clipped; |g_clipped| = 1
    double m0 = double(st.m[0].data[0]), m1 = double(st.m[0].data[1]);
    double norm = std::sqrt(m0 * m0 + m1 * m1) / 0.1;
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<Tensor> bad = {Tensor::row({1.0, std::nan("")}), Tensor::scalar(0.0)};
    CHECK_THROWS_AS(adam_step(p, bad, st, cfg), NumericError);
}

TEST_CASE("swa running average") {
    ModelParams p;
    p.add("w", Tensor::row({2.0, 4.0}));
    SwaState st;
    swa_update(st, p);
    swa_update(st, p);
    CHECK(double(st.avg[0].data[0]) == doctest::Approx(2.0));

    // two snapshots a, b -> (a + b) / 2
    SwaState st2;
    ModelParams pa;
    pa.add("w", Tensor::row({1.0, 10.0}));
    ModelParams pb;
    pb.add("w", Tensor::row({3.0, 20.0}));
    swa_update(st2, pa);
    swa_update(st2, pb);
    CHECK(double(st2.avg[0].data[0]) == doctest::Approx(2.0));
    CHECK(double(st2.avg[0].data[1]) == doctest::Approx(15.0));

    // incorporation order does not change the mean beyond roundoff
    Rng rng(3);
    std::vector<ModelParams> snaps;
    for (int k = 0; k < 7; ++k) {
        ModelParams q;
        q.add("w", Tensor::row({real(rng.uniform(-2, 2)), real(rng.uniform(-2, 2))}));
        snaps.push_back(q);
    }
    SwaState fwd, rev;
    for (size_t k = 0; k < snaps.size(); ++k) swa_update(fwd, snaps[k]);
    for (size_t k = snaps.size(); k-- > 0;) swa_update(rev, snaps[k]);
    CHECK(std::abs(double(fwd.avg[0].data[0] - rev.avg[0].data[0])) < 1e-12);
    CHECK(std::abs(double(fwd.avg[0].data[1] - rev.avg[0].data[1])) < 1e-12);
}

TEST_CASE("zero-epoch run returns an initialized model and empty log") {
    auto data = gen_synthetic(8, 21);
    ModelConfig mcfg = tiny_model();
    TrainConfig tcfg;
    tcfg.epochs = 0;
    tcfg.swa_epochs = 0;
    tcfg.batch_size = 4;
    tcfg.seed = 5;
    auto rep = train(data, mcfg, tcfg);
    CHECK(rep.epochs.empty());
    CHECK(rep.final_params.scalar_count() == init_params(mcfg, 5).scalar_count());
}

TEST_CASE("training is deterministic under a fixed seed") {
    auto data = gen_synthetic(12, 33);
    ModelConfig mcfg = tiny_model();
    TrainConfig tcfg;
    tcfg.epochs = 2;
    tcfg.swa_epochs = 1;
    tcfg.batch_size = 4;
    tcfg.seed = 17;
    auto a = train(data, mcfg, tcfg);
    auto b = train(data, mcfg, tcfg);
    REQUIRE(a.epochs.size() == b.epochs.size());
    for (size_t k = 0; k < a.epochs.size(); ++k) {
        CHECK(a.epochs[k].train_mae == b.epochs[k].train_mae);
        CHECK(a.epochs[k].val_mae == b.epochs[k].val_mae);
        CHECK(a.epochs[k].lr == b.epochs[k].lr);
    }
    for (size_t p = 0; p < a.final_params.items.size(); ++p)
        CHECK(a.final_params.items[p].second.data == b.final_params.items[p].second.data);
    for (size_t p = 0; p < a.swa_params.items.size(); ++p)
        CHECK(a.swa_params.items[p].second.data == b.swa_params.items[p].second.data);
}

TEST_CASE("a 32-structure overfit run reaches a tenth of the target spread") {
    auto data = gen_synthetic(32, 77);
    ModelConfig mcfg = tiny_model();
    mcfg.d = 32;
    mcfg.sigma_init = 1.0;
    TrainConfig tcfg;
    tcfg.epochs = 150;
    tcfg.batch_size = 8;
    tcfg.swa_epochs = 5;
    tcfg.seed = 4;
    tcfg.split_train = 1.0;
    tcfg.split_val = 0.0;
    tcfg.split_test = 0.0;
    auto rep = train(data, mcfg, tcfg);
    CHECK(rep.final_train_mae < 0.10 * rep.norm.stdev);
}

TEST_CASE("a tiny run reduces the training error") {
    auto data = gen_synthetic(32, 41);
    ModelConfig mcfg = tiny_model();
    TrainConfig tcfg;
    tcfg.epochs = 12;
    tcfg.swa_epochs = 2;
    tcfg.batch_size = 8;
    tcfg.seed = 2;
    tcfg.split_train = 1.0;
    tcfg.split_val = 0.0;
    tcfg.split_test = 0.0;
    auto rep = train(data, mcfg, tcfg);
    REQUIRE(rep.epochs.size() == 12);
    CHECK(rep.final_train_mae < rep.epochs.front().train_mae);
    CHECK(std::isfinite(rep.final_train_mae));
    CHECK(rep.norm.stdev > 0.0);
}
