// Timing harness: the OpenMP-parallel production paths against the serial
// reference implementations, plus thread scaling of batch prediction.
// Correctness of each pair is asserted before timing.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <omp.h>
#include <string>
#include <vector>

#include "dynframe/data.hpp"
#include "dynframe/model.hpp"
#include "dynframe/rng.hpp"
#include "oracles.hpp"

using namespace dynframe;

namespace {

double now() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

template <typename F>
double time_ms(F&& fn, int reps) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        double t0 = now();
        fn();
        best = std::min(best, now() - t0);
    }
    return 1e3 * best;
}

}  // namespace

int main(int argc, char** argv) {
    int nstruct = argc > 1 ? std::atoi(argv[1]) : 64;
    int reps = argc > 2 ? std::atoi(argv[2]) : 3;

    ModelConfig cfg;
    cfg.d = 32;
    cfg.heads = 4;
    cfg.blocks = 2;
    cfg.ffn_mult = 2;
    cfg.frame_method = FrameMethod::Max;
    cfg.sigma_lo = 0.5;
    cfg.sigma_hi = 2.0;
    cfg.sigma_init = 1.2;
    ModelParams params = init_params(cfg, 7);
    Normalization norm{0.0, 1.0};

    auto data = gen_synthetic(nstruct, 11);
    std::vector<CrystalStructure> structures;
    for (const auto& r : data) structures.push_back(r.structure());

    std::printf("benchmark: %d structures, d=%d heads=%d blocks=%d, %d processor%s, max %d threads\n",
                nstruct, cfg.d, cfg.heads, cfg.blocks, omp_get_num_procs(),
                omp_get_num_procs() == 1 ? "" : "s", omp_get_max_threads());

    // one attention block, production vs the naive serial oracle
    {
        Rng rng(3);
        Tensor x = Tensor::zeros({structures[0].natoms(), cfg.d});
        for (auto& v : x.data) v = real(rng.uniform(-1, 1));
        Tensor a = attention_block_states(structures[0], cfg, params, x, 0, RunMode::Eval, 0);
        Tensor b = oracle::attention(structures[0], cfg, params, x, 0, 3.5);
        double worst = 0;
        for (size_t k = 0; k < a.data.size(); ++k)
            worst = std::max(worst, std::abs(double(a.data[k] - b.data[k])));
        std::printf("block agreement (same radius): max abs diff %.3e\n", worst);
        if (worst > 1e-9) {
            std::fprintf(stderr, "benchmark aborted: block mismatch\n");
            return 1;
        }

        double prod = time_ms(
            [&] {
                for (const auto& s : structures)
                    (void)attention_block_states(s, cfg, params, x.rows() == s.natoms()
                                                                      ? x
                                                                      : Tensor::zeros({s.natoms(),
                                                                                       cfg.d}),
                                                 0, RunMode::Eval, 0);
            },
            reps);
        double ser = time_ms(
            [&] {
                for (const auto& s : structures)
                    (void)oracle::attention(s, cfg, params,
                                            x.rows() == s.natoms()
                                                ? x
                                                : Tensor::zeros({s.natoms(), cfg.d}),
                                            0, 3.5);
            },
            reps);
        std::printf("attention block x%d: production %8.2f ms | serial reference %8.2f ms\n",
                    nstruct, prod, ser);
    }

    // batch prediction thread scaling
    std::vector<double> preds(structures.size());
    auto run_batch = [&] {
#pragma omp parallel for schedule(dynamic)
        for (size_t k = 0; k < structures.size(); ++k)
            preds[k] = predict(structures[k], cfg, params, norm, RunMode::Eval, 0);
    };
    int maxt = omp_get_max_threads();
    double base_ms = 0;
    for (int t = 1; t <= maxt; t *= 2) {
        omp_set_num_threads(t);
        double ms = time_ms(run_batch, reps);
        if (t == 1) base_ms = ms;
        std::printf("predict batch x%d: %2d thread%s %8.2f ms  speedup %.2fx\n", nstruct, t,
                    t == 1 ? " " : "s", ms, base_ms / ms);
    }
    omp_set_num_threads(maxt);
    return 0;
}
