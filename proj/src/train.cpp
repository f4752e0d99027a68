#include "dynframe/train.hpp"

#include <chrono>
#include <cmath>
#include <omp.h>

#include "dynframe/rng.hpp"

namespace dynframe {

namespace {

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

}  // namespace

void TrainConfig::validate() const {
    if (lr0 <= 0 || beta1 <= 0 || beta2 <= 0 || beta1 >= 1 || beta2 >= 1)
        throw DataError("train config: invalid optimizer constants");
    if (weight_decay < 0 || clip_norm <= 0) throw DataError("train config: invalid decay/clip");
    if (epochs < 0 || batch_size < 1) throw DataError("train config: invalid epochs/batch");
    if (swa_epochs < 0 || swa_epochs > std::max(epochs, 0))
        throw DataError("train config: swa_epochs must not exceed epochs");
    SplitSpec sp{split_train, split_val, split_test, seed};
    sp.validate();
}

double lr_schedule(double lr0, int64_t t) {
    return lr0 * std::sqrt(4000.0 / (4000.0 + double(t)));
}

double mae_loss(const std::vector<double>& predictions, const std::vector<double>& targets) {
    if (predictions.empty() || predictions.size() != targets.size())
        throw DataError("mae_loss: empty or mismatched batch");
    double s = 0.0;
    for (size_t i = 0; i < predictions.size(); ++i) s += std::abs(predictions[i] - targets[i]);
    return s / double(predictions.size());
}

void adam_init(AdamState& st, const ModelParams& params) {
    st.m.clear();
    st.v.clear();
    for (const auto& [_, t] : params.items) {
        st.m.push_back(Tensor::zeros(t.shape));
        st.v.push_back(Tensor::zeros(t.shape));
    }
    st.t = 0;
}

void adam_step(ModelParams& params, const std::vector<Tensor>& grads, AdamState& st,
               const TrainConfig& cfg) {
    if (grads.size() != params.items.size()) throw NumericError("adam_step: gradient count mismatch");
    double sq = 0.0;
    for (size_t p = 0; p < grads.size(); ++p) {
        if (!grads[p].same_shape(params.items[p].second))
            throw NumericError("adam_step: gradient shape mismatch at " + params.items[p].first);
        for (real g : grads[p].data) {
            if (!std::isfinite(double(g)))
                throw NumericError("adam_step: non-finite gradient at " + params.items[p].first);
            sq += double(g) * double(g);
        }
    }
    double gnorm = std::sqrt(sq);
    double clip = (gnorm > cfg.clip_norm) ? cfg.clip_norm / gnorm : 1.0;

    double lr = lr_schedule(cfg.lr0, st.t);
    st.t += 1;
    double bc1 = 1.0 - std::pow(cfg.beta1, double(st.t));
    double bc2 = 1.0 - std::pow(cfg.beta2, double(st.t));
    for (size_t p = 0; p < grads.size(); ++p) {
        Tensor& w = params.items[p].second;
        Tensor& m = st.m[p];
        Tensor& v = st.v[p];
        for (size_t i = 0; i < w.data.size(); ++i) {
            double g = double(grads[p].data[i]) * clip;
            double mi = cfg.beta1 * double(m.data[i]) + (1.0 - cfg.beta1) * g;
            double vi = cfg.beta2 * double(v.data[i]) + (1.0 - cfg.beta2) * g * g;
            m.data[i] = real(mi);
            v.data[i] = real(vi);
            double update = (mi / bc1) / (std::sqrt(vi / bc2) + 1e-8);
            w.data[i] -= real(lr * update + lr * cfg.weight_decay * double(w.data[i]));
        }
    }
}

void swa_update(SwaState& st, const ModelParams& params) {
    if (st.avg.empty()) {
        for (const auto& [_, t] : params.items) st.avg.push_back(Tensor::zeros(t.shape));
    }
    if (st.avg.size() != params.items.size()) throw NumericError("swa_update: shape mismatch");
    st.count += 1;
    double inv = 1.0 / double(st.count);
    for (size_t p = 0; p < st.avg.size(); ++p) {
        if (!st.avg[p].same_shape(params.items[p].second))
            throw NumericError("swa_update: shape mismatch at " + params.items[p].first);
        for (size_t i = 0; i < st.avg[p].data.size(); ++i)
            st.avg[p].data[i] += real(inv * (double(params.items[p].second.data[i]) -
                                             double(st.avg[p].data[i])));
    }
}

double batch_backward(const std::vector<DatasetRecord>& data, const std::vector<int>& batch,
                      const ModelConfig& mcfg, const ModelParams& params,
                      const Normalization& norm, uint64_t seed, int64_t step,
                      std::vector<Tensor>& grads) {
    if (batch.empty()) throw DataError("batch_backward: empty batch");
    grads.clear();
    for (const auto& [_, t] : params.items) grads.push_back(Tensor::zeros(t.shape));

    const size_t B = batch.size();
    std::vector<std::vector<Tensor>> per_mat(B);
    std::vector<double> residual_sign(B, 0.0);
    std::vector<double> abs_err(B, 0.0);
    std::string error;

#pragma omp parallel for schedule(dynamic)
    for (size_t b = 0; b < B; ++b) {
        try {
            const DatasetRecord& rec = data[size_t(batch[b])];
            CrystalStructure s = rec.structure();
            uint64_t fseed = hash_mix(seed, hash_mix(uint64_t(step), uint64_t(batch[b])));
            ForwardBuild fb = build_forward(s, mcfg, params, RunMode::Train, fseed);
            double y = double(fb.graph.value(fb.y).data[0]);
            double t = (rec.target - norm.mean) / norm.stdev;
            double r = y - t;
            residual_sign[b] = (r > 0) - (r < 0);
            abs_err[b] = std::abs(r);
            fb.graph.backward(fb.y);
            auto g = fb.graph.input_gradients(params.names());
            per_mat[b].reserve(params.items.size());
            for (const auto& [name, _] : params.items) per_mat[b].push_back(g.at(name));
        } catch (const std::exception& e) {
#pragma omp critical
            if (error.empty()) error = e.what();
        }
    }
    if (!error.empty()) throw NumericError("batch_backward: " + error);

    // fixed accumulation order keeps training bit-deterministic across thread counts
    double mae = 0.0;
    for (size_t b = 0; b < B; ++b) {
        mae += abs_err[b] / double(B);
        real scale = real(residual_sign[b] / double(B));
        if (scale == real(0)) continue;
        for (size_t p = 0; p < grads.size(); ++p)
            for (size_t i = 0; i < grads[p].data.size(); ++i)
                grads[p].data[i] += scale * per_mat[b][p].data[i];
    }
    return mae;
}

double eval_mae(const std::vector<DatasetRecord>& data, const std::vector<int>& idx,
                const ModelConfig& mcfg, const ModelParams& params, const Normalization& norm) {
    if (idx.empty()) return 0.0;
    std::vector<double> preds(idx.size()), tgts(idx.size());
    std::string error;
#pragma omp parallel for schedule(dynamic)
    for (size_t k = 0; k < idx.size(); ++k) {
        try {
            const DatasetRecord& rec = data[size_t(idx[k])];
            preds[k] = predict(rec.structure(), mcfg, params, norm, RunMode::Eval, 0);
            tgts[k] = rec.target;
        } catch (const std::exception& e) {
#pragma omp critical
            if (error.empty()) error = e.what();
        }
    }
    if (!error.empty()) throw NumericError("eval_mae: " + error);
    return mae_loss(preds, tgts);
}

TrainReport train(const std::vector<DatasetRecord>& data, const ModelConfig& mcfg,
                  const TrainConfig& tcfg) {
    tcfg.validate();
    mcfg.validate();
    if (data.empty()) throw DataError("train: empty dataset");

    TrainReport rep;
    rep.splits = split(data.size(), SplitSpec{tcfg.split_train, tcfg.split_val, tcfg.split_test,
                                              tcfg.seed});
    if (rep.splits.train.empty()) throw DataError("train: empty train split");

    double mean = 0.0;
    for (int i : rep.splits.train) mean += data[size_t(i)].target;
    mean /= double(rep.splits.train.size());
    double var = 0.0;
    for (int i : rep.splits.train) {
        double d = data[size_t(i)].target - mean;
        var += d * d;
    }
    double stdev = std::sqrt(var / double(rep.splits.train.size()));
    rep.norm = {mean, std::max(stdev, 1e-12)};

    ModelParams params = init_params(mcfg, tcfg.seed);
    AdamState adam;
    adam_init(adam, params);
    SwaState swa;

    double t0 = now_seconds();
    int64_t step = 0;
    std::vector<int> order = rep.splits.train;
    for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
        double et0 = now_seconds();
        Rng shuffle_rng(hash_mix(tcfg.seed, uint64_t(epoch) + 1));
        shuffle_rng.shuffle(order);

        double train_mae_std = 0.0;
        int nbatches = 0;
        for (size_t off = 0; off < order.size(); off += size_t(tcfg.batch_size)) {
            if (tcfg.max_steps > 0 && step >= tcfg.max_steps) break;
            std::vector<int> batch(order.begin() + off,
                                   order.begin() +
                                       std::min(off + size_t(tcfg.batch_size), order.size()));
            std::vector<Tensor> grads;
            double mae = batch_backward(data, batch, mcfg, params, rep.norm, tcfg.seed, step,
                                        grads);
            if (!std::isfinite(mae))
                throw NumericError("train: diverged at epoch " + std::to_string(epoch) +
                                   " step " + std::to_string(step));
            adam_step(params, grads, adam, tcfg);
            train_mae_std += mae;
            ++nbatches;
            ++step;
        }
        if (epoch >= tcfg.epochs - tcfg.swa_epochs) swa_update(swa, params);
        bool capped = tcfg.max_steps > 0 && step >= tcfg.max_steps;

        EpochLog log;
        log.epoch = epoch;
        log.step = step;
        log.lr = lr_schedule(tcfg.lr0, step > 0 ? step - 1 : 0);
        log.train_mae = (nbatches > 0 ? train_mae_std / nbatches : 0.0) * rep.norm.stdev;
        log.val_mae = eval_mae(data, rep.splits.val, mcfg, params, rep.norm);
        log.seconds = now_seconds() - et0;
        rep.epochs.push_back(log);
        if (capped) break;
    }

    rep.final_params = params;
    if (swa.count > 0) {
        rep.swa_params = params;
        for (size_t p = 0; p < swa.avg.size(); ++p)
            rep.swa_params.items[p].second = swa.avg[p];
    } else {
        rep.swa_params = params;
    }
    rep.final_train_mae = eval_mae(data, rep.splits.train, mcfg, params, rep.norm);
    rep.wall_seconds = now_seconds() - t0;
    return rep;
}

}  // namespace dynframe
