#pragma once

#include <string>
#include <vector>

#include "dynframe/data.hpp"
#include "dynframe/model.hpp"

namespace dynframe {

struct TrainConfig {
    double lr0 = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.98;
    double weight_decay = 1e-5;
    double clip_norm = 1.0;
    int epochs = 10;
    int batch_size = 32;
    int swa_epochs = 5;
    int64_t max_steps = 0;  // 0 = no cap; otherwise stop mid-epoch at this step
    uint64_t seed = 0;
    double split_train = 0.8, split_val = 0.1, split_test = 0.1;

    void validate() const;
};

// warm-up-free inverse square root decay
double lr_schedule(double lr0, int64_t t);

double mae_loss(const std::vector<double>& predictions, const std::vector<double>& targets);

struct AdamState {
    std::vector<Tensor> m, v;
    int64_t t = 0;
};

void adam_init(AdamState& st, const ModelParams& params);

// global-norm clip, then AdamW moments with bias correction and decoupled
// weight decay, at the scheduled learning rate for step st.t
void adam_step(ModelParams& params, const std::vector<Tensor>& grads, AdamState& st,
               const TrainConfig& cfg);

struct SwaState {
    std::vector<Tensor> avg;
    int64_t count = 0;
};

void swa_update(SwaState& st, const ModelParams& params);

struct EpochLog {
    int epoch = 0;
    int64_t step = 0;
    double lr = 0.0;
    double train_mae = 0.0;  // physical units
    double val_mae = 0.0;
    double seconds = 0.0;
};

struct TrainReport {
    std::vector<EpochLog> epochs;
    double final_train_mae = 0.0;  // eval mode, final params, physical units
    double wall_seconds = 0.0;
    ModelParams final_params;
    ModelParams swa_params;
    Normalization norm;
    SplitIndices splits;
};

// Forward/backward for one batch: accumulates d(MAE)/d(params) into grads
// (one tensor per parameter, in params order) and returns the batch MAE in
// standardized units. Materials run in parallel; accumulation order is fixed.
double batch_backward(const std::vector<DatasetRecord>& data, const std::vector<int>& batch,
                      const ModelConfig& mcfg, const ModelParams& params,
                      const Normalization& norm, uint64_t seed, int64_t step,
                      std::vector<Tensor>& grads);

// eval-mode MAE in physical units over the given indices
double eval_mae(const std::vector<DatasetRecord>& data, const std::vector<int>& idx,
                const ModelConfig& mcfg, const ModelParams& params, const Normalization& norm);

TrainReport train(const std::vector<DatasetRecord>& data, const ModelConfig& mcfg,
                  const TrainConfig& tcfg);

}  // namespace dynframe
