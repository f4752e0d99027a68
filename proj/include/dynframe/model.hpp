#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dynframe/edge_features.hpp"
#include "dynframe/graph.hpp"

namespace dynframe {

enum class RunMode { Train, Eval };

struct ModelConfig {
    int d = 64;
    int heads = 8;
    int blocks = 4;
    int ffn_mult = 4;
    FrameMethod frame_method = FrameMethod::Max;
    PosEncodingConfig pos = default_pos_config();
    double sigma_lo = 0.5;   // angstrom, bounds of the attention decay length
    double sigma_hi = 7.0;
    double sigma_init = 1.2;
    int species_max = kMaxSpecies;
    bool corrupt_frames = false;  // test hook: skews frames to trip the checker

    int dk() const { return d / heads; }
    void validate() const;
};

// normalization of regression targets; stored with the checkpoint so
// predictions come back in physical units
struct Normalization {
    double mean = 0.0;
    double stdev = 1.0;
};

// Ordered named parameter store. Iteration order is fixed, which keeps the
// optimizer, clipping, and serialization deterministic.
struct ModelParams {
    std::vector<std::pair<std::string, Tensor>> items;

    void add(const std::string& name, Tensor t);
    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;
    bool has(const std::string& name) const;
    int64_t scalar_count() const;
    std::vector<std::string> names() const;
};

ModelParams init_params(const ModelConfig& cfg, uint64_t seed);

struct TraceImage {
    int j = 0;
    std::array<int, 3> n{0, 0, 0};
    double r = 0.0;
    double weight = 0.0;
};

struct TraceRecord {
    int layer = 0, head = 0, atom = 0;
    double sigma = 0.0;
    double z = 0.0;           // attention normalizer
    double weight_sum = 0.0;  // softmax total, 1 up to roundoff
    Frame frame;
    std::vector<TraceImage> top_images;
};

struct AttentionTrace {
    std::vector<TraceRecord> records;
};

// One taped forward pass. Parameters are graph inputs (trainable); geometry
// is constant; frame-derived angular bases are inputs wrapped in
// stop_gradient, so frames shape the forward value but never receive or
// pass gradients.
struct ForwardBuild {
    Graph graph;
    NodeId y = -1;       // standardized scalar output
    NodeId pooled = -1;  // [1, d]
    std::vector<std::string> frame_inputs;
    AttentionTrace trace;
};

ForwardBuild build_forward(const CrystalStructure& s, const ModelConfig& cfg,
                           const ModelParams& params, RunMode mode, uint64_t frame_seed,
                           const Frame* fixed_frame = nullptr, double radius_mult = 3.5,
                           bool want_trace = false);

// pooled final-layer state (mean over unit-cell atoms); PCA frames in eval
// mode average over the four sign frames
std::vector<real> encode(const CrystalStructure& s, const ModelConfig& cfg,
                         const ModelParams& params, RunMode mode, uint64_t seed);

// scalar property in physical units
double predict(const CrystalStructure& s, const ModelConfig& cfg, const ModelParams& params,
               const Normalization& norm, RunMode mode, uint64_t seed);

AttentionTrace dump_trace(const CrystalStructure& s, const ModelConfig& cfg,
                          const ModelParams& params, uint64_t seed);

// single attention block applied to explicit states; the oracle suite
// compares against this
Tensor attention_block_states(const CrystalStructure& s, const ModelConfig& cfg,
                              const ModelParams& params, const Tensor& x, int layer,
                              RunMode mode, uint64_t seed, double radius_mult = 3.5);

// checkpoint container (versioned binary, bit-exact round trip)
void save_checkpoint(const std::string& path, const ModelConfig& cfg, const ModelParams& params,
                     const Normalization& norm, int64_t step);
void load_checkpoint(const std::string& path, ModelConfig& cfg, ModelParams& params,
                     Normalization& norm, int64_t& step);

}  // namespace dynframe
