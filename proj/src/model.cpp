#include "dynframe/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <omp.h>

#include "dynframe/rng.hpp"
#include "json.hpp"

namespace dynframe {

namespace {

constexpr size_t kMaxEdgesPerSite = 150000;
constexpr int kTraceTopImages = 8;

// one-hot rows, or occupancy rows for sites with a species distribution
Tensor species_matrix(const CrystalStructure& s, int smax) {
    Tensor m = Tensor::zeros({s.natoms(), smax});
    for (int i = 0; i < s.natoms(); ++i) {
        if (!s.occupancies.empty()) {
            for (const auto& [sp, p] : s.occupancies[i].probs) {
                if (sp > smax) throw DataError("species " + std::to_string(sp) + " beyond table");
                m.at(i, sp - 1) = static_cast<real>(p);
            }
        } else {
            if (s.species[i] > smax)
                throw DataError("species " + std::to_string(s.species[i]) + " beyond table");
            m.at(i, s.species[i] - 1) = real(1);
        }
    }
    return m;
}

struct EdgeSet {
    std::vector<PeriodicImage> images;
    std::vector<int64_t> jmap;
    Tensor rsq_half;  // [1,E]
    Tensor bd;        // [E, D_dist]
    Tensor ba;        // [E, 3*D_angl]
    Frame frame;
    NodeId logits = -1;
    NodeId alpha = -1;
};

struct BlockCtx {
    const CrystalStructure* st = nullptr;  // wrapped
    const ModelConfig* cfg = nullptr;
    RunMode mode = RunMode::Eval;
    uint64_t seed = 0;
    const Frame* fixed = nullptr;
    double radius_mult = 3.5;
    AttentionTrace* trace = nullptr;
    std::vector<std::string>* frame_inputs = nullptr;
    Graph* g = nullptr;
    const std::map<std::string, NodeId>* pid = nullptr;
};

NodeId pnode(const BlockCtx& ctx, const std::string& name) {
    auto it = ctx.pid->find(name);
    if (it == ctx.pid->end()) throw NumericError("parameter missing: " + name);
    return it->second;
}

Frame identity_frame(FrameMethod kind) {
    Frame f;
    f.rows = {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
    f.kind = kind;
    f.fallback = true;
    return f;
}

Frame build_site_frame(const EdgeSet& e, const std::vector<double>& weights, int layer, int head,
                       int atom, const BlockCtx& ctx) {
    const ModelConfig& cfg = *ctx.cfg;
    if (ctx.fixed) return *ctx.fixed;
    WeightedNeighborhood nbhd = make_neighborhood(e.images, weights);
    if (nbhd.empty()) return identity_frame(cfg.frame_method);  // self-only site
    FrameRng rng(ctx.seed, ctx.mode == RunMode::Train);
    rng = rng.scoped(uint64_t(layer), uint64_t(head), uint64_t(atom));
    switch (cfg.frame_method) {
        case FrameMethod::StaticLocal: return static_local_frame(e.images);
        case FrameMethod::WeightedPca: return weighted_pca_frame(nbhd, rng);
        case FrameMethod::Max: return max_frame(nbhd, rng);
        default: throw NumericError("build_site_frame: unexpected frame method");
    }
}

void fill_trace_record(TraceRecord& rec, const EdgeSet& e, const Graph& g, double sigma,
                       int layer, int head, int atom) {
    rec.layer = layer;
    rec.head = head;
    rec.atom = atom;
    rec.sigma = sigma;
    rec.frame = e.frame;
    const Tensor& lg = g.value(e.logits);
    const Tensor& al = g.value(e.alpha);
    double z = 0.0;
    double wsum = 0.0;
    for (size_t k = 0; k < lg.data.size(); ++k) {
        z += std::exp(static_cast<double>(lg.data[k]));
        wsum += static_cast<double>(al.data[k]);
    }
    rec.z = z;
    rec.weight_sum = wsum;
    std::vector<size_t> order(al.data.size());
    for (size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (al.data[a] != al.data[b]) return al.data[a] > al.data[b];
        return a < b;
    });
    rec.top_images.clear();
    for (size_t k = 0; k < order.size() && k < kTraceTopImages; ++k) {
        const PeriodicImage& im = e.images[order[k]];
        rec.top_images.push_back({im.j, im.n, im.r, static_cast<double>(al.data[order[k]])});
    }
}

NodeId attention_block(NodeId x, int layer, BlockCtx& ctx) {
    Graph& g = *ctx.g;
    const ModelConfig& cfg = *ctx.cfg;
    const CrystalStructure& st = *ctx.st;
    const int N = st.natoms();
    const int H = cfg.heads;
    const int dk = cfg.dk();
    const bool angular = cfg.frame_method != FrameMethod::None;
    const int dd = cfg.pos.dist.d;
    const int da = cfg.pos.angl.d;
    const std::string bp = "b" + std::to_string(layer) + ".";

    NodeId q = g.matmul(x, pnode(ctx, bp + "wq"));
    NodeId k = g.matmul(x, pnode(ctx, bp + "wk"));
    NodeId v = g.matmul(x, pnode(ctx, bp + "wv"));
    NodeId u = g.add(g.matmul(x, pnode(ctx, bp + "wsig")), pnode(ctx, bp + "bsig"));
    NodeId sig = g.scale_shift(g.sigmoid(u), cfg.sigma_hi - cfg.sigma_lo, cfg.sigma_lo);

    std::vector<NodeId> qh(H), kh(H), vh(H), sh(H), w0h(H), wah(3 * H);
    for (int h = 0; h < H; ++h) {
        qh[h] = g.slice_cols(q, int64_t(h) * dk, dk);
        kh[h] = g.slice_cols(k, int64_t(h) * dk, dk);
        vh[h] = g.slice_cols(v, int64_t(h) * dk, dk);
        sh[h] = g.matmul(qh[h], g.transpose(kh[h]));
        w0h[h] = g.slice_cols(pnode(ctx, bp + "w0"), int64_t(h) * dk, dk);
        if (angular)
            for (int a = 0; a < 3; ++a)
                wah[3 * h + a] =
                    g.slice_cols(pnode(ctx, bp + "w" + std::to_string(a + 1)), int64_t(h) * dk, dk);
    }

    Tensor sigval = g.value(sig);

    // geometry kernels: enumeration and distance bases, independent per site
    std::vector<EdgeSet> es(size_t(N) * H);
    std::string phase_error;
#pragma omp parallel for collapse(2) schedule(dynamic)
    for (int i = 0; i < N; ++i)
        for (int h = 0; h < H; ++h) {
            try {
                EdgeSet& e = es[size_t(i) * H + h];
                double radius = ctx.radius_mult * static_cast<double>(sigval.at(i, h));
                e.images = enumerate_images(st, i, radius);
                if (e.images.size() > kMaxEdgesPerSite)
                    throw NumericError("attention: image count exceeds cap at atom " +
                                       std::to_string(i));
                int64_t E = static_cast<int64_t>(e.images.size());
                e.jmap.resize(e.images.size());
                e.rsq_half = Tensor::zeros({1, E});
                e.bd = Tensor::zeros({E, dd});
                for (int64_t t = 0; t < E; ++t) {
                    const PeriodicImage& im = e.images[size_t(t)];
                    e.jmap[size_t(t)] = im.j;
                    e.rsq_half.data[size_t(t)] = static_cast<real>(0.5 * im.r * im.r);
                    auto b = gbf(im.r, cfg.pos.dist);
                    for (int c = 0; c < dd; ++c) e.bd.at(t, c) = static_cast<real>(b[size_t(c)]);
                }
            } catch (const std::exception& ex) {
#pragma omp critical
                if (phase_error.empty())
                    phase_error = std::string(ex.what()) + " (layer " + std::to_string(layer) + ")";
            }
        }
    if (!phase_error.empty()) throw NumericError(phase_error);

    // attention logits and softmax weights, taped
    std::vector<NodeId> sigrow(N);
    for (int i = 0; i < N; ++i) sigrow[i] = g.gather_rows(sig, {i});
    for (int i = 0; i < N; ++i)
        for (int h = 0; h < H; ++h) {
            EdgeSet& e = es[size_t(i) * H + h];
            NodeId srow = g.gather_rows(sh[h], {i});
            NodeId qk = g.gather(srow, e.jmap);
            NodeId s_ih = g.slice_cols(sigrow[i], h, 1);
            NodeId s2 = g.mul(s_ih, s_ih);
            NodeId decay = g.div(g.constant(e.rsq_half), s2);
            e.logits = g.sub(g.scale_shift(qk, 1.0 / std::sqrt(double(dk)), 0.0), decay);
            e.alpha = g.softmax(e.logits);
        }

    // frames from the softmax weight values, then angular bases
    if (angular || ctx.trace) {
#pragma omp parallel for collapse(2) schedule(dynamic)
        for (int i = 0; i < N; ++i)
            for (int h = 0; h < H; ++h) {
                try {
                    EdgeSet& e = es[size_t(i) * H + h];
                    const Tensor& al = g.value(e.alpha);
                    std::vector<double> w(al.data.size());
                    for (size_t t = 0; t < w.size(); ++t) w[t] = static_cast<double>(al.data[t]);
                    if (angular) {
                        e.frame = build_site_frame(e, w, layer, h, i, ctx);
                        if (cfg.corrupt_frames) e.frame.rows[0] = 1.25 * e.frame.rows[0];
                        int64_t E = static_cast<int64_t>(e.images.size());
                        e.ba = Tensor::zeros({E, 3 * da});
                        for (int64_t t = 0; t < E; ++t) {
                            Vec3 th = project_angles(e.frame, e.images[size_t(t)].dir);
                            for (int a = 0; a < 3; ++a) {
                                auto b = gbf(th[a], cfg.pos.angl);
                                for (int c = 0; c < da; ++c)
                                    e.ba.at(t, int64_t(a) * da + c) = static_cast<real>(b[size_t(c)]);
                            }
                        }
                    } else {
                        e.frame = identity_frame(FrameMethod::None);
                    }
                    if (ctx.trace) {
                        size_t base = size_t(layer) * N * H;
                        fill_trace_record(ctx.trace->records[base + size_t(h) * N + i], e, g,
                                          static_cast<double>(sigval.at(i, h)), layer, h, i);
                    }
                } catch (const std::exception& ex) {
#pragma omp critical
                    if (phase_error.empty())
                        phase_error =
                            std::string(ex.what()) + " (layer " + std::to_string(layer) + ")";
                }
            }
        if (!phase_error.empty()) throw NumericError(phase_error);
    }

    // aggregation: sum_j (sum_n alpha) v_j plus the psi contraction
    const double lam = cfg.pos.lambda;
    std::vector<NodeId> site_out(size_t(N) * H);
    for (int i = 0; i < N; ++i)
        for (int h = 0; h < H; ++h) {
            EdgeSet& e = es[size_t(i) * H + h];
            NodeId aj = g.segment_sum(e.alpha, e.jmap, N);
            NodeId ov = g.matmul(aj, vh[h]);
            NodeId aggd = g.matmul(e.alpha, g.constant(e.bd));
            NodeId psi = g.scale_shift(g.matmul(aggd, w0h[h]), lam * cfg.pos.c_dist, 0.0);
            if (angular) {
                std::string name = "frame_basis.l" + std::to_string(layer) + ".h" +
                                   std::to_string(h) + ".a" + std::to_string(i);
                NodeId bain = g.input(name, e.ba, true);
                if (ctx.frame_inputs) ctx.frame_inputs->push_back(name);
                NodeId bas = g.stop_gradient(bain);
                NodeId agga = g.matmul(e.alpha, bas);
                NodeId pa = -1;
                for (int a = 0; a < 3; ++a) {
                    NodeId part = g.matmul(g.slice_cols(agga, int64_t(a) * da, da), wah[3 * h + a]);
                    pa = (a == 0) ? part : g.add(pa, part);
                }
                psi = g.add(psi, g.scale_shift(pa, lam * cfg.pos.c_angl, 0.0));
            }
            site_out[size_t(i) * H + h] = g.add(ov, psi);
        }

    std::vector<NodeId> rows(N);
    for (int i = 0; i < N; ++i) {
        std::vector<NodeId> heads;
        heads.reserve(size_t(H));
        for (int h = 0; h < H; ++h) heads.push_back(site_out[size_t(i) * H + h]);
        rows[size_t(i)] = (H == 1) ? heads[0] : g.concat(heads, 1);
    }
    NodeId attn_cat = (N == 1) ? rows[0] : g.concat(rows, 0);
    NodeId attn = g.add(g.matmul(attn_cat, pnode(ctx, bp + "wo")), pnode(ctx, bp + "bo"));
    NodeId x1 = g.add(x, attn);
    NodeId hidden = g.gelu(g.add(g.matmul(x1, pnode(ctx, bp + "f1")), pnode(ctx, bp + "fb1")));
    NodeId ff = g.add(g.matmul(hidden, pnode(ctx, bp + "f2")), pnode(ctx, bp + "fb2"));
    return g.add(x1, ff);
}

}  // namespace

void ModelConfig::validate() const {
    if (d < 1 || heads < 1 || blocks < 1 || ffn_mult < 1)
        throw DataError("model config: dimensions must be positive");
    if (d % heads != 0) throw DataError("model config: d must be divisible by heads");
    if (!(sigma_lo > 0.0) || !(sigma_hi > sigma_lo))
        throw DataError("model config: need 0 < sigma_lo < sigma_hi");
    if (species_max < 1 || species_max > kMaxSpecies)
        throw DataError("model config: species_max out of range");
    pos.validate();
}

void ModelParams::add(const std::string& name, Tensor t) {
    items.emplace_back(name, std::move(t));
}

Tensor& ModelParams::at(const std::string& name) {
    for (auto& [n, t] : items)
        if (n == name) return t;
    throw NumericError("parameter not found: " + name);
}

const Tensor& ModelParams::at(const std::string& name) const {
    for (const auto& [n, t] : items)
        if (n == name) return t;
    throw NumericError("parameter not found: " + name);
}

bool ModelParams::has(const std::string& name) const {
    for (const auto& [n, t] : items)
        if (n == name) return true;
    return false;
}

int64_t ModelParams::scalar_count() const {
    int64_t n = 0;
    for (const auto& [_, t] : items) n += t.numel();
    return n;
}

std::vector<std::string> ModelParams::names() const {
    std::vector<std::string> out;
    for (const auto& [n, _] : items) out.push_back(n);
    return out;
}

ModelParams init_params(const ModelConfig& cfg, uint64_t seed) {
    cfg.validate();
    Rng rng(seed);
    auto xavier = [&rng](int64_t fin, int64_t fout, double gain) {
        double lim = gain * std::sqrt(6.0 / double(fin + fout));
        Tensor t = Tensor::zeros({fin, fout});
        for (auto& x : t.data) x = static_cast<real>(rng.uniform(-lim, lim));
        return t;
    };
    const double resid = 1.0 / std::sqrt(2.0 * cfg.blocks);  // residual-branch init scale
    const int64_t d = cfg.d, H = cfg.heads, m = cfg.ffn_mult;

    ModelParams p;
    Tensor embed = Tensor::zeros({cfg.species_max, d});
    double es = 1.0 / std::sqrt(double(d));
    for (auto& x : embed.data) x = static_cast<real>(es * rng.normal());
    p.add("embed", embed);

    double si = std::min(std::max(cfg.sigma_init, cfg.sigma_lo + 1e-3), cfg.sigma_hi - 1e-3);
    double frac = (si - cfg.sigma_lo) / (cfg.sigma_hi - cfg.sigma_lo);
    double bias = std::log(frac / (1.0 - frac));

    for (int l = 0; l < cfg.blocks; ++l) {
        std::string bp = "b" + std::to_string(l) + ".";
        p.add(bp + "wq", xavier(d, d, 1.0));
        p.add(bp + "wk", xavier(d, d, 1.0));
        p.add(bp + "wv", xavier(d, d, 1.0));
        p.add(bp + "wo", xavier(d, d, resid));
        p.add(bp + "bo", Tensor::zeros({1, d}));
        Tensor wsig = Tensor::zeros({d, H});
        for (auto& x : wsig.data) x = static_cast<real>(rng.uniform(-0.2, 0.2));
        p.add(bp + "wsig", wsig);
        p.add(bp + "bsig", Tensor::full({1, H}, static_cast<real>(bias)));
        p.add(bp + "w0", xavier(cfg.pos.dist.d, d, 1.0));
        p.add(bp + "w1", xavier(cfg.pos.angl.d, d, 1.0));
        p.add(bp + "w2", xavier(cfg.pos.angl.d, d, 1.0));
        p.add(bp + "w3", xavier(cfg.pos.angl.d, d, 1.0));
        p.add(bp + "f1", xavier(d, m * d, 1.0));
        p.add(bp + "fb1", Tensor::zeros({1, m * d}));
        p.add(bp + "f2", xavier(m * d, d, resid));
        p.add(bp + "fb2", Tensor::zeros({1, d}));
    }
    p.add("head.w1", xavier(d, d, 1.0));
    p.add("head.b1", Tensor::zeros({1, d}));
    p.add("head.w2", xavier(d, 1, 1.0));
    p.add("head.b2", Tensor::zeros({1, 1}));
    return p;
}

ForwardBuild build_forward(const CrystalStructure& s, const ModelConfig& cfg,
                           const ModelParams& params, RunMode mode, uint64_t frame_seed,
                           const Frame* fixed_frame, double radius_mult, bool want_trace) {
    cfg.validate();
    s.validate();
    CrystalStructure w = wrap_to_cell(s);
    const int N = w.natoms();

    // whole-structure frame methods resolve here when the caller did not
    // supply one; eval-mode PCA needs explicit averaging (predict/encode)
    Frame resolved;
    if (!fixed_frame && cfg.frame_method == FrameMethod::Lattice) {
        resolved = lattice_frame(w.lattice);
        fixed_frame = &resolved;
    } else if (!fixed_frame && cfg.frame_method == FrameMethod::Pca) {
        if (mode == RunMode::Eval)
            throw NumericError("pca frames in eval mode require frame averaging via predict/encode");
        FrameRng rng(frame_seed, true);
        auto frames = pca_frames(w.positions, rng.scoped(0x9ca, 0, 0));
        size_t pick = size_t(KeyedRng(frame_seed).uniform(0x9cb, 0, 0, 0) * 4.0) % 4;
        resolved = frames[pick];
        fixed_frame = &resolved;
    }

    ForwardBuild out;
    Graph& g = out.graph;
    std::map<std::string, NodeId> pid;
    for (const auto& [name, t] : params.items) pid[name] = g.input(name, t, true);

    if (want_trace)
        out.trace.records.resize(size_t(cfg.blocks) * N * cfg.heads);

    BlockCtx ctx;
    ctx.st = &w;
    ctx.cfg = &cfg;
    ctx.mode = mode;
    ctx.seed = frame_seed;
    ctx.fixed = fixed_frame;
    ctx.radius_mult = radius_mult;
    ctx.trace = want_trace ? &out.trace : nullptr;
    ctx.frame_inputs = &out.frame_inputs;
    ctx.g = &g;
    ctx.pid = &pid;

    NodeId x = g.matmul(g.constant(species_matrix(w, cfg.species_max), "species"), pid["embed"]);
    for (int l = 0; l < cfg.blocks; ++l) x = attention_block(x, l, ctx);

    Tensor meanrow = Tensor::full({1, N}, static_cast<real>(1.0 / N));
    out.pooled = g.matmul(g.constant(meanrow, "pool"), x);
    NodeId h1 = g.gelu(g.add(g.matmul(out.pooled, pid["head.w1"]), pid["head.b1"]));
    out.y = g.add(g.matmul(h1, pid["head.w2"]), pid["head.b2"]);
    g.mark_output("y", out.y);
    return out;
}

namespace {

// PCA frames are a whole-structure method: eval averages the four sign
// frames (full frame averaging), train samples one of them.
std::vector<double> pca_eval_outputs(const CrystalStructure& s, const ModelConfig& cfg,
                                     const ModelParams& params, uint64_t seed,
                                     bool pooled_vecs, std::vector<std::vector<real>>* pools) {
    CrystalStructure w = wrap_to_cell(s);
    FrameRng rng(seed, false);
    auto frames = pca_frames(w.positions, rng.scoped(0x9ca, 0, 0));
    std::vector<double> ys;
    for (const auto& f : frames) {
        ForwardBuild fb = build_forward(s, cfg, params, RunMode::Eval, seed, &f);
        ys.push_back(static_cast<double>(fb.graph.value(fb.y).data[0]));
        if (pooled_vecs) {
            const Tensor& pv = fb.graph.value(fb.pooled);
            pools->emplace_back(pv.data.begin(), pv.data.end());
        }
    }
    return ys;
}

double forward_scalar(const CrystalStructure& s, const ModelConfig& cfg,
                      const ModelParams& params, RunMode mode, uint64_t seed) {
    if (cfg.frame_method == FrameMethod::Pca && mode == RunMode::Eval) {
        auto ys = pca_eval_outputs(s, cfg, params, seed, false, nullptr);
        double acc = 0.0;
        for (double y : ys) acc += y;
        return acc / double(ys.size());
    }
    ForwardBuild fb = build_forward(s, cfg, params, mode, seed);
    return static_cast<double>(fb.graph.value(fb.y).data[0]);
}

}  // namespace

std::vector<real> encode(const CrystalStructure& s, const ModelConfig& cfg,
                         const ModelParams& params, RunMode mode, uint64_t seed) {
    if (cfg.frame_method == FrameMethod::Pca && mode == RunMode::Eval) {
        std::vector<std::vector<real>> pools;
        pca_eval_outputs(s, cfg, params, seed, true, &pools);
        return frame_average(pools);
    }
    ForwardBuild fb = build_forward(s, cfg, params, mode, seed);
    const Tensor& pv = fb.graph.value(fb.pooled);
    return std::vector<real>(pv.data.begin(), pv.data.end());
}

double predict(const CrystalStructure& s, const ModelConfig& cfg, const ModelParams& params,
               const Normalization& norm, RunMode mode, uint64_t seed) {
    return forward_scalar(s, cfg, params, mode, seed) * norm.stdev + norm.mean;
}

AttentionTrace dump_trace(const CrystalStructure& s, const ModelConfig& cfg,
                          const ModelParams& params, uint64_t seed) {
    const Frame* fixed = nullptr;
    Frame ff;
    if (cfg.frame_method == FrameMethod::Pca) {
        CrystalStructure w = wrap_to_cell(s);
        FrameRng rng(seed, false);
        ff = pca_frames(w.positions, rng.scoped(0x9ca, 0, 0))[0];
        fixed = &ff;
    } else if (cfg.frame_method == FrameMethod::Lattice) {
        ff = lattice_frame(s.lattice);
        fixed = &ff;
    }
    ForwardBuild fb = build_forward(s, cfg, params, RunMode::Eval, seed, fixed, 3.5, true);
    return std::move(fb.trace);
}

Tensor attention_block_states(const CrystalStructure& s, const ModelConfig& cfg,
                              const ModelParams& params, const Tensor& x, int layer,
                              RunMode mode, uint64_t seed, double radius_mult) {
    cfg.validate();
    CrystalStructure w = wrap_to_cell(s);
    Graph g;
    std::map<std::string, NodeId> pid;
    for (const auto& [name, t] : params.items) pid[name] = g.input(name, t, true);
    std::vector<std::string> fi;
    BlockCtx ctx;
    ctx.st = &w;
    ctx.cfg = &cfg;
    ctx.mode = mode;
    ctx.seed = seed;
    ctx.radius_mult = radius_mult;
    ctx.frame_inputs = &fi;
    ctx.g = &g;
    ctx.pid = &pid;
    NodeId xin = g.constant(x, "x");
    NodeId out = attention_block(xin, layer, ctx);
    return g.value(out);
}

// ---------------------------------------------------------------------------
// checkpoint io
// ---------------------------------------------------------------------------

namespace {

nlohmann::json pos_to_json(const PosEncodingConfig& p) {
    return {{"lambda", p.lambda},
            {"c_dist", p.c_dist},
            {"c_angl", p.c_angl},
            {"dist", {{"mu_min", p.dist.mu_min}, {"mu_max", p.dist.mu_max}, {"s", p.dist.s}, {"d", p.dist.d}}},
            {"angl", {{"mu_min", p.angl.mu_min}, {"mu_max", p.angl.mu_max}, {"s", p.angl.s}, {"d", p.angl.d}}}};
}

PosEncodingConfig pos_from_json(const nlohmann::json& j) {
    PosEncodingConfig p;
    p.lambda = j.at("lambda");
    p.c_dist = j.at("c_dist");
    p.c_angl = j.at("c_angl");
    p.dist = {j.at("dist").at("mu_min"), j.at("dist").at("mu_max"), j.at("dist").at("s"),
              j.at("dist").at("d")};
    p.angl = {j.at("angl").at("mu_min"), j.at("angl").at("mu_max"), j.at("angl").at("s"),
              j.at("angl").at("d")};
    return p;
}

constexpr char kMagic[8] = {'D', 'F', 'C', 'K', 'P', 'T', '0', '1'};

}  // namespace

void save_checkpoint(const std::string& path, const ModelConfig& cfg, const ModelParams& params,
                     const Normalization& norm, int64_t step) {
    nlohmann::json hdr;
    hdr["model"] = {{"d", cfg.d},
                    {"heads", cfg.heads},
                    {"blocks", cfg.blocks},
                    {"ffn_mult", cfg.ffn_mult},
                    {"frame_method", frame_method_name(cfg.frame_method)},
                    {"sigma_lo", cfg.sigma_lo},
                    {"sigma_hi", cfg.sigma_hi},
                    {"sigma_init", cfg.sigma_init},
                    {"species_max", cfg.species_max}};
    hdr["pos"] = pos_to_json(cfg.pos);
    hdr["norm"] = {{"mean", norm.mean}, {"stdev", norm.stdev}};
    hdr["step"] = step;
    hdr["real_bits"] = int(sizeof(real) * 8);
    nlohmann::json dir = nlohmann::json::array();
    for (const auto& [name, t] : params.items)
        dir.push_back({{"name", name}, {"shape", t.shape}});
    hdr["tensors"] = dir;
    std::string hs = hdr.dump();

    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write checkpoint: " + path);
    f.write(kMagic, 8);
    uint64_t hlen = hs.size();
    f.write(reinterpret_cast<const char*>(&hlen), 8);
    f.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (const auto& [name, t] : params.items)
        f.write(reinterpret_cast<const char*>(t.data.data()),
                static_cast<std::streamsize>(t.data.size() * sizeof(real)));
    if (!f) throw DataError("checkpoint write failed: " + path);
}

void load_checkpoint(const std::string& path, ModelConfig& cfg, ModelParams& params,
                     Normalization& norm, int64_t& step) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot read checkpoint: " + path);
    char magic[8];
    f.read(magic, 8);
    if (!f || std::memcmp(magic, kMagic, 8) != 0)
        throw DataError("not a checkpoint file (bad magic): " + path);
    uint64_t hlen = 0;
    f.read(reinterpret_cast<char*>(&hlen), 8);
    std::string hs(hlen, '\0');
    f.read(hs.data(), static_cast<std::streamsize>(hlen));
    nlohmann::json hdr = nlohmann::json::parse(hs);
    if (hdr.at("real_bits") != int(sizeof(real) * 8))
        throw DataError("checkpoint precision mismatch (key real_bits)");

    const auto& m = hdr.at("model");
    cfg.d = m.at("d");
    cfg.heads = m.at("heads");
    cfg.blocks = m.at("blocks");
    cfg.ffn_mult = m.at("ffn_mult");
    cfg.frame_method = frame_method_from_string(m.at("frame_method"));
    cfg.sigma_lo = m.at("sigma_lo");
    cfg.sigma_hi = m.at("sigma_hi");
    cfg.sigma_init = m.at("sigma_init");
    cfg.species_max = m.at("species_max");
    cfg.pos = pos_from_json(hdr.at("pos"));
    norm.mean = hdr.at("norm").at("mean");
    norm.stdev = hdr.at("norm").at("stdev");
    step = hdr.at("step");

    params.items.clear();
    for (const auto& e : hdr.at("tensors")) {
        Tensor t = Tensor::zeros(e.at("shape").get<std::vector<int64_t>>());
        f.read(reinterpret_cast<char*>(t.data.data()),
               static_cast<std::streamsize>(t.data.size() * sizeof(real)));
        params.add(e.at("name"), std::move(t));
    }
    if (!f) throw DataError("checkpoint truncated: " + path);
}

}  // namespace dynframe
