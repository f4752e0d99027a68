#include "dynframe/graph.hpp"

#include <algorithm>
#include <cmath>

namespace dynframe {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244008444;
constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;

enum class Bcast { Same, ScalarB, ScalarA, RowB };

Bcast bcast_kind(const Tensor& a, const Tensor& b) {
    if (a.same_shape(b)) return Bcast::Same;
    if (b.numel() == 1) return Bcast::ScalarB;
    if (a.numel() == 1) return Bcast::ScalarA;
    if (b.rows() == 1 && a.cols() == b.cols()) return Bcast::RowB;
    throw NumericError("broadcast: incompatible shapes " + shape_str(a.shape) + " vs " +
                       shape_str(b.shape));
}

// reduce g (shaped like the broadcast result) back onto operand shape
Tensor reduce_to(const Tensor& g, const Tensor& like) {
    if (g.same_shape(like)) return g;
    Tensor out = Tensor::zeros(like.shape);
    if (like.numel() == 1) {
        real s = 0;
        for (real x : g.data) s += x;
        out.data[0] = s;
        return out;
    }
    // row reduction
    for (int64_t r = 0; r < g.rows(); ++r)
        for (int64_t c = 0; c < g.cols(); ++c) out.data[static_cast<size_t>(c)] += g.at(r, c);
    return out;
}

}  // namespace

const char* op_name(OpKind k) {
    switch (k) {
        case OpKind::Input: return "input";
        case OpKind::Constant: return "constant";
        case OpKind::Add: return "add";
        case OpKind::Sub: return "sub";
        case OpKind::Mul: return "mul";
        case OpKind::Div: return "div";
        case OpKind::MatMul: return "matmul";
        case OpKind::Transpose: return "transpose";
        case OpKind::Exp: return "exp";
        case OpKind::Sigmoid: return "sigmoid";
        case OpKind::Gelu: return "gelu";
        case OpKind::Softmax: return "softmax";
        case OpKind::Norm: return "norm";
        case OpKind::Sum: return "sum";
        case OpKind::Concat: return "concat";
        case OpKind::SliceCols: return "slice_cols";
        case OpKind::GatherRows: return "gather_rows";
        case OpKind::Gather: return "gather";
        case OpKind::SegmentSum: return "segment_sum";
        case OpKind::ScaleShift: return "scale_shift";
        case OpKind::StopGrad: return "stop_gradient";
    }
    return "?";
}

std::string Graph::node_desc(const Node& n) const {
    std::string d = op_name(n.kind);
    if (!n.label.empty()) d += "(" + n.label + ")";
    return d;
}

NodeId Graph::push(Node n) {
    if (n.kind != OpKind::Input && n.kind != OpKind::Constant) {
        n.requires_grad = false;
        for (NodeId i : n.in) n.requires_grad = n.requires_grad || nodes_[i].requires_grad;
        if (n.kind == OpKind::StopGrad) n.requires_grad = false;
        compute(n);
    }
    if (!n.val.all_finite())
        throw NumericError("non-finite value in node " + node_desc(n) + " #" +
                           std::to_string(nodes_.size()));
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Graph::input(const std::string& name, Tensor value, bool requires_grad) {
    if (inputs_.count(name)) throw NumericError("duplicate input name: " + name);
    Node n;
    n.kind = OpKind::Input;
    n.label = name;
    n.val = std::move(value);
    n.requires_grad = requires_grad;
    NodeId id = push(std::move(n));
    inputs_[name] = id;
    return id;
}

NodeId Graph::constant(Tensor value, const std::string& label) {
    Node n;
    n.kind = OpKind::Constant;
    n.label = label;
    n.val = std::move(value);
    return push(std::move(n));
}

#define DF_BINOP(fname, kindv)                          \
    NodeId Graph::fname(NodeId a, NodeId b) {           \
        Node n;                                         \
        n.kind = kindv;                                 \
        n.in = {a, b};                                  \
        return push(std::move(n));                      \
    }

DF_BINOP(add, OpKind::Add)
DF_BINOP(sub, OpKind::Sub)
DF_BINOP(mul, OpKind::Mul)
DF_BINOP(div, OpKind::Div)
DF_BINOP(matmul, OpKind::MatMul)
#undef DF_BINOP

#define DF_UNOP(fname, kindv)                 \
    NodeId Graph::fname(NodeId a) {           \
        Node n;                               \
        n.kind = kindv;                       \
        n.in = {a};                           \
        return push(std::move(n));            \
    }

DF_UNOP(transpose, OpKind::Transpose)
DF_UNOP(exp, OpKind::Exp)
DF_UNOP(sigmoid, OpKind::Sigmoid)
DF_UNOP(gelu, OpKind::Gelu)
DF_UNOP(softmax, OpKind::Softmax)
DF_UNOP(norm, OpKind::Norm)
DF_UNOP(sum, OpKind::Sum)
DF_UNOP(stop_gradient, OpKind::StopGrad)
#undef DF_UNOP

NodeId Graph::concat(const std::vector<NodeId>& parts, int axis) {
    if (parts.empty()) throw NumericError("concat: empty part list");
    Node n;
    n.kind = OpKind::Concat;
    n.in = parts;
    n.axis = axis;
    return push(std::move(n));
}

NodeId Graph::slice_cols(NodeId a, int64_t begin, int64_t len) {
    Node n;
    n.kind = OpKind::SliceCols;
    n.in = {a};
    n.i0 = begin;
    n.i1 = len;
    return push(std::move(n));
}

NodeId Graph::gather_rows(NodeId a, std::vector<int64_t> rows) {
    Node n;
    n.kind = OpKind::GatherRows;
    n.in = {a};
    n.idx = std::move(rows);
    return push(std::move(n));
}

NodeId Graph::gather(NodeId a, std::vector<int64_t> idx) {
    Node n;
    n.kind = OpKind::Gather;
    n.in = {a};
    n.idx = std::move(idx);
    return push(std::move(n));
}

NodeId Graph::segment_sum(NodeId a, std::vector<int64_t> seg, int64_t nseg) {
    Node n;
    n.kind = OpKind::SegmentSum;
    n.in = {a};
    n.idx = std::move(seg);
    n.i0 = nseg;
    return push(std::move(n));
}

NodeId Graph::scale_shift(NodeId a, double scale, double shift) {
    Node n;
    n.kind = OpKind::ScaleShift;
    n.in = {a};
    n.a = scale;
    n.b = shift;
    return push(std::move(n));
}

void Graph::mark_output(const std::string& name, NodeId id) { outputs_[name] = id; }

const Tensor& Graph::value(NodeId id) const { return nodes_[id].val; }
const Tensor& Graph::grad(NodeId id) const { return nodes_[id].grd; }

NodeId Graph::input_id(const std::string& name) const {
    auto it = inputs_.find(name);
    if (it == inputs_.end()) throw NumericError("input not in graph: " + name);
    return it->second;
}

void Graph::bind(const std::string& name, const Tensor& value) {
    Node& n = nodes_[input_id(name)];
    if (!n.val.same_shape(value))
        throw NumericError("bind " + name + ": shape " + shape_str(value.shape) +
                           " does not match " + shape_str(n.val.shape));
    n.val.data = value.data;
}

void Graph::forward() {
    for (auto& n : nodes_) {
        if (n.kind == OpKind::Input || n.kind == OpKind::Constant) continue;
        compute(n);
        if (!n.val.all_finite())
            throw NumericError("non-finite value in node " + node_desc(n));
    }
}

std::map<std::string, Tensor> Graph::evaluate(const std::map<std::string, Tensor>& inputs) {
    for (const auto& [name, t] : inputs) bind(name, t);
    forward();
    std::map<std::string, Tensor> out;
    for (const auto& [name, id] : outputs_) out[name] = nodes_[id].val;
    return out;
}

void Graph::compute(Node& n) {
    auto& N = nodes_;
    switch (n.kind) {
        case OpKind::Input:
        case OpKind::Constant:
            break;
        case OpKind::Add:
        case OpKind::Sub:
        case OpKind::Mul:
        case OpKind::Div: {
            const Tensor& A = N[n.in[0]].val;
            const Tensor& B = N[n.in[1]].val;
            Bcast bc;
            try {
                bc = bcast_kind(A, B);
            } catch (const NumericError& e) {
                throw NumericError(std::string(e.what()) + " in node " + node_desc(n));
            }
            const Tensor& big = (bc == Bcast::ScalarA) ? B : A;
            n.val = Tensor::zeros(big.shape);
            int64_t R = big.rows(), C = big.cols();
            for (int64_t r = 0; r < R; ++r)
                for (int64_t c = 0; c < C; ++c) {
                    real av = (bc == Bcast::ScalarA) ? A.data[0] : A.at(r, c);
                    real bv = (bc == Bcast::ScalarB) ? B.data[0]
                              : (bc == Bcast::RowB)  ? B.at(0, c)
                                                     : B.at(r, c);
                    real y = 0;
                    switch (n.kind) {
                        case OpKind::Add: y = av + bv; break;
                        case OpKind::Sub: y = av - bv; break;
                        case OpKind::Mul: y = av * bv; break;
                        default: y = av / bv; break;
                    }
                    n.val.at(r, c) = y;
                }
            break;
        }
        case OpKind::MatMul: {
            const Tensor& A = N[n.in[0]].val;
            const Tensor& B = N[n.in[1]].val;
            if (A.cols() != B.rows())
                throw NumericError("matmul: " + shape_str(A.shape) + " x " + shape_str(B.shape) +
                                   " in node " + node_desc(n));
            int64_t R = A.rows(), K = A.cols(), C = B.cols();
            n.val = Tensor::zeros({R, C});
            for (int64_t r = 0; r < R; ++r)
                for (int64_t k = 0; k < K; ++k) {
                    real a = A.at(r, k);
                    if (a == real(0)) continue;
                    const real* brow = &B.data[static_cast<size_t>(k * C)];
                    real* orow = &n.val.data[static_cast<size_t>(r * C)];
                    for (int64_t c = 0; c < C; ++c) orow[c] += a * brow[c];
                }
            break;
        }
        case OpKind::Transpose: {
            const Tensor& A = N[n.in[0]].val;
            n.val = Tensor::zeros({A.cols(), A.rows()});
            for (int64_t r = 0; r < A.rows(); ++r)
                for (int64_t c = 0; c < A.cols(); ++c) n.val.at(c, r) = A.at(r, c);
            break;
        }
        case OpKind::Exp: {
            const Tensor& A = N[n.in[0]].val;
            n.val = A;
            for (auto& x : n.val.data) x = std::exp(x);
            break;
        }
        case OpKind::Sigmoid: {
            const Tensor& A = N[n.in[0]].val;
            n.val = A;
            for (auto& x : n.val.data) x = real(1) / (real(1) + std::exp(-x));
            break;
        }
        case OpKind::Gelu: {
            const Tensor& A = N[n.in[0]].val;
            n.val = A;
            for (auto& x : n.val.data)
                x = real(0.5) * x * (real(1) + static_cast<real>(std::erf(x * kInvSqrt2)));
            break;
        }
        case OpKind::Softmax: {
            const Tensor& A = N[n.in[0]].val;
            n.val = A;
            int64_t R = A.rows(), C = A.cols();
            for (int64_t r = 0; r < R; ++r) {
                real m = A.at(r, 0);
                for (int64_t c = 1; c < C; ++c) m = std::max(m, A.at(r, c));
                real z = 0;
                for (int64_t c = 0; c < C; ++c) {
                    real e = std::exp(A.at(r, c) - m);
                    n.val.at(r, c) = e;
                    z += e;
                }
                for (int64_t c = 0; c < C; ++c) n.val.at(r, c) /= z;
            }
            break;
        }
        case OpKind::Norm: {
            const Tensor& A = N[n.in[0]].val;
            real s = 0;
            for (real x : A.data) s += x * x;
            n.val = Tensor::scalar(std::sqrt(s));
            break;
        }
        case OpKind::Sum: {
            const Tensor& A = N[n.in[0]].val;
            real s = 0;
            for (real x : A.data) s += x;
            n.val = Tensor::scalar(s);
            break;
        }
        case OpKind::Concat: {
            int64_t R = 0, C = 0;
            for (NodeId i : n.in) {
                const Tensor& P = N[i].val;
                if (n.axis == 0) {
                    if (C == 0) C = P.cols();
                    if (P.cols() != C)
                        throw NumericError("concat axis 0: column mismatch in node " + node_desc(n));
                    R += P.rows();
                } else {
                    if (R == 0) R = P.rows();
                    if (P.rows() != R)
                        throw NumericError("concat axis 1: row mismatch in node " + node_desc(n));
                    C += P.cols();
                }
            }
            n.val = Tensor::zeros({R, C});
            int64_t off = 0;
            for (NodeId i : n.in) {
                const Tensor& P = N[i].val;
                for (int64_t r = 0; r < P.rows(); ++r)
                    for (int64_t c = 0; c < P.cols(); ++c) {
                        if (n.axis == 0)
                            n.val.at(off + r, c) = P.at(r, c);
                        else
                            n.val.at(r, off + c) = P.at(r, c);
                    }
                off += (n.axis == 0) ? P.rows() : P.cols();
            }
            break;
        }
        case OpKind::SliceCols: {
            const Tensor& A = N[n.in[0]].val;
            if (n.i0 < 0 || n.i0 + n.i1 > A.cols())
                throw NumericError("slice_cols out of range in node " + node_desc(n));
            n.val = Tensor::zeros({A.rows(), n.i1});
            for (int64_t r = 0; r < A.rows(); ++r)
                for (int64_t c = 0; c < n.i1; ++c) n.val.at(r, c) = A.at(r, n.i0 + c);
            break;
        }
        case OpKind::GatherRows: {
            const Tensor& A = N[n.in[0]].val;
            n.val = Tensor::zeros({static_cast<int64_t>(n.idx.size()), A.cols()});
            for (size_t k = 0; k < n.idx.size(); ++k) {
                if (n.idx[k] < 0 || n.idx[k] >= A.rows())
                    throw NumericError("gather_rows index out of range in node " + node_desc(n));
                for (int64_t c = 0; c < A.cols(); ++c)
                    n.val.at(static_cast<int64_t>(k), c) = A.at(n.idx[k], c);
            }
            break;
        }
        case OpKind::Gather: {
            const Tensor& A = N[n.in[0]].val;
            n.val = Tensor::zeros({1, static_cast<int64_t>(n.idx.size())});
            for (size_t k = 0; k < n.idx.size(); ++k) {
                if (n.idx[k] < 0 || n.idx[k] >= A.numel())
                    throw NumericError("gather index out of range in node " + node_desc(n));
                n.val.data[k] = A.data[static_cast<size_t>(n.idx[k])];
            }
            break;
        }
        case OpKind::SegmentSum: {
            const Tensor& A = N[n.in[0]].val;
            if (static_cast<int64_t>(n.idx.size()) != A.numel())
                throw NumericError("segment_sum: map length mismatch in node " + node_desc(n));
            n.val = Tensor::zeros({1, n.i0});
            for (size_t e = 0; e < n.idx.size(); ++e) {
                if (n.idx[e] < 0 || n.idx[e] >= n.i0)
                    throw NumericError("segment_sum segment out of range in node " + node_desc(n));
                n.val.data[static_cast<size_t>(n.idx[e])] += A.data[e];
            }
            break;
        }
        case OpKind::ScaleShift: {
            const Tensor& A = N[n.in[0]].val;
            n.val = A;
            for (auto& x : n.val.data)
                x = static_cast<real>(n.a) * x + static_cast<real>(n.b);
            break;
        }
        case OpKind::StopGrad:
            n.val = N[n.in[0]].val;
            break;
    }
}

void Graph::accumulate(NodeId target, const Tensor& g) {
    Node& t = nodes_[target];
    if (!t.requires_grad && t.kind != OpKind::Input) return;
    if (t.grd.data.empty()) t.grd = Tensor::zeros(t.val.shape);
    for (size_t i = 0; i < g.data.size(); ++i) t.grd.data[i] += g.data[i];
}

void Graph::backprop(const Node& n) {
    auto& N = nodes_;
    const Tensor& g = n.grd;
    switch (n.kind) {
        case OpKind::Input:
        case OpKind::Constant:
        case OpKind::StopGrad:
            break;
        case OpKind::Add:
        case OpKind::Sub:
        case OpKind::Mul:
        case OpKind::Div: {
            const Tensor& A = N[n.in[0]].val;
            const Tensor& B = N[n.in[1]].val;
            Bcast bc = bcast_kind(A, B);
            Tensor ga = Tensor::zeros(n.val.shape);
            Tensor gb = Tensor::zeros(n.val.shape);
            int64_t R = n.val.rows(), C = n.val.cols();
            for (int64_t r = 0; r < R; ++r)
                for (int64_t c = 0; c < C; ++c) {
                    real av = (bc == Bcast::ScalarA) ? A.data[0] : A.at(r, c);
                    real bv = (bc == Bcast::ScalarB) ? B.data[0]
                              : (bc == Bcast::RowB)  ? B.at(0, c)
                                                     : B.at(r, c);
                    real gv = g.at(r, c);
                    switch (n.kind) {
                        case OpKind::Add:
                            ga.at(r, c) = gv;
                            gb.at(r, c) = gv;
                            break;
                        case OpKind::Sub:
                            ga.at(r, c) = gv;
                            gb.at(r, c) = -gv;
                            break;
                        case OpKind::Mul:
                            ga.at(r, c) = gv * bv;
                            gb.at(r, c) = gv * av;
                            break;
                        default:
                            ga.at(r, c) = gv / bv;
                            gb.at(r, c) = -gv * av / (bv * bv);
                            break;
                    }
                }
            accumulate(n.in[0], reduce_to(ga, A));
            accumulate(n.in[1], reduce_to(gb, B));
            break;
        }
        case OpKind::MatMul: {
            const Tensor& A = N[n.in[0]].val;
            const Tensor& B = N[n.in[1]].val;
            int64_t R = A.rows(), K = A.cols(), C = B.cols();
            if (N[n.in[0]].requires_grad) {
                Tensor ga = Tensor::zeros(A.shape);
                for (int64_t r = 0; r < R; ++r)
                    for (int64_t k = 0; k < K; ++k) {
                        real s = 0;
                        for (int64_t c = 0; c < C; ++c) s += g.at(r, c) * B.at(k, c);
                        ga.at(r, k) = s;
                    }
                accumulate(n.in[0], ga);
            }
            if (N[n.in[1]].requires_grad) {
                Tensor gb = Tensor::zeros(B.shape);
                for (int64_t k = 0; k < K; ++k)
                    for (int64_t c = 0; c < C; ++c) {
                        real s = 0;
                        for (int64_t r = 0; r < R; ++r) s += A.at(r, k) * g.at(r, c);
                        gb.at(k, c) = s;
                    }
                accumulate(n.in[1], gb);
            }
            break;
        }
        case OpKind::Transpose: {
            Tensor ga = Tensor::zeros(N[n.in[0]].val.shape);
            for (int64_t r = 0; r < ga.rows(); ++r)
                for (int64_t c = 0; c < ga.cols(); ++c) ga.at(r, c) = g.at(c, r);
            accumulate(n.in[0], ga);
            break;
        }
        case OpKind::Exp: {
            Tensor ga = g;
            for (size_t i = 0; i < ga.data.size(); ++i) ga.data[i] *= n.val.data[i];
            accumulate(n.in[0], ga);
            break;
        }
        case OpKind::Sigmoid: {
            Tensor ga = g;
            for (size_t i = 0; i < ga.data.size(); ++i) {
                real s = n.val.data[i];
                ga.data[i] *= s * (real(1) - s);
            }
            accumulate(n.in[0], ga);
            break;
        }
        case OpKind::Gelu: {
            const Tensor& A = N[n.in[0]].val;
            Tensor ga = g;
            for (size_t i = 0; i < ga.data.size(); ++i) {
                double x = static_cast<double>(A.data[i]);
                double d = 0.5 * (1.0 + std::erf(x * kInvSqrt2)) +
                           x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
                ga.data[i] *= static_cast<real>(d);
            }
            accumulate(n.in[0], ga);
            break;
        }
        case OpKind::Softmax: {
            const Tensor& Y = n.val;
            Tensor ga = Tensor::zeros(Y.shape);
            for (int64_t r = 0; r < Y.rows(); ++r) {
                real dotv = 0;
                for (int64_t c = 0; c < Y.cols(); ++c) dotv += g.at(r, c) * Y.at(r, c);
                for (int64_t c = 0; c < Y.cols(); ++c)
                    ga.at(r, c) = Y.at(r, c) * (g.at(r, c) - dotv);
            }
            accumulate(n.in[0], ga);
            break;
        }
        case OpKind::Norm: {
            const Tensor& A = N[n.in[0]].val;
            real nv = n.val.data[0];
            Tensor ga = Tensor::zeros(A.shape);
            if (nv > 0)
                for (size_t i = 0; i < ga.data.size(); ++i)
                    ga.data[i] = g.data[0] * A.data[i] / nv;
            accumulate(n.in[0], ga);
            break;
        }
        case OpKind::Sum: {
            Tensor ga = Tensor::full(N[n.in[0]].val.shape, g.data[0]);
            accumulate(n.in[0], ga);
            break;
        }
        case OpKind::Concat: {
            int64_t off = 0;
            for (NodeId i : n.in) {
                const Tensor& P = N[i].val;
                Tensor gp = Tensor::zeros(P.shape);
                for (int64_t r = 0; r < P.rows(); ++r)
                    for (int64_t c = 0; c < P.cols(); ++c)
                        gp.at(r, c) = (n.axis == 0) ? g.at(off + r, c) : g.at(r, off + c);
                accumulate(i, gp);
                off += (n.axis == 0) ? P.rows() : P.cols();
            }
            break;
        }
        case OpKind::SliceCols: {
            const Tensor& A = N[n.in[0]].val;
            Tensor ga = Tensor::zeros(A.shape);
            for (int64_t r = 0; r < g.rows(); ++r)
                for (int64_t c = 0; c < g.cols(); ++c) ga.at(r, n.i0 + c) = g.at(r, c);
            accumulate(n.in[0], ga);
            break;
        }
        case OpKind::GatherRows: {
            const Tensor& A = N[n.in[0]].val;
            Tensor ga = Tensor::zeros(A.shape);
            for (size_t k = 0; k < n.idx.size(); ++k)
                for (int64_t c = 0; c < A.cols(); ++c)
                    ga.at(n.idx[k], c) += g.at(static_cast<int64_t>(k), c);
            accumulate(n.in[0], ga);
            break;
        }
        case OpKind::Gather: {
            const Tensor& A = N[n.in[0]].val;
            Tensor ga = Tensor::zeros(A.shape);
            for (size_t k = 0; k < n.idx.size(); ++k)
                ga.data[static_cast<size_t>(n.idx[k])] += g.data[k];
            accumulate(n.in[0], ga);
            break;
        }
        case OpKind::SegmentSum: {
            const Tensor& A = N[n.in[0]].val;
            Tensor ga = Tensor::zeros(A.shape);
            for (size_t e = 0; e < n.idx.size(); ++e)
                ga.data[e] = g.data[static_cast<size_t>(n.idx[e])];
            accumulate(n.in[0], ga);
            break;
        }
        case OpKind::ScaleShift: {
            Tensor ga = g;
            for (auto& x : ga.data) x *= static_cast<real>(n.a);
            accumulate(n.in[0], ga);
            break;
        }
    }
}

void Graph::backward(NodeId output) {
    for (auto& n : nodes_) n.grd = Tensor();
    Node& out = nodes_[output];
    if (out.val.numel() != 1)
        throw NumericError("backward: output " + node_desc(out) + " is not scalar");
    out.grd = Tensor::full(out.val.shape, real(1));
    for (NodeId id = output; id >= 0; --id) {
        Node& n = nodes_[id];
        if (n.grd.data.empty()) continue;
        if (!n.grd.all_finite())
            throw NumericError("non-finite gradient at node " + node_desc(n));
        if (!n.requires_grad && n.kind != OpKind::Input) continue;
        backprop(n);
    }
}

std::map<std::string, Tensor> Graph::input_gradients(const std::vector<std::string>& wrt) {
    std::map<std::string, Tensor> out;
    for (const auto& name : wrt) {
        NodeId id = input_id(name);
        const Node& n = nodes_[id];
        out[name] = n.grd.data.empty() ? Tensor::zeros(n.val.shape) : n.grd;
    }
    return out;
}

double Graph::finite_difference_check(const std::vector<std::string>& wrt, NodeId output,
                                      double step) {
    if (step <= 0) throw NumericError("finite_difference_check: step must be positive");
    forward();
    backward(output);
    auto analytic = input_gradients(wrt);
    double max_rel = 0.0;
    for (const auto& name : wrt) {
        NodeId id = input_id(name);
        Tensor base = nodes_[id].val;
        const Tensor& ga = analytic[name];
        for (size_t i = 0; i < base.data.size(); ++i) {
            real saved = base.data[i];
            nodes_[id].val.data[i] = saved + static_cast<real>(step);
            forward();
            double fp = static_cast<double>(nodes_[output].val.data[0]);
            nodes_[id].val.data[i] = saved - static_cast<real>(step);
            forward();
            double fm = static_cast<double>(nodes_[output].val.data[0]);
            nodes_[id].val.data[i] = saved;
            double fd = (fp - fm) / (2.0 * step);
            double ad = static_cast<double>(ga.data[i]);
            double rel = std::abs(ad - fd) / std::max({std::abs(ad), std::abs(fd), 1e-8});
            max_rel = std::max(max_rel, rel);
        }
    }
    forward();
    return max_rel;
}

}  // namespace dynframe
