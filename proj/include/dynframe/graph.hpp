#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dynframe/tensor.hpp"

namespace dynframe {

// Reverse-mode autodiff on an eager tape. Adding an op node computes its
// value immediately, so data-dependent model assembly (adaptive enumeration
// radii, frames built from attention weight values) can interleave with
// taping. evaluate() re-runs the same tape with rebound inputs, which makes
// finite differencing consistent with the recorded function.
enum class OpKind {
    Input,
    Constant,
    Add,
    Sub,
    Mul,
    Div,
    MatMul,
    Transpose,
    Exp,
    Sigmoid,
    Gelu,
    Softmax,
    Norm,
    Sum,
    Concat,
    SliceCols,
    GatherRows,
    Gather,
    SegmentSum,
    ScaleShift,
    StopGrad,
};

const char* op_name(OpKind k);

using NodeId = int;

class Graph {
public:
    // leaves
    NodeId input(const std::string& name, Tensor value, bool requires_grad = true);
    NodeId constant(Tensor value, const std::string& label = "");

    // elementwise binaries; broadcasting: equal shapes, either side [1,1],
    // or second operand a [1,C] row against [R,C]
    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);
    NodeId div(NodeId a, NodeId b);

    NodeId matmul(NodeId a, NodeId b);
    NodeId transpose(NodeId a);

    NodeId exp(NodeId a);
    NodeId sigmoid(NodeId a);
    NodeId gelu(NodeId a);
    NodeId softmax(NodeId a);  // per row over the last dimension
    NodeId norm(NodeId a);     // Frobenius norm -> [1,1]
    NodeId sum(NodeId a);      // all elements -> [1,1]

    NodeId concat(const std::vector<NodeId>& parts, int axis);
    NodeId slice_cols(NodeId a, int64_t begin, int64_t len);
    NodeId gather_rows(NodeId a, std::vector<int64_t> rows);
    NodeId gather(NodeId a, std::vector<int64_t> idx);  // a viewed flat, out [1, n]
    NodeId segment_sum(NodeId a, std::vector<int64_t> seg, int64_t nseg);
    NodeId scale_shift(NodeId a, double scale, double shift);
    NodeId stop_gradient(NodeId a);

    void mark_output(const std::string& name, NodeId id);

    const Tensor& value(NodeId id) const;
    const Tensor& grad(NodeId id) const;

    // Rebinds named inputs and recomputes every op node in tape order.
    // Forward values are bit-identical across repeated evaluations.
    std::map<std::string, Tensor> evaluate(const std::map<std::string, Tensor>& inputs);

    void bind(const std::string& name, const Tensor& value);
    void forward();

    // Reverse pass from a scalar output; fills per-node grads.
    void backward(NodeId output);
    std::map<std::string, Tensor> input_gradients(const std::vector<std::string>& wrt);

    // Central-difference check of d(output)/d(input) for every component of
    // every wrt input. Returns max over components of
    // |g_ad - g_fd| / max(|g_ad|, |g_fd|, 1e-8). Empty wrt set -> 0.
    double finite_difference_check(const std::vector<std::string>& wrt, NodeId output, double step);

    NodeId input_id(const std::string& name) const;
    size_t size() const { return nodes_.size(); }

private:
    struct Node {
        OpKind kind;
        std::string label;
        std::vector<NodeId> in;
        Tensor val;
        Tensor grd;
        bool requires_grad = false;
        // op attributes
        int64_t i0 = 0, i1 = 0;
        double a = 0.0, b = 0.0;
        std::vector<int64_t> idx;
        int axis = 0;
    };

    std::vector<Node> nodes_;
    std::map<std::string, NodeId> inputs_;
    std::map<std::string, NodeId> outputs_;

    NodeId push(Node n);
    void compute(Node& n);
    void backprop(const Node& n);
    void accumulate(NodeId target, const Tensor& g);
    std::string node_desc(const Node& n) const;
};

}  // namespace dynframe
