#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "semdyn/tensor.hpp"

namespace semdyn {

// Trainable tensor with an accumulated gradient buffer.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    Parameter() = default;
    Parameter(std::string n, Tensor v)
        : name(std::move(n)), value(std::move(v)), grad(value.rows, value.cols) {}

    void zero_grad() { grad.zero(); }
};

using NodeId = std::size_t;

// Reverse-mode tape over dense matrices. Records a topologically ordered
// list of primitive applications; backward() replays it once in reverse and
// accumulates into the referenced Parameters' grad buffers.
//
// Supported primitives are exactly what the models need: affine layers,
// relu, column concatenation, grouped row-sum (relation-network
// aggregation), mean L2 loss and softmax cross-entropy (linear probe).
// No broadcasting beyond the affine bias row.
class Tape {
public:
    NodeId constant(Tensor t);
    NodeId param(Parameter& p);

    // y = x * w + b (bias row broadcast over rows). x: RxI, w: IxO, b: 1xO.
    NodeId affine(NodeId x, NodeId w, NodeId b);
    NodeId relu(NodeId x);
    // [a | b] column-wise; rows must match.
    NodeId concat_cols(NodeId a, NodeId b);
    // (G*group)xC -> GxC, summing each consecutive block of `group` rows.
    NodeId sum_group_rows(NodeId x, std::size_t group);
    // Scalar mean of squared elementwise differences.
    NodeId l2_loss(NodeId pred, NodeId target);
    // Scalar mean cross-entropy of row-wise softmax against integer labels.
    NodeId softmax_cross_entropy(NodeId logits, std::vector<int> labels);

    const Tensor& value(NodeId id) const { return nodes_[id].value; }
    const Tensor& grad(NodeId id) const { return nodes_[id].grad; }

    // Seeds d(loss)=1 and sweeps the tape once. The loss must be scalar;
    // calling twice on the same tape is an error.
    void backward(NodeId loss);

private:
    enum class Op { Constant, Param, Affine, Relu, ConcatCols, SumGroupRows, L2Loss, SoftmaxCE };

    struct Node {
        Op op;
        Tensor value;
        Tensor grad;
        NodeId in[3] = {0, 0, 0};
        Parameter* parameter = nullptr;
        std::size_t group = 0;
        std::vector<int> labels;
        Tensor aux;  // cached softmax probabilities
    };

    NodeId push(Node n);
    std::vector<Node> nodes_;
    bool backward_done_ = false;
};

// Finite-difference gradient of `loss_fn` (which must rebuild its graph on a
// fresh tape each call) with respect to every entry of `p`. Test oracle for
// the analytic backward pass.
Tensor finite_difference_grad(Parameter& p, const std::function<double()>& loss_fn,
                              double h = 1e-5);

}  // namespace semdyn
