#include "semdyn/tape.hpp"

#include <cblas-openblas.h>

#include <cmath>
#include <functional>
#include <stdexcept>

namespace semdyn {

namespace {

// C += or = A(^T) * B(^T)
void gemm(bool trans_a, bool trans_b, const Tensor& a, const Tensor& b, Tensor& c,
          bool accumulate) {
    const std::size_t m = trans_a ? a.cols : a.rows;
    const std::size_t k = trans_a ? a.rows : a.cols;
    const std::size_t kb = trans_b ? b.cols : b.rows;
    const std::size_t n = trans_b ? b.rows : b.cols;
    if (k != kb || c.rows != m || c.cols != n)
        throw std::invalid_argument("gemm shape mismatch");
    cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
                trans_b ? CblasTrans : CblasNoTrans, static_cast<int>(m),
                static_cast<int>(n), static_cast<int>(k), 1.0, a.v.data(),
                static_cast<int>(a.cols), b.v.data(), static_cast<int>(b.cols),
                accumulate ? 1.0 : 0.0, c.v.data(), static_cast<int>(c.cols));
}

}  // namespace

NodeId Tape::push(Node n) {
    n.grad = Tensor(n.value.rows, n.value.cols);
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
}

NodeId Tape::constant(Tensor t) {
    Node n;
    n.op = Op::Constant;
    n.value = std::move(t);
    return push(std::move(n));
}

NodeId Tape::param(Parameter& p) {
    Node n;
    n.op = Op::Param;
    n.value = p.value;
    n.parameter = &p;
    return push(std::move(n));
}

NodeId Tape::affine(NodeId x, NodeId w, NodeId b) {
    const Tensor& xv = nodes_[x].value;
    const Tensor& wv = nodes_[w].value;
    const Tensor& bv = nodes_[b].value;
    if (xv.cols != wv.rows || bv.rows != 1 || bv.cols != wv.cols)
        throw std::invalid_argument("affine shape mismatch");
    Node n;
    n.op = Op::Affine;
    n.in[0] = x;
    n.in[1] = w;
    n.in[2] = b;
    n.value = Tensor(xv.rows, wv.cols);
    gemm(false, false, xv, wv, n.value, false);
    for (std::size_t r = 0; r < n.value.rows; ++r)
        for (std::size_t c = 0; c < n.value.cols; ++c) n.value.at(r, c) += bv.v[c];
    return push(std::move(n));
}

NodeId Tape::relu(NodeId x) {
    Node n;
    n.op = Op::Relu;
    n.in[0] = x;
    n.value = nodes_[x].value;
    for (double& v : n.value.v)
        if (v < 0.0) v = 0.0;
    return push(std::move(n));
}

NodeId Tape::concat_cols(NodeId a, NodeId b) {
    const Tensor& av = nodes_[a].value;
    const Tensor& bv = nodes_[b].value;
    if (av.rows != bv.rows) throw std::invalid_argument("concat_cols row mismatch");
    Node n;
    n.op = Op::ConcatCols;
    n.in[0] = a;
    n.in[1] = b;
    n.value = Tensor(av.rows, av.cols + bv.cols);
    for (std::size_t r = 0; r < av.rows; ++r) {
        std::copy(av.row(r), av.row(r) + av.cols, n.value.row(r));
        std::copy(bv.row(r), bv.row(r) + bv.cols, n.value.row(r) + av.cols);
    }
    return push(std::move(n));
}

NodeId Tape::sum_group_rows(NodeId x, std::size_t group) {
    const Tensor& xv = nodes_[x].value;
    if (group == 0 || xv.rows % group != 0)
        throw std::invalid_argument("sum_group_rows: rows not divisible by group");
    Node n;
    n.op = Op::SumGroupRows;
    n.in[0] = x;
    n.group = group;
    n.value = Tensor(xv.rows / group, xv.cols);
    // Fixed left-to-right summation order keeps results bit-reproducible.
    for (std::size_t g = 0; g < n.value.rows; ++g)
        for (std::size_t i = 0; i < group; ++i) {
            const double* src = xv.row(g * group + i);
            double* dst = n.value.row(g);
            for (std::size_t c = 0; c < xv.cols; ++c) dst[c] += src[c];
        }
    return push(std::move(n));
}

NodeId Tape::l2_loss(NodeId pred, NodeId target) {
    const Tensor& pv = nodes_[pred].value;
    const Tensor& tv = nodes_[target].value;
    if (!pv.same_shape(tv)) throw std::invalid_argument("l2_loss shape mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < pv.size(); ++i) {
        double d = pv.v[i] - tv.v[i];
        sum += d * d;
    }
    Node n;
    n.op = Op::L2Loss;
    n.in[0] = pred;
    n.in[1] = target;
    n.value = Tensor::scalar(sum / static_cast<double>(pv.size()));
    return push(std::move(n));
}

NodeId Tape::softmax_cross_entropy(NodeId logits, std::vector<int> labels) {
    const Tensor& lv = nodes_[logits].value;
    if (labels.size() != lv.rows) throw std::invalid_argument("label count mismatch");
    Node n;
    n.op = Op::SoftmaxCE;
    n.in[0] = logits;
    n.aux = Tensor(lv.rows, lv.cols);
    double loss = 0.0;
    for (std::size_t r = 0; r < lv.rows; ++r) {
        const double* row = lv.row(r);
        double mx = row[0];
        for (std::size_t c = 1; c < lv.cols; ++c) mx = std::max(mx, row[c]);
        double z = 0.0;
        for (std::size_t c = 0; c < lv.cols; ++c) z += std::exp(row[c] - mx);
        for (std::size_t c = 0; c < lv.cols; ++c) n.aux.at(r, c) = std::exp(row[c] - mx) / z;
        int y = labels[r];
        if (y < 0 || static_cast<std::size_t>(y) >= lv.cols)
            throw std::invalid_argument("label out of range");
        loss -= std::log(std::max(n.aux.at(r, static_cast<std::size_t>(y)), 1e-300));
    }
    n.labels = std::move(labels);
    n.value = Tensor::scalar(loss / static_cast<double>(lv.rows));
    return push(std::move(n));
}

void Tape::backward(NodeId loss) {
    if (backward_done_) throw std::logic_error("backward called twice on the same tape");
    backward_done_ = true;
    Node& ln = nodes_[loss];
    if (ln.value.size() != 1) throw std::invalid_argument("loss must be scalar");
    ln.grad.v[0] = 1.0;

    for (std::size_t i = nodes_.size(); i-- > 0;) {
        Node& n = nodes_[i];
        switch (n.op) {
            case Op::Constant:
                break;
            case Op::Param: {
                Tensor& pg = n.parameter->grad;
                for (std::size_t j = 0; j < pg.size(); ++j) pg.v[j] += n.grad.v[j];
                break;
            }
            case Op::Affine: {
                const Tensor& xv = nodes_[n.in[0]].value;
                const Tensor& wv = nodes_[n.in[1]].value;
                gemm(false, true, n.grad, wv, nodes_[n.in[0]].grad, true);  // dX += dY W^T
                gemm(true, false, xv, n.grad, nodes_[n.in[1]].grad, true);  // dW += X^T dY
                Tensor& bg = nodes_[n.in[2]].grad;
                for (std::size_t r = 0; r < n.grad.rows; ++r)
                    for (std::size_t c = 0; c < n.grad.cols; ++c)
                        bg.v[c] += n.grad.at(r, c);
                break;
            }
            case Op::Relu: {
                const Tensor& xv = nodes_[n.in[0]].value;
                Tensor& xg = nodes_[n.in[0]].grad;
                for (std::size_t j = 0; j < xv.size(); ++j)
                    if (xv.v[j] > 0.0) xg.v[j] += n.grad.v[j];
                break;
            }
            case Op::ConcatCols: {
                Tensor& ag = nodes_[n.in[0]].grad;
                Tensor& bg = nodes_[n.in[1]].grad;
                for (std::size_t r = 0; r < n.grad.rows; ++r) {
                    const double* g = n.grad.row(r);
                    for (std::size_t c = 0; c < ag.cols; ++c) ag.at(r, c) += g[c];
                    for (std::size_t c = 0; c < bg.cols; ++c) bg.at(r, c) += g[ag.cols + c];
                }
                break;
            }
            case Op::SumGroupRows: {
                Tensor& xg = nodes_[n.in[0]].grad;
                for (std::size_t g = 0; g < n.grad.rows; ++g)
                    for (std::size_t k = 0; k < n.group; ++k) {
                        double* dst = xg.row(g * n.group + k);
                        const double* src = n.grad.row(g);
                        for (std::size_t c = 0; c < xg.cols; ++c) dst[c] += src[c];
                    }
                break;
            }
            case Op::L2Loss: {
                const Tensor& pv = nodes_[n.in[0]].value;
                const Tensor& tv = nodes_[n.in[1]].value;
                Tensor& pg = nodes_[n.in[0]].grad;
                const double scale = 2.0 * n.grad.v[0] / static_cast<double>(pv.size());
                for (std::size_t j = 0; j < pv.size(); ++j)
                    pg.v[j] += scale * (pv.v[j] - tv.v[j]);
                break;
            }
            case Op::SoftmaxCE: {
                Tensor& lg = nodes_[n.in[0]].grad;
                const double scale = n.grad.v[0] / static_cast<double>(n.aux.rows);
                for (std::size_t r = 0; r < n.aux.rows; ++r)
                    for (std::size_t c = 0; c < n.aux.cols; ++c) {
                        double delta = static_cast<std::size_t>(n.labels[r]) == c ? 1.0 : 0.0;
                        lg.at(r, c) += scale * (n.aux.at(r, c) - delta);
                    }
                break;
            }
        }
    }
}

Tensor finite_difference_grad(Parameter& p, const std::function<double()>& loss_fn,
                              double h) {
    Tensor g(p.value.rows, p.value.cols);
    for (std::size_t i = 0; i < p.value.size(); ++i) {
        const double orig = p.value.v[i];
        p.value.v[i] = orig + h;
        const double up = loss_fn();
        p.value.v[i] = orig - h;
        const double down = loss_fn();
        p.value.v[i] = orig;
        g.v[i] = (up - down) / (2.0 * h);
    }
    return g;
}

}  // namespace semdyn
