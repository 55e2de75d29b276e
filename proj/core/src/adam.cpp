#include "semdyn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace semdyn {

Adam::Adam(std::vector<Parameter>& params, AdamConfig cfg) : params_(&params), cfg_(cfg) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const auto& p : params) {
        m_.emplace_back(p.value.rows, p.value.cols);
        v_.emplace_back(p.value.rows, p.value.cols);
    }
}

void Adam::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_->size(); ++i) {
        Parameter& p = (*params_)[i];
        for (std::size_t j = 0; j < p.value.size(); ++j) {
            const double g = p.grad.v[j];
            if (!std::isfinite(g)) throw std::runtime_error("non-finite gradient in " + p.name);
            m_[i].v[j] = cfg_.beta1 * m_[i].v[j] + (1.0 - cfg_.beta1) * g;
            v_[i].v[j] = cfg_.beta2 * v_[i].v[j] + (1.0 - cfg_.beta2) * g * g;
            const double mhat = m_[i].v[j] / bc1;
            const double vhat = v_[i].v[j] / bc2;
            p.value.v[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
        p.zero_grad();
    }
}

}  // namespace semdyn
