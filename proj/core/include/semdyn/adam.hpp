#pragma once

#include <vector>

#include "semdyn/tape.hpp"

namespace semdyn {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Per-parameter first/second moment estimates and shared step counter.
class Adam {
public:
    Adam(std::vector<Parameter>& params, AdamConfig cfg = {});

    // One bias-corrected update from the accumulated gradients, then clears
    // them. Throws on non-finite gradients.
    void step();

    long steps_taken() const { return t_; }

private:
    std::vector<Parameter>* params_;
    AdamConfig cfg_;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
    long t_ = 0;
};

}  // namespace semdyn
