#pragma once

#include "senti/tape.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace senti {

// Decoupled-weight-decay adaptive-moment optimizer with global-norm
// gradient clipping.
template <class Scalar>
class AdamW {
public:
    using M = ad::Mat<Scalar>;

    AdamW(std::vector<M*> params, Scalar lr, Scalar weight_decay = Scalar(0.01),
          Scalar clip_norm = Scalar(1.0), Scalar beta1 = Scalar(0.9),
          Scalar beta2 = Scalar(0.999), Scalar eps = Scalar(1e-8))
        : params_(std::move(params)), lr_(lr), wd_(weight_decay), clip_(clip_norm),
          beta1_(beta1), beta2_(beta2), eps_(eps) {
        for (auto* p : params_) {
            m_.push_back(M::Zero(p->rows(), p->cols()));
            v_.push_back(M::Zero(p->rows(), p->cols()));
        }
    }

    void step(std::vector<M>& grads) {
        if (grads.size() != params_.size()) {
            throw std::invalid_argument("optimizer: gradient count mismatch");
        }
        double sq = 0.0;
        for (const auto& g : grads) {
            if (!g.allFinite()) {
                throw std::runtime_error("optimizer: non-finite gradient");
            }
            sq += static_cast<double>(g.squaredNorm());
        }
        const double norm = std::sqrt(sq);
        Scalar scale = Scalar(1);
        if (clip_ > Scalar(0) && norm > static_cast<double>(clip_)) {
            scale = clip_ / static_cast<Scalar>(norm);
        }
        ++t_;
        const Scalar bc1 = Scalar(1) - std::pow(beta1_, Scalar(t_));
        const Scalar bc2 = Scalar(1) - std::pow(beta2_, Scalar(t_));
        for (std::size_t i = 0; i < params_.size(); ++i) {
            M g = grads[i] * scale;
            m_[i] = beta1_ * m_[i] + (Scalar(1) - beta1_) * g;
            v_[i] = beta2_ * v_[i] + (Scalar(1) - beta2_) * g.cwiseProduct(g);
            M mhat = m_[i] / bc1;
            M vhat = v_[i] / bc2;
            *params_[i] -= lr_ * wd_ * (*params_[i]);
            params_[i]->array() -= lr_ * mhat.array() / (vhat.array().sqrt() + eps_);
        }
    }

    Scalar learning_rate() const { return lr_; }

private:
    std::vector<M*> params_;
    Scalar lr_, wd_, clip_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<M> m_, v_;
};

}  // namespace senti
