#include "ttpx/modeling/linear_head.hpp"

#include <algorithm>
#include <cmath>

#include "ttpx/error.hpp"

namespace ttpx {

LinearHead::LinearHead(std::size_t classes, std::size_t dimension)
    : classes(classes),
      dimension(dimension),
      weights(classes * dimension, 0.0),
      bias(classes, 0.0) {}

std::vector<double> LinearHead::logits(std::span<const float> x) const {
    if (x.size() != dimension) {
        raise(ErrorKind::Contract, "embedding dimension " + std::to_string(x.size()) +
                                       " does not match head dimension " +
                                       std::to_string(dimension));
    }
    std::vector<double> out(classes, 0.0);
    for (std::size_t c = 0; c < classes; ++c) {
        const double* row = weights.data() + c * dimension;
        double acc = bias[c];
        for (std::size_t j = 0; j < dimension; ++j) {
            acc += row[j] * static_cast<double>(x[j]);
        }
        out[c] = acc;
    }
    return out;
}

void LinearHead::quantize_to_f32() {
    for (double& w : weights) w = static_cast<double>(static_cast<float>(w));
    for (double& b : bias) b = static_cast<double>(static_cast<float>(b));
}

std::vector<double> softmax(const std::vector<double>& logits) {
    double max_logit = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - max_logit);
        sum += out[i];
    }
    for (double& p : out) p /= sum;
    return out;
}

double cross_entropy_with_gradient(const LinearHead& head, std::span<const float> x,
                                   std::size_t target, std::vector<double>& grad_weights,
                                   std::vector<double>& grad_bias) {
    std::vector<double> probs = softmax(head.logits(x));
    for (std::size_t c = 0; c < head.classes; ++c) {
        double delta = probs[c] - (c == target ? 1.0 : 0.0);  // dL/dlogit_c
        double* grow = grad_weights.data() + c * head.dimension;
        for (std::size_t j = 0; j < head.dimension; ++j) {
            grow[j] += delta * static_cast<double>(x[j]);
        }
        grad_bias[c] += delta;
    }
    return -std::log(std::max(probs[target], 1e-300));
}

double cross_entropy_loss(const LinearHead& head, std::span<const float> x, std::size_t target) {
    std::vector<double> probs = softmax(head.logits(x));
    return -std::log(std::max(probs[target], 1e-300));
}

AdamOptimizer::AdamOptimizer(std::size_t parameter_count, double learning_rate, double beta1,
                             double beta2, double epsilon)
    : learning_rate_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon),
      m_(parameter_count, 0.0),
      v_(parameter_count, 0.0) {}

void AdamOptimizer::step(std::span<double> parameters, std::span<const double> gradient) {
    if (parameters.size() != m_.size() || gradient.size() != m_.size()) {
        raise(ErrorKind::Contract, "optimizer parameter count mismatch");
    }
    ++t_;
    double correction1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    double correction2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < parameters.size(); ++i) {
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * gradient[i];
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * gradient[i] * gradient[i];
        double m_hat = m_[i] / correction1;
        double v_hat = v_[i] / correction2;
        parameters[i] -= learning_rate_ * m_hat / (std::sqrt(v_hat) + epsilon_);
    }
}

}  // namespace ttpx
