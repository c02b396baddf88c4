#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ttpx {

/// Linear classification head over sentence embeddings: logits = W x + b,
/// W row-major (classes x dimension). Weights are double internally; the
/// serialized artifact stores 32-bit floats, and fine-tuning quantizes its
/// result accordingly so save/load round-trips are bit-exact.
struct LinearHead {
    std::size_t classes = 0;
    std::size_t dimension = 0;
    std::vector<double> weights;  // classes * dimension
    std::vector<double> bias;     // classes

    LinearHead() = default;
    LinearHead(std::size_t classes, std::size_t dimension);

    std::vector<double> logits(std::span<const float> x) const;

    /// Rounds every parameter to the nearest 32-bit float value.
    void quantize_to_f32();
};

/// Numerically stable softmax (shift by max before exponentiation).
std::vector<double> softmax(const std::vector<double>& logits);

/// Cross-entropy loss for one example and its analytic gradient with respect
/// to the head parameters. `grad_weights`/`grad_bias` are accumulated into
/// (callers zero them per batch).
double cross_entropy_with_gradient(const LinearHead& head, std::span<const float> x,
                                   std::size_t target, std::vector<double>& grad_weights,
                                   std::vector<double>& grad_bias);

/// Loss only, for finite-difference checks.
double cross_entropy_loss(const LinearHead& head, std::span<const float> x, std::size_t target);

// Adam with the usual bias-corrected moment estimates.
class AdamOptimizer {
public:
    AdamOptimizer(std::size_t parameter_count, double learning_rate, double beta1 = 0.9,
                  double beta2 = 0.999, double epsilon = 1e-8);

    /// One update over a flat parameter view given a same-length gradient.
    void step(std::span<double> parameters, std::span<const double> gradient);

private:
    double learning_rate_;
    double beta1_;
    double beta2_;
    double epsilon_;
    std::uint64_t t_ = 0;
    std::vector<double> m_;
    std::vector<double> v_;
};

}  // namespace ttpx
