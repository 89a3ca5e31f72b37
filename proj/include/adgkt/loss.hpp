#pragma once

#include <cstddef>
#include <span>

#include "adgkt/matrix.hpp"

namespace adgkt {

using Labels = std::span<const std::size_t>;

/// Row-wise softmax of z / temperature, max-subtracted.
Matrix softmax(const Matrix& z, double temperature = 1.0);

/// Row-wise log-softmax of z / temperature.
Matrix log_softmax(const Matrix& z, double temperature = 1.0);

/// Mean over rows of -log p[label], with p clamped at 1e-12.
double cross_entropy(const Matrix& probs, Labels labels);

/// (p - onehot(y)) / n, the logit gradient of the batch-mean cross-entropy.
Matrix ce_logit_grad(const Matrix& probs, Labels labels);

struct LossGrad {
    double loss = 0.0;
    Matrix grad;
};

/// Softmax cross-entropy on raw logits and its gradient w.r.t. the logits.
LossGrad softmax_cross_entropy(const Matrix& logits, Labels labels);

std::size_t argmax(std::span<const double> v);

}  // namespace adgkt
