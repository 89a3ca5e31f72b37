#include "adgkt/loss.hpp"

#include <algorithm>
#include <cmath>

#include "adgkt/error.hpp"

namespace adgkt {

namespace {

void check_labels(const Matrix& m, Labels labels, const char* what) {
    if (labels.size() != m.rows()) {
        throw DimensionError(std::string(what) + ": " + std::to_string(labels.size()) + " labels for " +
                             std::to_string(m.rows()) + " rows");
    }
    for (std::size_t y : labels) {
        if (y >= m.cols()) {
            throw IndexError(std::string(what) + ": label " + std::to_string(y) + " out of range for " +
                             std::to_string(m.cols()) + " classes");
        }
    }
}

}  // namespace

Matrix softmax(const Matrix& z, double temperature) {
    Matrix out(z.rows(), z.cols());
    for (std::size_t i = 0; i < z.rows(); ++i) {
        auto in = z.row(i);
        auto o = out.row(i);
        const double mx = *std::max_element(in.begin(), in.end()) / temperature;
        double sum = 0.0;
        for (std::size_t k = 0; k < in.size(); ++k) {
            o[k] = std::exp(in[k] / temperature - mx);
            sum += o[k];
        }
        for (double& v : o) v /= sum;
    }
    return out;
}

Matrix log_softmax(const Matrix& z, double temperature) {
    Matrix out(z.rows(), z.cols());
    for (std::size_t i = 0; i < z.rows(); ++i) {
        auto in = z.row(i);
        auto o = out.row(i);
        const double mx = *std::max_element(in.begin(), in.end()) / temperature;
        double sum = 0.0;
        for (double v : in) sum += std::exp(v / temperature - mx);
        const double lse = mx + std::log(sum);
        for (std::size_t k = 0; k < in.size(); ++k) o[k] = in[k] / temperature - lse;
    }
    return out;
}

double cross_entropy(const Matrix& probs, Labels labels) {
    check_labels(probs, labels, "cross_entropy");
    if (probs.rows() == 0) throw DataError("cross_entropy: empty batch");
    double total = 0.0;
    for (std::size_t i = 0; i < probs.rows(); ++i) total -= std::log(std::max(probs(i, labels[i]), 1e-12));
    return total / static_cast<double>(probs.rows());
}

Matrix ce_logit_grad(const Matrix& probs, Labels labels) {
    check_labels(probs, labels, "ce_logit_grad");
    if (probs.rows() == 0) throw DataError("ce_logit_grad: empty batch");
    const double inv_n = 1.0 / static_cast<double>(probs.rows());
    Matrix g = probs;
    for (std::size_t i = 0; i < g.rows(); ++i) {
        g(i, labels[i]) -= 1.0;
        for (double& v : g.row(i)) v *= inv_n;
    }
    return g;
}

LossGrad softmax_cross_entropy(const Matrix& logits, Labels labels) {
    const Matrix p = softmax(logits);
    return {cross_entropy(p, labels), ce_logit_grad(p, labels)};
}

std::size_t argmax(std::span<const double> v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace adgkt
