#include "adgkt/metrics.hpp"

#include <string>

#include "adgkt/error.hpp"

namespace adgkt {

ConfusionMatrix::ConfusionMatrix(std::size_t classes) : classes_(classes), counts_(classes * classes, 0) {
    if (classes == 0) throw ConfigError("ConfusionMatrix: need at least one class");
}

void ConfusionMatrix::accumulate(std::size_t true_label, std::size_t pred_label) {
    if (true_label >= classes_ || pred_label >= classes_) {
        throw IndexError("ConfusionMatrix: label (" + std::to_string(true_label) + ", " + std::to_string(pred_label) +
                         ") out of range for " + std::to_string(classes_) + " classes");
    }
    ++counts_[true_label * classes_ + pred_label];
    ++total_;
}

std::uint64_t ConfusionMatrix::count(std::size_t true_label, std::size_t pred_label) const {
    if (true_label >= classes_ || pred_label >= classes_) throw IndexError("ConfusionMatrix: index out of range");
    return counts_[true_label * classes_ + pred_label];
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t k) const {
    std::uint64_t s = 0;
    for (std::size_t j = 0; j < classes_; ++j) s += count(k, j);
    return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t k) const {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < classes_; ++i) s += count(i, k);
    return s;
}

namespace {

void require_nonempty(const ConfusionMatrix& cm, const char* what) {
    if (cm.total() == 0) throw MetricError(std::string(what) + ": confusion matrix is empty");
}

}  // namespace

double overall_accuracy(const ConfusionMatrix& cm) {
    require_nonempty(cm, "overall_accuracy");
    std::uint64_t trace = 0;
    for (std::size_t k = 0; k < cm.classes(); ++k) trace += cm.count(k, k);
    return static_cast<double>(trace) / static_cast<double>(cm.total());
}

double average_accuracy(const ConfusionMatrix& cm) {
    double sum = 0.0;
    for (std::size_t k = 0; k < cm.classes(); ++k) {
        const std::uint64_t support = cm.row_sum(k);
        if (support == 0) throw MetricError("average_accuracy: class " + std::to_string(k) + " has no samples");
        sum += static_cast<double>(cm.count(k, k)) / static_cast<double>(support);
    }
    return sum / static_cast<double>(cm.classes());
}

double chance_agreement(const ConfusionMatrix& cm) {
    require_nonempty(cm, "chance_agreement");
    // Integer numerator keeps small fixtures exact.
    std::uint64_t num = 0;
    for (std::size_t k = 0; k < cm.classes(); ++k) num += cm.row_sum(k) * cm.col_sum(k);
    const double total = static_cast<double>(cm.total());
    return static_cast<double>(num) / (total * total);
}

double cohen_kappa(const ConfusionMatrix& cm) {
    const double po = overall_accuracy(cm);
    const double pe = chance_agreement(cm);
    if (pe >= 1.0) return 0.0;
    return (po - pe) / (1.0 - pe);
}

}  // namespace adgkt
