#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace adgkt {

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t classes);

    void accumulate(std::size_t true_label, std::size_t pred_label);

    std::size_t classes() const noexcept { return classes_; }
    std::uint64_t count(std::size_t true_label, std::size_t pred_label) const;
    std::uint64_t total() const noexcept { return total_; }
    std::uint64_t row_sum(std::size_t k) const;
    std::uint64_t col_sum(std::size_t k) const;

private:
    std::size_t classes_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t total_ = 0;
};

/// trace / total
double overall_accuracy(const ConfusionMatrix& cm);

/// Mean per-class recall. Throws MetricError naming a class with no samples.
double average_accuracy(const ConfusionMatrix& cm);

/// sum_k rowsum_k * colsum_k / total^2
double chance_agreement(const ConfusionMatrix& cm);

/// (p_o - p_e) / (1 - p_e); 0 when p_e == 1.
double cohen_kappa(const ConfusionMatrix& cm);

}  // namespace adgkt
