#pragma once

#include <string>

#include "adgkt/error.hpp"
#include "adgkt/matrix.hpp"

namespace adgkt::kernels::detail {

inline void check_matmul(std::size_t lhs_inner, std::size_t rhs_inner, const char* what) {
    if (lhs_inner != rhs_inner) {
        throw DimensionError(std::string(what) + ": inner dimensions " + std::to_string(lhs_inner) + " vs " +
                             std::to_string(rhs_inner));
    }
}

inline void check_square(const Matrix& m, const char* what) {
    if (m.rows() != m.cols()) {
        throw DimensionError(std::string(what) + ": expected square matrix, got " + std::to_string(m.rows()) +
                             "x" + std::to_string(m.cols()));
    }
}

}  // namespace adgkt::kernels::detail
