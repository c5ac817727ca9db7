#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gia {

using Real = double;
using Index = std::int64_t;

/// Node-major dense storage: one row per node, so aggregation reads contiguous rows.
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<Real, 1, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using IndexList = std::vector<Index>;

/// Raised for every contract violation in the library (bad input, infeasible request).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw Error(message);
}

/// Cosine similarity with the zero-vector convention: 0 when either side vanishes.
template <typename DerivedA, typename DerivedB>
Real cosine(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    const Real na = a.norm();
    const Real nb = b.norm();
    if (na == Real(0) || nb == Real(0)) return Real(0);
    return a.cwiseProduct(b).sum() / (na * nb);
}

}  // namespace gia
