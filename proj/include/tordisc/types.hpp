#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "numeric.hpp"

namespace tordisc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;
using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

inline Vec to_real(const IntVector& v) { return v.cast<double>(); }

/// Compensated dot product of two real vectors.
inline double dot2(const Vec& a, const Vec& b) {
    return dot2(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())),
                std::span<const double>(b.data(), static_cast<std::size_t>(b.size())));
}

}  // namespace tordisc
