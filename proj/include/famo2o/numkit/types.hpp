#pragma once

#include <Eigen/Dense>

namespace famo2o {
namespace numkit {

template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using Mat = MatX<double>;
using Vec = VecX<double>;
using Row = RowX<double>;
using Index = Eigen::Index;

/// Counts values that had to be clamped into a legal range (out-of-space
/// balance coefficients, out-of-box actions). Clamping is silent apart from
/// this counter.
struct ClampCounter {
  unsigned long long count = 0;
};

}  // namespace numkit
}  // namespace famo2o
