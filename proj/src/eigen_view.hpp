#pragma once

#include <Eigen/Core>

#include "rlab/mathcore.hpp"

namespace rlab::detail {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatView = Eigen::Map<RowMajor>;
using ConstMatView = Eigen::Map<const RowMajor>;
using ConstVecView = Eigen::Map<const Eigen::VectorXd>;
using VecView = Eigen::Map<Eigen::VectorXd>;

inline MatView view(Matrix& m) {
  return MatView(m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
}
inline ConstMatView view(const Matrix& m) {
  return ConstMatView(m.data(), static_cast<Eigen::Index>(m.rows()),
                      static_cast<Eigen::Index>(m.cols()));
}
inline ConstVecView view(std::span<const double> v) {
  return ConstVecView(v.data(), static_cast<Eigen::Index>(v.size()));
}
inline VecView view(std::span<double> v) {
  return VecView(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace rlab::detail
