#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>

namespace irsbf {

using Scalar  = double;
using Complex = std::complex<Scalar>;

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr Scalar kPi = 3.14159265358979323846;

inline Scalar dbm_to_watt(Scalar dbm) { return std::pow(Scalar(10), dbm / 10) * Scalar(1e-3); }
inline Scalar db_to_linear(Scalar db) { return std::pow(Scalar(10), db / 10); }

}  // namespace irsbf
