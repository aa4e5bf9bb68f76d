#ifndef TVMPO_TYPES_HPP
#define TVMPO_TYPES_HPP

#include <complex>
#include <Eigen/Dense>

namespace tvmpo {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kAmplitudeFloor = 1e-300;

}  // namespace tvmpo

#endif
