#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <cstdint>
#include <stdexcept>

namespace gala {

using Vec3   = Eigen::Vector3d;
using Mat3   = Eigen::Matrix3d;
using Quat   = Eigen::Quaterniond;
using VecXd  = Eigen::VectorXd;
using VecXi  = Eigen::VectorXi;
using MatX3  = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using MatX3i = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;

// Truncation bound of the stored signed distances. The representation's whole
// value range ([-kSdfBound, kSdfBound]) and the outside-coverage default hang
// off this constant.
inline constexpr double kSdfBound = 0.1;

// Value reported for query points not covered by any local grid.
inline constexpr double kOutsideValue = kSdfBound;

// Smallest admissible half-extent for root voxels and grid axes.
inline constexpr double kMinScale = 1e-4;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A documented precondition was violated (bad mesh, bad flag, bad header).
struct InvalidInput : Error {
    using Error::Error;
};

// A numeric stage produced non-finite or otherwise unusable results.
struct NumericError : Error {
    using Error::Error;
};

// Filesystem or serialization failure.
struct IoError : Error {
    using Error::Error;
};

} // namespace gala
