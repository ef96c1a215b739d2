#pragma once

#include <Eigen/Core>

namespace steinflow {

// Particle ensembles and Gram matrices are stored row-major: row i is
// particle i, so a particle's coordinates are contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace steinflow
