#pragma once

#include <Eigen/Dense>

namespace glaudio {

// Node-indexed data (one row per vertex). Row-major so that a vertex's
// feature vector is contiguous.
using NodeMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace glaudio
