#pragma once

#include <random>

#include <Eigen/Core>

namespace gdg {

/// States, goals and actions. Double precision at the environment boundary;
/// learners convert to single precision internally.
using RealVec = Eigen::VectorXd;

using Rng = std::mt19937_64;

}  // namespace gdg
