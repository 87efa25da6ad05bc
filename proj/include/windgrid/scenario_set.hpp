#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace windgrid {

// S x T wind-availability matrix in MW with provenance and seed.
struct ScenarioSet {
  Eigen::MatrixXd scenarios;   // S x T
  Eigen::VectorXd weights;     // length S, nonnegative, sums to 1
  std::string provenance;      // "gan" or "bootstrap"
  std::uint64_t seed = 0;

  int count() const { return static_cast<int>(scenarios.rows()); }
  int horizon() const { return static_cast<int>(scenarios.cols()); }
};

}  // namespace windgrid
