#pragma once

#include <vector>

#include <Eigen/Dense>

#include "infodesign/model.hpp"

namespace fixtures {

// Five parallel capped-linear paths sharing unit inflow.
inline infodesign::Network five_path_network() {
  const double xc[] = {0.15, 0.15, 0.175, 0.2, 0.2};
  const double mu[] = {2.0, 2.0, 3.0, 2.5, 4.0};
  const double t0[] = {8.0, 6.0, 5.0, 5.0, 2.0};
  std::vector<infodesign::Path> paths;
  for (int j = 0; j < 5; ++j) {
    paths.emplace_back(infodesign::FundamentalDiagram::capped_linear(mu[j], xc[j]),
                       infodesign::BprParams{t0[j], 1.5, 2.0});
  }
  return infodesign::Network(std::move(paths), 1.0);
}

inline Eigen::VectorXd published_slopes() {
  return (Eigen::VectorXd(5) << 0.2, -0.19, 0.2, 0.2, 0.0).finished();
}
inline Eigen::VectorXd published_offsets() {
  return (Eigen::VectorXd(5) << 6.84, 6.13, 6.05, 6.06, 6.0).finished();
}
inline Eigen::VectorXd published_target() {
  return (Eigen::VectorXd(5) << 0.0, 0.026, 0.056, 0.063, 0.156).finished();
}
inline Eigen::VectorXd published_routing() {
  return (Eigen::VectorXd(5) << 0.0, 0.052, 0.167, 0.158, 0.623).finished();
}

}  // namespace fixtures
