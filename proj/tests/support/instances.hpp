#pragma once

// Seeded random problem instances shared by the unit and acceptance suites.

#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "scw/core.hpp"
#include "scw/rng.hpp"

namespace scw::testing {

/// Random SPD covariance with eigenvalues bounded away from zero.
inline Eigen::MatrixXd random_spd(Eigen::Index d, Rng& rng) {
  Eigen::MatrixXd a(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = rng.gaussian();
  }
  Eigen::MatrixXd s = a * a.transpose() / static_cast<double>(d);
  s += 0.3 * Eigen::MatrixXd::Identity(d, d);
  // Keep storage bitwise symmetric, as the library maintains it.
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = j + 1; i < d; ++i) s(j, i) = s(i, j);
  }
  return s;
}

inline GaussianState random_state(Eigen::Index d, Rng& rng, double mean_scale = 1.0) {
  GaussianState state = GaussianState::identity(d, CovMode::Full);
  state.cov = random_spd(d, rng);
  for (Eigen::Index i = 0; i < d; ++i) state.mean[i] = mean_scale * rng.gaussian();
  return state;
}

/// Dense random example; regenerated until clearly nonzero.
inline Example random_example(Eigen::Index d, Rng& rng) {
  std::vector<Feature> feats;
  double norm = 0.0;
  do {
    feats.clear();
    norm = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double value = rng.gaussian();
      feats.push_back({static_cast<std::uint32_t>(i), value});
      norm += value * value;
    }
  } while (norm < 1e-6);
  return Example::make(std::move(feats), +1);
}

inline double min_eigenvalue(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().minCoeff();
}

inline Eigen::VectorXd to_dense(const Example& x, Eigen::Index d) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(d);
  for (const Feature& f : x.features) out[f.index] = f.value;
  return out;
}

}  // namespace scw::testing
