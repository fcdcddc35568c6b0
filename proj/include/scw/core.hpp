#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "scw/probit.hpp"

namespace scw {

struct Feature {
  std::uint32_t index = 0;
  double value = 0.0;

  friend bool operator==(const Feature&, const Feature&) = default;
};

/// One sparse example of the online stream: features plus a binary label.
///
/// Feature indices are 0-based, strictly increasing, and all values finite.
struct Example {
  std::vector<Feature> features;
  int label = +1;

  static Example make(std::vector<Feature> features, int label) {
    if (label != +1 && label != -1) {
      throw InputError("Example: label must be -1 or +1, got " + std::to_string(label));
    }
    for (std::size_t i = 0; i < features.size(); ++i) {
      if (!std::isfinite(features[i].value)) {
        throw InputError("Example: non-finite feature value at index " +
                         std::to_string(features[i].index));
      }
      if (i > 0 && features[i].index <= features[i - 1].index) {
        throw InputError("Example: feature indices must be strictly increasing");
      }
    }
    Example ex;
    ex.features = std::move(features);
    ex.label = label;
    return ex;
  }

  bool empty() const { return features.empty(); }

  /// 0-based index one past the largest feature index (0 when empty).
  std::uint32_t index_bound() const {
    return features.empty() ? 0 : features.back().index + 1;
  }

  double norm_sq() const {
    double s = 0.0;
    for (const Feature& f : features) s += f.value * f.value;
    return s;
  }

  bool is_zero() const {
    for (const Feature& f : features) {
      if (f.value != 0.0) return false;
    }
    return true;
  }

  friend bool operator==(const Example&, const Example&) = default;
};

enum class CovMode { Full, Diagonal };

inline std::string to_string(CovMode m) {
  return m == CovMode::Full ? "full" : "diag";
}

/// Gaussian belief over weight vectors: mean and covariance.
///
/// Full mode stores the dense symmetric matrix in `cov`; Diagonal mode keeps
/// only the diagonal in `var`. Both start as the identity.
struct GaussianState {
  Eigen::VectorXd mean;
  CovMode mode = CovMode::Full;
  Eigen::MatrixXd cov;  // Full mode only
  Eigen::VectorXd var;  // Diagonal mode only

  static GaussianState identity(Eigen::Index d, CovMode mode) {
    if (d < 1) throw InputError("GaussianState: dimension must be >= 1");
    GaussianState s;
    s.mean = Eigen::VectorXd::Zero(d);
    s.mode = mode;
    if (mode == CovMode::Full) {
      s.cov = Eigen::MatrixXd::Identity(d, d);
    } else {
      s.var = Eigen::VectorXd::Ones(d);
    }
    return s;
  }

  Eigen::Index dim() const { return mean.size(); }
};

/// Learner hyperparameters with the probit-derived constants kept in sync:
/// phi = Phi^{-1}(eta), psi = 1 + phi^2/2, zeta = 1 + phi^2.
struct HyperParams {
  double c = 1.0;
  double eta = 0.75;
  double r = 1.0;
  double phi = 0.0;
  double psi = 1.0;
  double zeta = 1.0;

  static HyperParams make(double c, double eta, double r = 1.0) {
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw InputError("HyperParams: c must be positive, got " + std::to_string(c));
    }
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw InputError("HyperParams: r must be positive, got " + std::to_string(r));
    }
    HyperParams p;
    p.c = c;
    p.r = r;
    p.set_eta(eta);
    return p;
  }

  void set_eta(double value) {
    if (!(value > 0.5 && value < 1.0)) {
      throw InputError("HyperParams: eta must lie in (0.5, 1), got " +
                       std::to_string(value));
    }
    eta = value;
    phi = inv_norm_cdf(value);
    psi = 1.0 + 0.5 * phi * phi;
    zeta = 1.0 + phi * phi;
  }
};

/// Closed-form update coefficients and their intermediates.
struct UpdateCoefficients {
  double alpha = 0.0;
  double beta = 0.0;
  double v = 0.0;      // x' Sigma x before the update
  double m = 0.0;      // y (mu . x) before the update
  double u = 0.0;      // x' Sigma x after the update (closed form)
  double n = 0.0;      // SCW-II only: v + 1/(2C)
  double gamma = 0.0;  // SCW-II only
};

enum class LearnerKind {
  Perceptron,
  PA,
  PAI,
  PAII,
  CW,
  AROW,
  SCWI,
  SCWII,
};

inline std::string to_string(LearnerKind k) {
  switch (k) {
    case LearnerKind::Perceptron: return "perceptron";
    case LearnerKind::PA: return "pa";
    case LearnerKind::PAI: return "pa1";
    case LearnerKind::PAII: return "pa2";
    case LearnerKind::CW: return "cw";
    case LearnerKind::AROW: return "arow";
    case LearnerKind::SCWI: return "scw1";
    case LearnerKind::SCWII: return "scw2";
  }
  return "?";
}

inline LearnerKind parse_learner_kind(const std::string& name) {
  if (name == "perceptron") return LearnerKind::Perceptron;
  if (name == "pa") return LearnerKind::PA;
  if (name == "pa1" || name == "pa-1" || name == "pai") return LearnerKind::PAI;
  if (name == "pa2" || name == "pa-2" || name == "paii") return LearnerKind::PAII;
  if (name == "cw") return LearnerKind::CW;
  if (name == "arow") return LearnerKind::AROW;
  if (name == "scw1" || name == "scw-1" || name == "scwi") return LearnerKind::SCWI;
  if (name == "scw2" || name == "scw-2" || name == "scwii") return LearnerKind::SCWII;
  throw ConfigError("unknown algorithm '" + name + "'");
}

inline bool is_second_order(LearnerKind k) {
  return k == LearnerKind::CW || k == LearnerKind::AROW || k == LearnerKind::SCWI ||
         k == LearnerKind::SCWII;
}

struct StepOutcome {
  int predicted = +1;
  bool mistake = false;
  bool updated = false;
};

/// Counters for numeric-safety events plus the cumulative sum of alpha^2 v.
struct Diagnostics {
  std::uint64_t clamp_events = 0;  // covariance downdates clamped to keep SPD
  std::uint64_t floor_events = 0;  // sqrt arguments floored at zero
  double cum_alpha2v = 0.0;
};

inline double sparse_dot(const Eigen::VectorXd& dense, const Example& x) {
  double s = 0.0;
  for (const Feature& f : x.features) s += dense[f.index] * f.value;
  return s;
}

inline void check_dims(const GaussianState& state, const Example& x) {
  if (x.index_bound() > static_cast<std::uint32_t>(state.dim())) {
    throw InputError("example feature index " + std::to_string(x.index_bound() - 1) +
                     " exceeds model dimension " + std::to_string(state.dim()));
  }
}

/// sgn(mu . x) with sgn(0) fixed to +1 so mistake counts are deterministic.
inline int predict(const GaussianState& state, const Example& x) {
  check_dims(state, x);
  const double s = sparse_dot(state.mean, x);
  if (!std::isfinite(s)) throw NumericError("predict: non-finite score");
  return s >= 0.0 ? +1 : -1;
}

}  // namespace scw
