#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "copmed/effects.hpp"
#include "copmed/types.hpp"

namespace copmed {

// Standardized treatment-effect sizes on the mediators for one unit, plus the
// epsilon-scale threshold factors implied by the difference correlations.
struct DStatistics {
  Eigen::VectorXd d_single;           // K
  Eigen::MatrixXd d_pair;             // strict upper triangle
  double d_all = 0;
  Eigen::MatrixXd pair_thresh_factor; // sqrt(2 + 2 r_jk), strict upper triangle
  double all_thresh_factor = 0;       // sqrt(K + 2 sum r_jk)
};

// delta: the unit's cross-world mediator differences; S: their covariance.
DStatistics d_statistics(const Eigen::VectorXd& delta, const Eigen::MatrixXd& S);

// Mixture of normals in y tilted by exp(t * (y - ybar) / sd): component
// N(m, s2) shifts to N(m + a s2, s2) with a = t / sd, weight scaled by
// exp(a (m - ybar) + a^2 s2 / 2), then renormalized.  t = log(chi_product).
struct TiltedMixture {
  std::vector<double> w, mean, var;
  double density(double y) const;
  double mixture_mean() const;
};

TiltedMixture tilted_conditional_density(const std::vector<double>& w,
                                         const std::vector<double>& mean,
                                         const std::vector<double>& var,
                                         double chi_product, double ybar, double sd);

struct ChiBounds {
  double lower = 1.0;       // per-coordinate bound
  double product_upper = 0; // bound on the product of the chi's
  bool bounded = true;      // false when the reference subpopulation is empty
  int subpop_count = 0;
};

// Admissible (chi_1..chi_K) region from the density ratio of the two arms'
// conditional outcome densities at y_star over the units whose full mediator
// effect exceeds the epsilon threshold.  y_star < 0 requests the default
// (mean + sd of the observed z=1 outcomes).
ChiBounds chi_bounds(const PosteriorDraw& draw, const Dataset& data,
                     const EffectOptions& opt, double epsilon, double y_star = -1.0);

struct SensitivityCell {
  double epsilon;
  Eigen::VectorXd chi;
  std::vector<SummaryRow> summary;
  EffectTable per_draw;
};

// Recomputes the mediation effects over the (epsilon, chi) grid.
std::vector<SensitivityCell> sensitivity_effects(const std::vector<PosteriorDraw>& draws,
                                                 const Dataset& data,
                                                 const EffectOptions& opt,
                                                 const SensitivitySpec& spec);

}  // namespace copmed
