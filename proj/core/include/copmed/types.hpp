#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace copmed {

enum class PriorMode { kRhoConstrained, kUniform };
enum class MediatorTransform { kNone, kLog };

std::string to_string(PriorMode mode);
std::optional<PriorMode> prior_mode_from_string(const std::string& s);

// One analysis unit: treatment arm, K mediator values on the modeled scale,
// outcome, covariates.
struct ObservedUnit {
  int z = 0;
  Eigen::VectorXd m;
  double y = 0.0;
  Eigen::VectorXd x;
};

struct Dataset {
  std::vector<ObservedUnit> units;
  int K = 0;
  int P = 0;
  double lower_bound = 0.0;
  // How each mediator column was transformed at ingestion; outputs are always
  // on the modeled scale and carry these tags as labels.
  std::vector<MediatorTransform> transforms;
  std::vector<std::string> ids;

  int n() const { return static_cast<int>(units.size()); }
  int n_arm(int z) const;
};

struct ValidationResult {
  std::optional<Dataset> dataset;
  std::vector<std::string> errors;
  bool ok() const { return errors.empty(); }
};

// Checks every type invariant (finite fields, arm occupancy, support bound,
// shape consistency); returns the dataset unchanged iff all hold, otherwise a
// list naming each violating unit/field.  Idempotent on accepted datasets.
ValidationResult validate_dataset(const Dataset& raw);

struct SensitivitySpec {
  std::vector<double> epsilons;             // standard-deviation thresholds
  std::vector<Eigen::VectorXd> chi_vectors; // each length K, entries >= 1
};

struct ChainConfig {
  int n_iter = 10000;
  int n_burn = 2500;
  int thin = 5;
  int k_max = 8;       // marginal stick-breaking truncation
  std::uint64_t seed = 0;
  PriorMode prior_mode = PriorMode::kRhoConstrained;
  // Principal-strata thresholds as multiples of sigma_hat_k.
  double c_d = 0.25;
  double c_a = 0.25;
  std::optional<SensitivitySpec> sensitivity;

  // Resolved switches (see run metadata for the full list).
  bool bstar_appendix_f = false;  // b* = 100 a* instead of a* sigma_hat^2 / 2
  int outcome_truncation = 20;    // outcome stick-breaking truncation
  double sigma_t_factor = 0.5;    // step-3 proposal sd as multiple of margin sd
  int n_mc = 100;                 // counterfactual draws per unit per posterior draw
  bool nie_star = false;          // also emit the z=0-anchored NIE variants

  void validate() const;  // throws std::invalid_argument on a bad field
};

}  // namespace copmed
