#include <cmath>
#include <sstream>
#include <stdexcept>

#include "copmed/types.hpp"

namespace copmed {

std::string to_string(PriorMode mode) {
  return mode == PriorMode::kUniform ? "uniform" : "rho_constrained";
}

std::optional<PriorMode> prior_mode_from_string(const std::string& s) {
  if (s == "uniform") return PriorMode::kUniform;
  if (s == "rho_constrained") return PriorMode::kRhoConstrained;
  return std::nullopt;
}

int Dataset::n_arm(int z) const {
  int c = 0;
  for (const auto& u : units)
    if (u.z == z) ++c;
  return c;
}

namespace {

std::string unit_name(const Dataset& d, int i) {
  if (i < static_cast<int>(d.ids.size()) && !d.ids[i].empty())
    return "unit '" + d.ids[i] + "' (index " + std::to_string(i) + ")";
  return "unit " + std::to_string(i);
}

}  // namespace

ValidationResult validate_dataset(const Dataset& raw) {
  ValidationResult result;
  auto& errors = result.errors;

  if (raw.units.empty()) {
    errors.push_back("dataset has no units");
    return result;
  }
  if (raw.K < 1) errors.push_back("K must be >= 1");
  if (raw.P < 0) errors.push_back("P must be >= 0");

  int n0 = 0, n1 = 0;
  for (int i = 0; i < raw.n(); ++i) {
    const auto& u = raw.units[i];
    if (u.z != 0 && u.z != 1) {
      errors.push_back(unit_name(raw, i) + ": z must be 0 or 1");
      continue;
    }
    (u.z == 0 ? n0 : n1)++;
    if (static_cast<int>(u.m.size()) != raw.K)
      errors.push_back(unit_name(raw, i) + ": expected " + std::to_string(raw.K) +
                       " mediators, found " + std::to_string(u.m.size()));
    if (static_cast<int>(u.x.size()) != raw.P)
      errors.push_back(unit_name(raw, i) + ": expected " + std::to_string(raw.P) +
                       " covariates, found " + std::to_string(u.x.size()));
    if (!std::isfinite(u.y)) errors.push_back(unit_name(raw, i) + ": outcome not finite");
    for (int k = 0; k < u.m.size(); ++k) {
      if (!std::isfinite(u.m(k))) {
        errors.push_back(unit_name(raw, i) + ": mediator " + std::to_string(k + 1) +
                         " not finite");
      } else if (u.m(k) < raw.lower_bound) {
        std::ostringstream msg;
        msg << unit_name(raw, i) << ": mediator " << (k + 1) << " value " << u.m(k)
            << " below support bound " << raw.lower_bound;
        errors.push_back(msg.str());
      }
    }
    for (int p = 0; p < u.x.size(); ++p)
      if (!std::isfinite(u.x(p)))
        errors.push_back(unit_name(raw, i) + ": covariate " + std::to_string(p + 1) +
                         " not finite");
  }
  if (n0 == 0) errors.push_back("empty control arm (no units with z=0)");
  if (n1 == 0) errors.push_back("empty treated arm (no units with z=1)");

  if (errors.empty()) result.dataset = raw;
  return result;
}

void ChainConfig::validate() const {
  if (n_burn >= n_iter) throw std::invalid_argument("ChainConfig: n_burn must be < n_iter");
  if (thin < 1) throw std::invalid_argument("ChainConfig: thin must be >= 1");
  if (k_max < 2) throw std::invalid_argument("ChainConfig: k_max must be >= 2");
  if (c_d < 0 || c_a < 0) throw std::invalid_argument("ChainConfig: thresholds must be >= 0");
  if (outcome_truncation < 2)
    throw std::invalid_argument("ChainConfig: outcome_truncation must be >= 2");
  if (n_mc < 1) throw std::invalid_argument("ChainConfig: n_mc must be >= 1");
  if (sigma_t_factor < 0) throw std::invalid_argument("ChainConfig: sigma_t_factor must be >= 0");
  if (sensitivity) {
    for (double e : sensitivity->epsilons)
      if (!(e > 0)) throw std::invalid_argument("ChainConfig: epsilon must be > 0");
    for (const auto& chi : sensitivity->chi_vectors)
      for (int k = 0; k < chi.size(); ++k)
        if (!(chi(k) >= 1.0))
          throw std::invalid_argument("ChainConfig: chi entries must be >= 1");
  }
}

}  // namespace copmed
