#include "hemoda/rheology.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hemoda {

FluidModel FluidModel::newtonian(double mu, double density) {
  FluidModel m;
  m.kind = Rheology::kNewtonian;
  m.mu = mu;
  m.density = density;
  return m;
}

FluidModel FluidModel::casson(double tau0, double mu_inf, double density) {
  FluidModel m;
  m.kind = Rheology::kCasson;
  m.tau0 = tau0;
  m.mu_inf = mu_inf;
  m.density = density;
  return m;
}

void FluidModel::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(density)) throw std::invalid_argument("density must be positive");
  if (kind == Rheology::kNewtonian && !positive(mu))
    throw std::invalid_argument("viscosity mu must be positive");
  if (kind == Rheology::kCasson &&
      (!positive(tau0) || !positive(mu_inf) || !positive(gamma_dot_min)))
    throw std::invalid_argument("Casson tau0, mu_inf and gamma_dot_min must be positive");
}

double casson_viscosity(double gamma_dot, const FluidModel& model) {
  const double g = std::max(gamma_dot, model.gamma_dot_min);
  return model.tau0 / g + std::sqrt(model.mu_inf * model.tau0) / std::sqrt(g) + model.mu_inf;
}

double effective_viscosity(double gamma_dot, const FluidModel& model) {
  return model.kind == Rheology::kNewtonian ? model.mu : casson_viscosity(gamma_dot, model);
}

}  // namespace hemoda
