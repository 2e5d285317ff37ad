#pragma once

namespace hemoda {

enum class Rheology { kNewtonian, kCasson };

/// Blood rheology. Casson parameters follow the shear-thinning law
/// mu = tau0 / g + sqrt(mu_inf * tau0 / g) + mu_inf.
struct FluidModel {
  Rheology kind = Rheology::kNewtonian;
  double density = 1060.0;     // kg/m^3
  double mu = 0.0035;          // Pa s, Newtonian
  double tau0 = 0.005;         // Pa, Casson yield stress
  double mu_inf = 0.0035;      // Pa s, Casson high-shear limit
  double gamma_dot_min = 1e-3; // 1/s, regularization floor for the Casson law

  static FluidModel newtonian(double mu = 0.0035, double density = 1060.0);
  static FluidModel casson(double tau0 = 0.005, double mu_inf = 0.0035, double density = 1060.0);

  // Viscosity used for stability bounds: mu (Newtonian) or mu_inf (Casson).
  double nominal_viscosity() const { return kind == Rheology::kNewtonian ? mu : mu_inf; }
  void validate() const;

  friend bool operator==(const FluidModel&, const FluidModel&) = default;
};

double casson_viscosity(double gamma_dot, const FluidModel& model);

// Viscosity of the active rheology at a given shear rate.
double effective_viscosity(double gamma_dot, const FluidModel& model);

}  // namespace hemoda
