#pragma once

#include <cmath>

#include <Eigen/Core>

namespace dendrite {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// lambda(c) = value0 + slope * c.
struct AffineCoefficient {
  double value0 = 1.0;
  double slope = 1.0;

  [[nodiscard]] double operator()(double c) const { return value0 + slope * c; }
};

/// Selectable closures for the functions the model leaves open.
enum class WellKind { double_well, none };       // g(psi)
enum class SmoothingKind { quintic, cubic };     // pbar(psi)
enum class BuoyancyKind { linear, constant };    // a1(psi)
enum class ForcingKind { zero, gravity };        // f(psi)

/// Physical and model coefficients. Default values are the Ni-Cu set
/// (arithmetic means of the two species where both are listed).
struct ModelParameters {
  double rho0 = 7915.0;          // kg/m^3
  double mu = 2.3535e-6;         // Pa s
  double mobility = 1.0;         // M_psi
  double delta = 7.2486e-8;      // interface thickness, m
  double eps0 = 1.0;             // anisotropy scale
  double gamma = 0.04;           // anisotropy amplitude
  int k = 4;                     // mode number
  Vec2 B = Vec2(1.0, 1.0) / std::sqrt(2.0);  // tesla
  double D_S = 1e-13;            // m^2/s
  double D_L = 1e-9;             // m^2/s
  double sigma_A = 14.3e6;       // S/m
  double sigma_B = 59.6e6;       // S/m
  double beta_c = 1.0;
  double zeta = 0.0;
  double alpha0 = 1.0;
  Vec2 G = Vec2(0.0, -1.0);
  AffineCoefficient lambda1;
  AffineCoefficient lambda2;

  WellKind well = WellKind::double_well;
  SmoothingKind smoothing = SmoothingKind::quintic;
  BuoyancyKind buoyancy = BuoyancyKind::linear;
  ForcingKind forcing = ForcingKind::zero;

  // Carried for reference only; no implemented equation uses them.
  double melting_temperature = 1543.0;  // K
  double latent_heat = 2054e6;          // J/m^3
  double kinetic_coefficient = 3.6e-3;  // m/K/s
  double surface_energy = 0.33;         // J/m^2
  double molar_volume = 7.46e-6;        // m^3

  [[nodiscard]] static ModelParameters ni_cu() { return {}; }
  /// O(1) coefficients used by the manufactured-solution studies.
  [[nodiscard]] static ModelParameters nondimensional();

  /// Throws ValidationError when a positivity/regularity invariant fails.
  void validate() const;
};

struct EtaValues {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// eta(theta) = eps0 (1 + gamma cos(k theta)) and its first two derivatives.
[[nodiscard]] EtaValues eta(double theta, const ModelParameters& p);

/// Below this gradient magnitude the orientation angle is taken as 0.
inline constexpr double kGradientFloor = 1e-12;

/// atan2(psi_y, psi_x), or 0 when |grad psi| <= kGradientFloor.
[[nodiscard]] double angle_of_gradient(const Vec2& grad_psi);

/// A_g = M_psi [[eta^2, -eta eta'], [eta eta', eta^2]] at theta(grad_psi).
[[nodiscard]] Mat2 anisotropy_matrix(const Vec2& grad_psi, const ModelParameters& p);

/// d(A_g(g) g)/dg, including the dependence of theta on g. The
/// theta-derivative part is dropped when |g| <= kGradientFloor.
[[nodiscard]] Mat2 anisotropy_flux_jacobian(const Vec2& grad_psi, const ModelParameters& p);

/// min over an n-point grid of theta in [0, 2 pi) of eta + eta''.
[[nodiscard]] double anisotropy_regularity(const ModelParameters& p, int n = 10000);

/// Closure functions evaluated at psi, with first and second derivatives.
struct ClosureValues {
  double g = 0.0, dg = 0.0, d2g = 0.0;
  double pbar = 0.0, dpbar = 0.0, d2pbar = 0.0;
  double a1 = 0.0, da1 = 0.0;
  Vec2 f = Vec2::Zero(), df = Vec2::Zero();
};

[[nodiscard]] ClosureValues closures(double psi, const ModelParameters& p);

/// Model coefficients at (psi, c) and their partial derivatives.
struct Coefficients {
  double D = 0.0, dD_dpsi = 0.0;
  double b = 0.0, db_dpsi = 0.0;
  Vec2 A1 = Vec2::Zero(), dA1_dpsi = Vec2::Zero(), dA1_dc = Vec2::Zero();
  double A2 = 0.0, dA2_dpsi = 0.0, dA2_dc = 0.0;
  double A3 = 0.0, dA3_dpsi = 0.0, dA3_dc = 0.0;
};

[[nodiscard]] Coefficients coefficients(double psi, double c, const ModelParameters& p);

/// b(psi) ((u x B) x B) restricted to the plane: b [(u.B) B - |B|^2 u].
[[nodiscard]] Vec2 lorentz(const Vec2& u, double psi, const ModelParameters& p);

/// Matrix L with lorentz(u, psi) = b(psi) L u, i.e. L = B B^T - |B|^2 I.
[[nodiscard]] Mat2 lorentz_operator(const ModelParameters& p);

}  // namespace dendrite
