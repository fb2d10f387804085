#include "dendrite/constitutive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dendrite/error.hpp"

namespace dendrite {

ModelParameters ModelParameters::nondimensional() {
  ModelParameters p;
  p.rho0 = 1.0;
  p.mu = 1.0;
  p.mobility = 0.1;
  p.delta = 1.0;
  p.eps0 = 1.0;
  p.D_S = 0.1;
  p.D_L = 1.0;
  p.sigma_A = 0.5;
  p.sigma_B = 1.0;
  return p;
}

void ModelParameters::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ValidationError(std::string("parameters: ") + name + " must be positive");
    }
  };
  positive(rho0, "rho0");
  positive(mu, "mu");
  positive(mobility, "mobility");
  positive(delta, "delta");
  positive(eps0, "eps0");
  positive(D_S, "D_S");
  positive(D_L, "D_L");
  if (!(gamma >= 0.0)) throw ValidationError("parameters: gamma must be non-negative");
  if (k < 2) throw ValidationError("parameters: k must be an integer >= 2");
  if (!(anisotropy_regularity(*this) > 0.0)) {
    throw ValidationError("parameters: eta + eta'' is not positive for every angle");
  }
}

EtaValues eta(double theta, const ModelParameters& p) {
  const double kt = p.k * theta;
  const double c = std::cos(kt);
  const double s = std::sin(kt);
  return {p.eps0 * (1.0 + p.gamma * c), -p.eps0 * p.gamma * p.k * s,
          -p.eps0 * p.gamma * p.k * p.k * c};
}

double angle_of_gradient(const Vec2& grad_psi) {
  if (grad_psi.norm() <= kGradientFloor) return 0.0;
  return std::atan2(grad_psi.y(), grad_psi.x());
}

Mat2 anisotropy_matrix(const Vec2& grad_psi, const ModelParameters& p) {
  const EtaValues e = eta(angle_of_gradient(grad_psi), p);
  const double diag = e.value * e.value;
  const double off = e.value * e.d1;
  Mat2 a;
  a << diag, -off, off, diag;
  return p.mobility * a;
}

Mat2 anisotropy_flux_jacobian(const Vec2& grad_psi, const ModelParameters& p) {
  const double norm2 = grad_psi.squaredNorm();
  const EtaValues e = eta(angle_of_gradient(grad_psi), p);
  Mat2 a;
  a << e.value * e.value, -e.value * e.d1, e.value * e.d1, e.value * e.value;
  if (std::sqrt(norm2) <= kGradientFloor) return p.mobility * a;
  const double s = 2.0 * e.value * e.d1;
  const double w = e.d1 * e.d1 + e.value * e.d2;
  Mat2 da;
  da << s, -w, w, s;
  const Vec2 dtheta(-grad_psi.y() / norm2, grad_psi.x() / norm2);
  return p.mobility * (a + (da * grad_psi) * dtheta.transpose());
}

double anisotropy_regularity(const ModelParameters& p, int n) {
  double lowest = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const EtaValues e = eta(2.0 * std::numbers::pi * i / n, p);
    lowest = std::min(lowest, e.value + e.d2);
  }
  return lowest;
}

ClosureValues closures(double psi, const ModelParameters& p) {
  ClosureValues v;
  // Outside [0, 1] the well continues with its quadratic Taylor tails and
  // pbar is held at 0 or 1. Both extensions keep the second derivative
  // continuous for the quintic (C1 for the cubic smoothing).
  const double s = std::clamp(psi, 0.0, 1.0);
  const double q = 1.0 - s;
  if (p.well == WellKind::double_well) {
    if (psi < 0.0) {
      v.g = psi * psi;
      v.dg = 2.0 * psi;
      v.d2g = 2.0;
    } else if (psi > 1.0) {
      v.g = (psi - 1.0) * (psi - 1.0);
      v.dg = 2.0 * (psi - 1.0);
      v.d2g = 2.0;
    } else {
      v.g = s * s * q * q;
      v.dg = 2.0 * s * q * (1.0 - 2.0 * s);
      v.d2g = 2.0 * (1.0 - 6.0 * s + 6.0 * s * s);
    }
  }
  const bool inside = psi >= 0.0 && psi <= 1.0;
  if (p.smoothing == SmoothingKind::quintic) {
    v.pbar = s * s * s * (6.0 * s * s - 15.0 * s + 10.0);
    v.dpbar = inside ? 30.0 * s * s * q * q : 0.0;
    v.d2pbar = inside ? 60.0 * s * q * (1.0 - 2.0 * s) : 0.0;
  } else {
    v.pbar = s * s * (3.0 - 2.0 * s);
    v.dpbar = inside ? 6.0 * s * q : 0.0;
    v.d2pbar = inside ? 6.0 - 12.0 * s : 0.0;
  }
  if (p.buoyancy == BuoyancyKind::linear) {
    v.a1 = psi;
    v.da1 = 1.0;
  } else {
    v.a1 = 1.0;
    v.da1 = 0.0;
  }
  if (p.forcing == ForcingKind::gravity) {
    v.f = psi * p.G;
    v.df = p.G;
  }
  return v;
}

Coefficients coefficients(double psi, double c, const ModelParameters& p) {
  const ClosureValues cl = closures(psi, p);
  Coefficients k;
  k.D = p.D_S + cl.pbar * (p.D_L - p.D_S);
  k.dD_dpsi = cl.dpbar * (p.D_L - p.D_S);
  k.b = p.sigma_A + psi * (p.sigma_B - p.sigma_A);
  k.db_dpsi = p.sigma_B - p.sigma_A;

  k.A1 = p.beta_c * cl.a1 * c * p.G + p.zeta * cl.f;
  k.dA1_dpsi = p.beta_c * cl.da1 * c * p.G + p.zeta * cl.df;
  k.dA1_dc = p.beta_c * cl.a1 * p.G;

  const double l1 = p.lambda1(c);
  const double l2 = p.lambda2(c);
  const double dl1 = p.lambda1.slope;
  const double dl2 = p.lambda2.slope;
  const double d = p.delta;
  k.A2 = p.mobility * (l1 / (d * d) * cl.dg + l2 / d * cl.dpbar);
  k.dA2_dpsi = p.mobility * (l1 / (d * d) * cl.d2g + l2 / d * cl.d2pbar);
  k.dA2_dc = p.mobility * (dl1 / (d * d) * cl.dg + dl2 / d * cl.dpbar);

  // A3 = alpha0 D(psi) c (1 - c) h(psi) with h = lambda1'/delta g' - lambda2' pbar'
  // (lambda_i affine, so h has no c-dependence).
  const double h = dl1 / d * cl.dg - dl2 * cl.dpbar;
  const double dh = dl1 / d * cl.d2g - dl2 * cl.d2pbar;
  const double cc = c * (1.0 - c);
  k.A3 = p.alpha0 * k.D * cc * h;
  k.dA3_dpsi = p.alpha0 * cc * (k.dD_dpsi * h + k.D * dh);
  k.dA3_dc = p.alpha0 * k.D * (1.0 - 2.0 * c) * h;
  return k;
}

Mat2 lorentz_operator(const ModelParameters& p) {
  return p.B * p.B.transpose() - p.B.squaredNorm() * Mat2::Identity();
}

Vec2 lorentz(const Vec2& u, double psi, const ModelParameters& p) {
  const double b = p.sigma_A + psi * (p.sigma_B - p.sigma_A);
  return b * (u.dot(p.B) * p.B - p.B.squaredNorm() * u);
}

}  // namespace dendrite
