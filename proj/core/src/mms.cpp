#include "dendrite/mms.hpp"

#include <cmath>
#include <numbers>

#include "dendrite/error.hpp"

namespace dendrite {

namespace {

constexpr double kPi = std::numbers::pi;

/// f, f', f'' of a one-dimensional factor.
struct Jet1 {
  double f = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

const Jet1 kOne{1.0, 0.0, 0.0};

/// Accumulates a * T(t) X(x) Y(y) into a FieldJet; dT is dT/dt.
void add_term(FieldJet& out, double a, double time, double dtime, const Jet1& X, const Jet1& Y) {
  out.value += a * time * X.f * Y.f;
  out.dx += a * time * X.d1 * Y.f;
  out.dy += a * time * X.f * Y.d1;
  out.dxx += a * time * X.d2 * Y.f;
  out.dxy += a * time * X.d1 * Y.d1;
  out.dyy += a * time * X.f * Y.d2;
  out.dt += a * dtime * X.f * Y.f;
}

// s (1 - s/L) (1 - 2 s/L)
Jet1 cubic_bump(double s, double L) {
  return {s - 3.0 * s * s / L + 2.0 * s * s * s / (L * L), 1.0 - 6.0 * s / L + 6.0 * s * s / (L * L),
          -6.0 / L + 12.0 * s / (L * L)};
}

// s^2 (1 - s/L)^2
Jet1 quartic_bump(double s, double L) {
  const double L2 = L * L;
  return {s * s - 2.0 * s * s * s / L + s * s * s * s / L2,
          2.0 * s - 6.0 * s * s / L + 4.0 * s * s * s / L2, 2.0 - 12.0 * s / L + 12.0 * s * s / L2};
}

Jet1 cos_k(double s, double k) { return {std::cos(k * s), -k * std::sin(k * s), -k * k * std::cos(k * s)}; }

ExactJets example1(double x, double y, double t) {
  const double L = 2.0 * kPi;
  const double T = std::exp(1.0 - t);
  const double dT = -T;
  const double scale = 2.0 / (L * L);
  ExactJets j;
  const double s2 = std::sin(2.0 * x);
  const double c2 = std::cos(2.0 * x);
  // sin^2 x and sin x cos x
  const Jet1 sin_sq{std::sin(x) * std::sin(x), s2, 2.0 * c2};
  const Jet1 sin_cos{0.5 * s2, c2, -2.0 * s2};
  add_term(j.u, scale, T, dT, sin_sq, cubic_bump(y, L));
  add_term(j.v, -scale, T, dT, sin_cos, quartic_bump(y, L));
  add_term(j.p, 1.0, T, dT, kOne, cos_k(y, 1.0));
  add_term(j.psi, 0.5, T, dT, cos_k(x, 1.0), cos_k(y, 1.0));
  add_term(j.psi, 0.5, T, dT, kOne, kOne);
  const Jet1 cos_plus_one{std::cos(y) + 1.0, -std::sin(y), -std::cos(y)};
  add_term(j.c, 4.0 * scale, T, dT, quartic_bump(x, L), cos_plus_one);
  return j;
}

ExactJets example2(double x, double y, double t) {
  const double T = std::exp(t - 1.0);
  const double dT = T;
  const double w = 2.0 * kPi;
  ExactJets j;
  const double s4 = std::sin(2.0 * w * y);
  const double c4 = std::cos(2.0 * w * y);
  // sin(w y) cos(w y) = sin(2 w y) / 2 and sin^2(w y)
  const Jet1 sin_cos{0.5 * s4, w * c4, -2.0 * w * w * s4};
  const Jet1 sin_sq{std::sin(w * y) * std::sin(w * y), w * s4, 2.0 * w * w * c4};
  // x (2x^2 - 3x + 1)
  const Jet1 xpoly{2.0 * x * x * x - 3.0 * x * x + x, 6.0 * x * x - 6.0 * x + 1.0, 12.0 * x - 6.0};
  add_term(j.u, 4.0 * kPi, T, dT, quartic_bump(x, 1.0), sin_cos);
  add_term(j.v, -2.0, T, dT, xpoly, sin_sq);
  add_term(j.p, 1.0, T, dT, cos_k(x, w), kOne);
  add_term(j.psi, 0.25, T, dT, cos_k(x, w), kOne);
  add_term(j.psi, 0.25, T, dT, kOne, cos_k(y, w));
  add_term(j.psi, 0.5, T, dT, kOne, kOne);
  add_term(j.c, 8.0, T, dT, quartic_bump(x, 1.0), kOne);
  add_term(j.c, 8.0, T, dT, kOne, quartic_bump(y, 1.0));
  return j;
}

}  // namespace

std::string to_string(CaseId id) {
  switch (id) {
    case CaseId::ex1: return "ex1";
    case CaseId::ex2: return "ex2";
    case CaseId::zero: return "zero";
  }
  return "unknown";
}

CaseId case_from_string(const std::string& name) {
  if (name == "ex1" || name == "Ex1") return CaseId::ex1;
  if (name == "ex2" || name == "Ex2") return CaseId::ex2;
  if (name == "zero") return CaseId::zero;
  throw ValidationError("unknown manufactured case '" + name + "'");
}

ManufacturedCase::ManufacturedCase(CaseId id) : id_(id) {
  if (id == CaseId::ex1) {
    domain_ = Rectangle{0.0, 0.0, 2.0 * kPi, 2.0 * kPi};
  } else {
    domain_ = Rectangle{0.0, 0.0, 1.0, 1.0};
  }
}

ExactJets ManufacturedCase::derivatives(double x, double y, double t) const {
  switch (id_) {
    case CaseId::ex1: return example1(x, y, t);
    case CaseId::ex2: return example2(x, y, t);
    case CaseId::zero: return {};
  }
  return {};
}

ExactValues ManufacturedCase::exact(double x, double y, double t) const {
  const ExactJets j = derivatives(x, y, t);
  return {j.u.value, j.v.value, j.p.value, j.psi.value, j.c.value};
}

SourceValues sources(const ManufacturedCase& mc, const ModelParameters& p, double x, double y,
                     double t) {
  const ExactJets j = mc.derivatives(x, y, t);
  const Vec2 u(j.u.value, j.v.value);
  const Vec2 grad_psi = j.psi.gradient();
  const Vec2 grad_c = j.c.gradient();
  const Coefficients k = coefficients(j.psi.value, j.c.value, p);

  SourceValues s;
  const Vec2 u_t(j.u.dt, j.v.dt);
  const Vec2 convection(u.dot(j.u.gradient()), u.dot(j.v.gradient()));
  const Vec2 laplacian(j.u.laplacian(), j.v.laplacian());
  s.F_u = p.rho0 * (u_t + convection) + j.p.gradient() - p.mu * laplacian - k.A1 -
          lorentz(u, j.psi.value, p);

  const Mat2 flux_jacobian = anisotropy_flux_jacobian(grad_psi, p);
  const double div_aniso = flux_jacobian.cwiseProduct(j.psi.hessian()).sum();
  s.F_psi = j.psi.dt + u.dot(grad_psi) - div_aniso + k.A2;

  const double div_flux = k.dD_dpsi * grad_psi.dot(grad_c) + k.D * j.c.laplacian() +
                          (k.dA3_dpsi * grad_psi + k.dA3_dc * grad_c).dot(grad_psi) +
                          k.A3 * j.psi.laplacian();
  s.F_c = j.c.dt + u.dot(grad_c) - div_flux;
  return s;
}

BoundaryFluxes boundary_fluxes(const ManufacturedCase& mc, const ModelParameters& p, double x,
                               double y, double t, const Vec2& normal) {
  const ExactJets j = mc.derivatives(x, y, t);
  const Vec2 grad_psi = j.psi.gradient();
  const Coefficients k = coefficients(j.psi.value, j.c.value, p);
  BoundaryFluxes f;
  f.psi = (anisotropy_matrix(grad_psi, p) * grad_psi).dot(normal);
  f.c = (k.D * j.c.gradient() + k.A3 * grad_psi).dot(normal);
  return f;
}

}  // namespace dendrite
