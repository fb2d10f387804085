#pragma once

#include <string>

#include "dendrite/constitutive.hpp"
#include "dendrite/mesh.hpp"

namespace dendrite {

/// Value, first/second space derivatives and time derivative of a scalar field.
struct FieldJet {
  double value = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  double dxx = 0.0;
  double dxy = 0.0;
  double dyy = 0.0;
  double dt = 0.0;

  [[nodiscard]] Vec2 gradient() const { return {dx, dy}; }
  [[nodiscard]] Mat2 hessian() const {
    Mat2 h;
    h << dxx, dxy, dxy, dyy;
    return h;
  }
  [[nodiscard]] double laplacian() const { return dxx + dyy; }
};

struct ExactJets {
  FieldJet u, v, p, psi, c;
};

struct ExactValues {
  double u = 0.0, v = 0.0, p = 0.0, psi = 0.0, c = 0.0;
};

enum class CaseId { ex1, ex2, zero };

[[nodiscard]] std::string to_string(CaseId id);
[[nodiscard]] CaseId case_from_string(const std::string& name);

/// Closed-form manufactured solution on its rectangle, final time T = 1.
///  ex1: Omega = [0, 2 pi]^2, time factor e^{1-t}.
///  ex2: Omega = [0, 1]^2, time factor e^{t-1}.
///  zero: all fields identically zero on the unit square.
class ManufacturedCase {
 public:
  explicit ManufacturedCase(CaseId id);

  [[nodiscard]] CaseId id() const { return id_; }
  [[nodiscard]] const Rectangle& domain() const { return domain_; }
  [[nodiscard]] double final_time() const { return 1.0; }

  [[nodiscard]] ExactValues exact(double x, double y, double t) const;
  [[nodiscard]] ExactJets derivatives(double x, double y, double t) const;

 private:
  CaseId id_;
  Rectangle domain_;
};

struct SourceValues {
  Vec2 F_u = Vec2::Zero();
  double F_psi = 0.0;
  double F_c = 0.0;
};

/// Strong operators applied to the exact fields:
///   F_u   = rho0 (u_t + (u.grad) u) + grad p - mu lap u - A1 - b ((u x B) x B)
///   F_psi = psi_t + u.grad psi - div(A_g grad psi) + A2
///   F_c   = c_t + u.grad c - div(D grad c + A3 grad psi)
[[nodiscard]] SourceValues sources(const ManufacturedCase& mc, const ModelParameters& p, double x,
                                   double y, double t);

struct BoundaryFluxes {
  double psi = 0.0;  // (A_g grad psi) . n
  double c = 0.0;    // (D grad c + A3 grad psi) . n
};

/// Normal fluxes of the exact solution; they enter the weak form as boundary
/// terms because the exact fields do not satisfy the homogeneous natural
/// conditions.
[[nodiscard]] BoundaryFluxes boundary_fluxes(const ManufacturedCase& mc, const ModelParameters& p,
                                             double x, double y, double t, const Vec2& normal);

}  // namespace dendrite
