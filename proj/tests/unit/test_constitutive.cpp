#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dendrite/constitutive.hpp"
#include "dendrite/error.hpp"

using namespace dendrite;

namespace {

constexpr double kPi = std::numbers::pi;

ModelParameters nd() { return ModelParameters::nondimensional(); }

}  // namespace

TEST(Eta, IsotropicLimit) {
  ModelParameters p = nd();
  p.gamma = 0.0;
  p.eps0 = 1.7;
  for (double th : {0.0, 0.3, 2.0, -1.0}) {
    const EtaValues e = eta(th, p);
    EXPECT_EQ(e.value, 1.7);
    EXPECT_EQ(e.d1, 0.0);
  }
}

TEST(Eta, FourFoldAtQuarterPi) {
  ModelParameters p = nd();
  p.eps0 = 2.0;
  EXPECT_NEAR(eta(kPi / 4.0, p).value, 2.0 * (1.0 - 0.04), 1e-15);
}

TEST(Eta, DerivativesMatchFiniteDifferences) {
  const ModelParameters p = nd();
  const double h = 1e-6;
  for (double th = -3.0; th < 3.0; th += 0.37) {
    const EtaValues e = eta(th, p);
    EXPECT_NEAR(e.d1, (eta(th + h, p).value - eta(th - h, p).value) / (2 * h), 1e-6);
    EXPECT_NEAR(e.d2, (eta(th + h, p).d1 - eta(th - h, p).d1) / (2 * h), 1e-6);
  }
}

TEST(Angle, Conventions) {
  EXPECT_EQ(angle_of_gradient(Vec2(1, 0)), 0.0);
  EXPECT_NEAR(angle_of_gradient(Vec2(0, 1)), kPi / 2.0, 1e-15);
  EXPECT_EQ(angle_of_gradient(Vec2(0, 0)), 0.0);
}

TEST(Anisotropy, IsotropicMatrix) {
  ModelParameters p = nd();
  p.gamma = 0.0;
  p.eps0 = 1.5;
  p.mobility = 0.3;
  const Mat2 a = anisotropy_matrix(Vec2(0.2, -0.7), p);
  EXPECT_LT((a - 0.3 * 2.25 * Mat2::Identity()).norm(), 1e-15);
}

TEST(Anisotropy, QuadraticFormIdentity) {
  const ModelParameters p = nd();
  std::mt19937 gen(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Vec2 g(n(gen), n(gen));
    const Vec2 v(n(gen), n(gen));
    const double e = eta(angle_of_gradient(g), p).value;
    const double expected = p.mobility * e * e * v.squaredNorm();
    EXPECT_LE(std::abs(v.dot(anisotropy_matrix(g, p) * v) - expected), 1e-13 * expected);
  }
}

TEST(Anisotropy, RegularityThreshold) {
  ModelParameters p = nd();
  p.gamma = 0.04;
  EXPECT_GT(anisotropy_regularity(p), 0.0);
  p.gamma = 0.07;
  EXPECT_LE(anisotropy_regularity(p), 0.0);
  EXPECT_THROW(p.validate(), ValidationError);
  // eta + eta'' = eps0 (1 - gamma (k^2 - 1)) at the worst angle
  p.gamma = 0.04;
  EXPECT_NEAR(anisotropy_regularity(p), 1.0 - 0.04 * 15.0, 1e-12);
}

TEST(Anisotropy, FluxJacobianMatchesFiniteDifferences) {
  const ModelParameters p = nd();
  const double h = 1e-6;
  for (const Vec2& g : {Vec2(0.3, 0.8), Vec2(-1.1, 0.2), Vec2(0.05, -0.4)}) {
    const Mat2 j = anisotropy_flux_jacobian(g, p);
    for (int k = 0; k < 2; ++k) {
      Vec2 d = Vec2::Zero();
      d[k] = h;
      const Vec2 fd = (anisotropy_matrix(g + d, p) * (g + d) - anisotropy_matrix(g - d, p) * (g - d)) / (2 * h);
      EXPECT_LT((j.col(k) - fd).norm(), 1e-8);
    }
  }
}

TEST(Coefficients, VanishingCases) {
  const ModelParameters p = nd();
  EXPECT_EQ(coefficients(0.4, 0.0, p).A3, 0.0);
  EXPECT_EQ(coefficients(0.4, 1.0, p).A3, 0.0);
  EXPECT_EQ(coefficients(0.0, 0.3, p).A2, 0.0);
  EXPECT_EQ(coefficients(1.0, 0.3, p).A2, 0.0);
  const ClosureValues c0 = closures(0.0, p);
  const ClosureValues c1 = closures(1.0, p);
  EXPECT_EQ(c0.dg, 0.0);
  EXPECT_EQ(c1.dg, 0.0);
  EXPECT_EQ(c0.dpbar, 0.0);
  EXPECT_EQ(c1.dpbar, 0.0);
}

TEST(Coefficients, DiffusivityEndpointsNiCu) {
  const ModelParameters p = ModelParameters::ni_cu();
  EXPECT_EQ(coefficients(0.0, 0.5, p).D, 1e-13);
  EXPECT_NEAR(coefficients(1.0, 0.5, p).D, 1e-9, 1e-24);
}

TEST(Coefficients, NiCuDefaults) {
  const ModelParameters p = ModelParameters::ni_cu();
  EXPECT_EQ(p.rho0, 7915.0);
  EXPECT_EQ(p.mu, 2.3535e-6);
  EXPECT_NEAR(p.B.norm(), 1.0, 1e-15);
  EXPECT_EQ(p.B.x(), p.B.y());
  EXPECT_NO_THROW(p.validate());
}

TEST(Coefficients, DerivativesMatchFiniteDifferences) {
  const double h = 1e-6;
  for (SmoothingKind s : {SmoothingKind::quintic, SmoothingKind::cubic}) {
    ModelParameters p = nd();
    p.smoothing = s;
    p.forcing = ForcingKind::gravity;
    p.zeta = 0.5;
    for (double psi : {-0.3, 0.1, 0.45, 0.8, 1.4}) {
      for (double c : {0.2, 0.7}) {
        const Coefficients k = coefficients(psi, c, p);
        const Coefficients pp = coefficients(psi + h, c, p);
        const Coefficients pm = coefficients(psi - h, c, p);
        const Coefficients cp = coefficients(psi, c + h, p);
        const Coefficients cm = coefficients(psi, c - h, p);
        EXPECT_NEAR(k.dD_dpsi, (pp.D - pm.D) / (2 * h), 1e-6);
        EXPECT_NEAR(k.db_dpsi, (pp.b - pm.b) / (2 * h), 1e-6);
        EXPECT_LT((k.dA1_dpsi - (pp.A1 - pm.A1) / (2 * h)).norm(), 1e-6);
        EXPECT_LT((k.dA1_dc - (cp.A1 - cm.A1) / (2 * h)).norm(), 1e-6);
        EXPECT_NEAR(k.dA2_dpsi, (pp.A2 - pm.A2) / (2 * h), 1e-6);
        EXPECT_NEAR(k.dA2_dc, (cp.A2 - cm.A2) / (2 * h), 1e-6);
        EXPECT_NEAR(k.dA3_dpsi, (pp.A3 - pm.A3) / (2 * h), 1e-6);
        EXPECT_NEAR(k.dA3_dc, (cp.A3 - cm.A3) / (2 * h), 1e-6);
      }
    }
  }
}

TEST(Closures, ExtensionIsContinuousAtEndpoints) {
  const ModelParameters p = nd();
  for (double edge : {0.0, 1.0}) {
    const ClosureValues in = closures(edge, p);
    const ClosureValues lo = closures(edge - 1e-9, p);
    const ClosureValues hi = closures(edge + 1e-9, p);
    for (const ClosureValues* c : {&lo, &hi}) {
      EXPECT_NEAR(c->g, in.g, 1e-8);
      EXPECT_NEAR(c->dg, in.dg, 1e-8);
      EXPECT_NEAR(c->d2g, in.d2g, 1e-7);
      EXPECT_NEAR(c->pbar, in.pbar, 1e-8);
      EXPECT_NEAR(c->dpbar, in.dpbar, 1e-8);
      EXPECT_NEAR(c->d2pbar, in.d2pbar, 1e-6);
    }
  }
}

TEST(Lorentz, ParallelAndPerpendicular) {
  ModelParameters p = nd();
  EXPECT_LT(lorentz(2.0 * p.B, 0.3, p).norm(), 1e-15);
  p.B = Vec2(0.0, 1.0);
  const double b = p.sigma_A + 0.3 * (p.sigma_B - p.sigma_A);
  EXPECT_LT((lorentz(Vec2(1.0, 0.0), 0.3, p) - Vec2(-b, 0.0)).norm(), 1e-15);
}

TEST(Lorentz, DiagonalField) {
  const ModelParameters p = nd();
  const double b = p.sigma_A + 0.6 * (p.sigma_B - p.sigma_A);
  EXPECT_LT((lorentz(Vec2(1.0, 0.0), 0.6, p) - b * Vec2(-0.5, 0.5)).norm(), 1e-15);
  EXPECT_LT((b * lorentz_operator(p) * Vec2(0.3, -2.0) - lorentz(Vec2(0.3, -2.0), 0.6, p)).norm(), 1e-14);
}

TEST(Parameters, ValidationRejectsNonPositive) {
  ModelParameters p = nd();
  p.mu = 0.0;
  EXPECT_THROW(p.validate(), ValidationError);
  p = nd();
  p.k = 1;
  EXPECT_THROW(p.validate(), ValidationError);
  p = nd();
  p.D_S = -1.0;
  EXPECT_THROW(p.validate(), ValidationError);
  EXPECT_NO_THROW(nd().validate());
}
