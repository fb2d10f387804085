#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

#include "dendrite/assembly.hpp"
#include "dendrite/error.hpp"

using namespace dendrite;

namespace {

StepContext at(double t) {
  StepContext c;
  c.t = t;
  return c;
}

std::shared_ptr<const Mesh> grid(int n, Rectangle d = {0.0, 0.0, 1.0, 1.0}) {
  return std::make_shared<const Mesh>(generate_rect_mesh(d, n, n));
}

double max_asymmetry(const CsrMatrix& m) { return max_abs_difference(m, m.transpose()); }

// Solenoidal, zero-trace field (d_y phi, -d_x phi) with phi = x^2 (1-x)^2 y^2 (1-y)^2.
double stream_velocity(const Point& p, double, int c) {
  const double x = p.x();
  const double y = p.y();
  const double fx = x * x * (1 - x) * (1 - x);
  const double fy = y * y * (1 - y) * (1 - y);
  const double dfx = 2 * x * (1 - x) * (1 - 2 * x);
  const double dfy = 2 * y * (1 - y) * (1 - 2 * y);
  return c == 0 ? fx * dfy : -dfx * fy;
}

// (div w phi_j, phi_i) computed directly from the element data.
Eigen::MatrixXd div_mass(const FunctionSpace& s, const FEFunction& w) {
  const Mesh& mesh = s.mesh();
  const QuadratureRule q = quadrature(10);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(s.n_dofs(), s.n_dofs());
  for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
    const int ti = static_cast<int>(t);
    const ElementGeometry g = element_geometry(mesh, ti);
    const auto nodes = s.element_nodes(ti);
    for (std::size_t k = 0; k < q.size(); ++k) {
      const ShapeValues sv = shape_eval(s.element(), Eigen::Vector2d(q.points[k][1], q.points[k][2]));
      const double div = w.gradient(ti, q.points[k], 0).x() + w.gradient(ti, q.points[k], 1).y();
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (std::size_t j = 0; j < nodes.size(); ++j) {
          m(nodes[i], nodes[j]) += q.weights[k] * g.det * div * sv.values[i] * sv.values[j];
        }
      }
    }
  }
  return m;
}

MixedProblem ex1_problem(int n, int order = 2) {
  const ManufacturedCase mc(CaseId::ex1);
  return MixedProblem(make_discretization(grid(n, mc.domain()), order), ModelParameters::nondimensional(), mc);
}

Eigen::VectorXd perturbed_state(const MixedProblem& problem, double t, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  Eigen::VectorXd y = problem.interpolate_exact(t);
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += u(gen);
  for (int d : problem.dirichlet_dofs()) y[d] = 0.0;
  return y;
}

}  // namespace

TEST(Mass, P1ElementMatrixOnRightTriangle) {
  const auto mesh = grid(1);
  const auto s = build_space(mesh, 1, 1, Constraint::none);
  const CsrMatrix m = assemble_mass(*s);
  Eigen::Matrix3d local;
  local << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  local /= 24.0;
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(4, 4);
  for (int t = 0; t < 2; ++t) {
    const auto nodes = s->element_nodes(t);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) expected(nodes[i], nodes[j]) += local(i, j);
    }
  }
  EXPECT_LT((m.to_dense() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Mass, RowSumsAndTotal) {
  const auto mesh = grid(5, Rectangle{0.0, 0.0, 2.0, 1.5});
  for (int l = 1; l <= 3; ++l) {
    const auto s = build_space(mesh, l, 1, Constraint::none);
    const CsrMatrix m = assemble_mass(*s);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(s->n_dofs());
    EXPECT_NEAR((m * ones).sum(), 3.0, 1e-12);
    EXPECT_LE(max_asymmetry(m), 1e-14);
  }
  const auto p1 = build_space(mesh, 1, 1, Constraint::none);
  const Eigen::VectorXd rows = assemble_mass(*p1) * Eigen::VectorXd::Ones(p1->n_dofs());
  // lumped area of a P1 node: one third of the patch area
  Eigen::VectorXd lumped = Eigen::VectorXd::Zero(p1->n_dofs());
  for (std::size_t t = 0; t < mesh->n_triangles(); ++t) {
    for (int v : mesh->triangles()[t]) lumped[v] += mesh->signed_area(static_cast<int>(t)) / 3.0;
  }
  EXPECT_LT((rows - lumped).cwiseAbs().maxCoeff(), 1e-14);
  const double rho0 = 7915.0;
  const auto vel = build_space(mesh, 2, 2, Constraint::none);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(vel->n_dofs());
  EXPECT_NEAR((assemble_mass(*vel, rho0) * ones).sum() / 2.0, rho0 * 3.0, 1e-9);
}

TEST(Mass, PositiveDefinite) {
  const auto s = build_space(grid(3), 3, 1, Constraint::none);
  const Eigen::MatrixXd m = assemble_mass(*s).to_dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
}

TEST(Stiffness, ConstantsInKernelAndSymmetric) {
  const auto s = build_space(grid(4), 2, 2, Constraint::none);
  const CsrMatrix a = assemble_stiffness_viscous(*s, 2.5);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(s->n_dofs());
  EXPECT_LT((a * ones).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(max_asymmetry(a), 1e-14);
}

TEST(Stiffness, EnergyOfBubble) {
  const double mu = 1.7;
  const auto s = build_space(grid(16), 2, 2, Constraint::zero_boundary);
  const FEFunction u = interpolate(
      s, [](const Point& p, double, int c) { return c == 0 ? p.x() * (1 - p.x()) * p.y() * (1 - p.y()) : 0.0; }, 0.0);
  const double energy = u.coefficients().dot(assemble_stiffness_viscous(*s, mu) * u.coefficients());
  // int |grad (x(1-x)y(1-y))|^2 = 2 * (1/3) * (1/30)
  EXPECT_NEAR(energy, mu / 45.0, 2e-3 * mu / 45.0);
}

TEST(Divergence, RequiresTaylorHoodPair) {
  const auto mesh = grid(2);
  const auto v2 = build_space(mesh, 2, 2, Constraint::zero_boundary);
  const auto v1 = build_space(mesh, 1, 2, Constraint::zero_boundary);
  const auto p1 = build_space(mesh, 1, 1, Constraint::zero_mean);
  const auto p2 = build_space(mesh, 2, 1, Constraint::zero_mean);
  EXPECT_THROW((void)assemble_divergence(*v2, *p2), ValidationError);
  EXPECT_THROW((void)assemble_divergence(*v1, *p1), ValidationError);
  EXPECT_NO_THROW((void)assemble_divergence(*v2, *p1));
}

TEST(Divergence, ConstantPressureAnnihilatesZeroTraceVelocity) {
  const auto mesh = grid(4);
  const auto v = build_space(mesh, 3, 2, Constraint::zero_boundary);
  const auto p = build_space(mesh, 2, 1, Constraint::zero_mean);
  const CsrMatrix c = assemble_divergence(*v, *p);
  FEFunction u = interpolate(v, [](const Point& x, double, int k) { return std::sin(3 * x.x() + k) * x.y(); }, 0.0);
  const Eigen::VectorXd cu = c * u.coefficients();
  EXPECT_LT(std::abs(cu.sum()), 1e-13);
}

TEST(Divergence, SolenoidalInterpolantConverges) {
  std::vector<double> norms;
  for (int n : {4, 8, 16}) {
    const auto mesh = grid(n);
    const auto v = build_space(mesh, 2, 2, Constraint::zero_boundary);
    const auto p = build_space(mesh, 1, 1, Constraint::zero_mean);
    const FEFunction u = interpolate(v, stream_velocity, 0.0);
    norms.push_back((assemble_divergence(*v, *p) * u.coefficients()).norm());
  }
  EXPECT_GT(std::log2(norms[0] / norms[1]), 2.5);
  EXPECT_GT(std::log2(norms[1] / norms[2]), 2.5);
}

TEST(Convection, ZeroWindGivesZeroMatrix) {
  const auto s = build_space(grid(3), 2, 2, Constraint::zero_boundary);
  const CsrMatrix n = assemble_convection(*s, FEFunction(s));
  for (double v : n.values()) EXPECT_EQ(v, 0.0);
}

TEST(Convection, SkewSymmetryIdentityForZeroTraceWind) {
  // N + N^T = -(div w phi_j, phi_i) for a wind with zero trace, exactly.
  const auto mesh = grid(4);
  const auto wspace = build_space(mesh, 2, 2, Constraint::zero_boundary);
  const FEFunction w = interpolate(
      wspace, [](const Point& p, double, int c) { return std::sin(2 * p.x() + c) * std::cos(p.y() - c); }, 0.0);
  for (int l = 2; l <= 3; ++l) {
    const auto s = build_space(mesh, l, 1, Constraint::none);
    const Eigen::MatrixXd n = assemble_convection(*s, w).to_dense();
    EXPECT_LT((n + n.transpose() + div_mass(*s, w)).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(Convection, SolenoidalWindAnnihilatesAndIsSkew) {
  // b_u, b_psi and b_c with a discretely near-solenoidal zero-trace wind.
  std::vector<double> skew;
  std::vector<double> self;
  for (int n : {4, 8, 16}) {
    const auto mesh = grid(n);
    const auto wspace = build_space(mesh, 2, 2, Constraint::zero_boundary);
    const FEFunction w = interpolate(wspace, stream_velocity, 0.0);
    const auto vel = build_space(mesh, 2, 2, Constraint::zero_boundary);
    const auto sc = build_space(mesh, 2, 1, Constraint::none);
    const CsrMatrix nv = assemble_convection(*vel, w);
    const CsrMatrix ns = assemble_convection(*sc, w);
    const FEFunction v = interpolate(vel, [](const Point& p, double, int c) { return std::sin(3 * p.x()) * p.y() + c; }, 0.0);
    const FEFunction z = interpolate(sc, [](const Point& p, double, int) { return std::cos(2 * p.y()) + p.x(); }, 0.0);
    const double vv = v.coefficients().dot(nv * v.coefficients()) / v.coefficients().squaredNorm();
    const double zz = z.coefficients().dot(ns * z.coefficients()) / z.coefficients().squaredNorm();
    self.push_back(std::max(std::abs(vv), std::abs(zz)));
    const Eigen::MatrixXd dv = nv.to_dense();
    const Eigen::MatrixXd ds = ns.to_dense();
    skew.push_back(std::max((dv + dv.transpose()).cwiseAbs().maxCoeff(), (ds + ds.transpose()).cwiseAbs().maxCoeff()));
  }
  EXPECT_LT(self.back(), 1e-10 * 16.0);
  for (int i = 0; i < 2; ++i) {
    EXPECT_GT(std::log2(skew[i] / skew[i + 1]), 2.5);
    EXPECT_LT(self[i + 1], self[i]);
  }
}

TEST(Anisotropic, IsotropicReduction) {
  ModelParameters p = ModelParameters::nondimensional();
  p.gamma = 0.0;
  p.eps0 = 1.3;
  const auto s = build_space(grid(3), 2, 1, Constraint::none);
  const FEFunction psi = interpolate(s, [](const Point& x, double, int) { return x.x() * x.y(); }, 0.0);
  const CsrMatrix k = assemble_anisotropic_stiffness(*s, psi, p);
  const CsrMatrix a = assemble_stiffness(*s, p.mobility * 1.69);
  EXPECT_LE(max_abs_difference(k, a), 1e-12 * 1.69 * p.mobility * 10.0);
}

TEST(Anisotropic, QuadraticFormAndConstantPhase) {
  const ModelParameters p = ModelParameters::nondimensional();
  const auto mesh = grid(3);
  const auto s = build_space(mesh, 2, 1, Constraint::none);
  const FEFunction psi = interpolate(s, [](const Point& x, double, int) { return std::sin(3 * x.x()) + x.y() * x.y(); }, 0.0);
  const FEFunction z = interpolate(s, [](const Point& x, double, int) { return std::exp(x.x() - x.y()); }, 0.0);
  const double form = z.coefficients().dot(assemble_anisotropic_stiffness(*s, psi, p) * z.coefficients());
  const QuadratureRule q = quadrature(6);
  double oracle = 0.0;
  for (std::size_t t = 0; t < mesh->n_triangles(); ++t) {
    const int ti = static_cast<int>(t);
    const double det = element_geometry(*mesh, ti).det;
    for (std::size_t k = 0; k < q.size(); ++k) {
      const double e = eta(angle_of_gradient(psi.gradient(ti, q.points[k])), p).value;
      oracle += q.weights[k] * det * p.mobility * e * e * z.gradient(ti, q.points[k]).squaredNorm();
    }
  }
  EXPECT_GT(form, 0.0);
  EXPECT_NEAR(form, oracle, 1e-12 * oracle);

  const FEFunction flat = interpolate(s, [](const Point&, double, int) { return 0.4; }, 0.0);
  const double e0 = eta(0.0, p).value;
  EXPECT_LE(max_abs_difference(assemble_anisotropic_stiffness(*s, flat, p), assemble_stiffness(*s, p.mobility * e0 * e0)), 1e-13);
}

TEST(Layout, BlocksAndOffsets) {
  const Discretization d = make_discretization(grid(2), 2);
  const SystemLayout& l = d.layout;
  EXPECT_EQ(l.n_velocity, 2 * 25);
  EXPECT_EQ(l.n_pressure, 9);
  EXPECT_EQ(l.n_phase, 25);
  EXPECT_EQ(l.size(), 50 + 9 + 25 + 25 + 1);
  EXPECT_EQ(l.block_of(0), Block::velocity);
  EXPECT_EQ(l.block_of(50), Block::pressure);
  EXPECT_EQ(l.block_of(59), Block::phase);
  EXPECT_EQ(l.block_of(84), Block::concentration);
  EXPECT_EQ(l.block_of(109), Block::multiplier);
  EXPECT_EQ(to_string(Block::pressure), "pressure");
  EXPECT_THROW((void)make_discretization(grid(2), 1), ValidationError);
}

TEST(MixedProblem, ZeroStateZeroSourcesGivesZeroResidual) {
  const ManufacturedCase mc(CaseId::zero);
  const MixedProblem problem(make_discretization(grid(3), 2), ModelParameters::nondimensional(), mc);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(problem.system_size());
  EXPECT_EQ(problem.residual(zero, zero, at(0.5)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(MixedProblem, PressureRowsOrthogonalToConstants) {
  const MixedProblem problem = ex1_problem(4);
  Eigen::VectorXd y = perturbed_state(problem, 0.3, 1);
  y[problem.layout().multiplier_index()] = 0.0;
  const Eigen::VectorXd r = problem.residual(y, Eigen::VectorXd::Zero(y.size()), at(0.3));
  EXPECT_LT(std::abs(r.segment(problem.layout().pressure_offset(), problem.layout().n_pressure).sum()), 1e-12);
}

TEST(MixedProblem, DirichletRowsAreIdentity) {
  const MixedProblem problem = ex1_problem(3);
  const Eigen::VectorXd y = perturbed_state(problem, 0.2, 2);
  const AssembledSystem s = problem.jacobian(y, y, at(0.2), 10.0);
  ASSERT_FALSE(problem.dirichlet_dofs().empty());
  for (int d : problem.dirichlet_dofs()) {
    EXPECT_EQ(s.matrix.coeff(d, d), 1.0);
    EXPECT_EQ(s.residual[d], y[d]);
  }
}

TEST(MixedProblem, JacobianMatchesFiniteDifferences) {
  for (int order : {2, 3}) {
    const MixedProblem problem = ex1_problem(3, order);
    const double shift = 7.0;
    const StepContext ctx = at(0.4);
    const Eigen::VectorXd y = perturbed_state(problem, 0.4, 3);
    const Eigen::VectorXd ydot = perturbed_state(problem, 0.4, 4);
    const CsrMatrix j = problem.jacobian(y, ydot, ctx, shift).matrix;
    std::mt19937 gen(5);
    std::normal_distribution<double> nd(0.0, 1.0);
    const double h = 1e-6;
    for (int k = 0; k < 20; ++k) {
      Eigen::VectorXd e(y.size());
      for (Eigen::Index i = 0; i < e.size(); ++i) e[i] = nd(gen);
      e /= e.norm();
      const Eigen::VectorXd fd = (problem.residual(y + h * e, ydot + shift * h * e, ctx) -
                                  problem.residual(y - h * e, ydot - shift * h * e, ctx)) /
                                 (2 * h);
      const Eigen::VectorXd je = j * e;
      EXPECT_LE((je - fd).norm(), 1e-4 * je.norm()) << "order " << order << " direction " << k;
    }
  }
}

TEST(MixedProblem, LargeShiftApproachesMass) {
  const MixedProblem problem = ex1_problem(3);
  const Eigen::VectorXd y = perturbed_state(problem, 0.1, 6);
  const StepContext ctx = at(0.1);
  const double shift = 1e9;
  const CsrMatrix j = problem.jacobian(y, y, ctx, shift).matrix;
  const CsrMatrix m = problem.block_system(y, ctx).mass;
  const SystemLayout& l = problem.layout();
  double worst = 0.0;
  double scale = 0.0;
  for (int r = l.phase_offset(); r < l.multiplier_index(); ++r) {
    for (int c = 0; c < l.size(); ++c) {
      const double mv = m.pattern().contains(r, c) ? m.coeff(r, c) : 0.0;
      const double jv = j.pattern().contains(r, c) ? j.coeff(r, c) / shift : 0.0;
      worst = std::max(worst, std::abs(jv - mv));
      scale = std::max(scale, std::abs(mv));
    }
  }
  EXPECT_LT(worst, 1e-6 * scale);
}

TEST(MixedProblem, BlockSystemMatchesResidual) {
  const MixedProblem problem = ex1_problem(3);
  const Eigen::VectorXd y = perturbed_state(problem, 0.6, 7);
  const Eigen::VectorXd ydot = perturbed_state(problem, 0.6, 8);
  const StepContext ctx = at(0.6);
  const BlockSystem b = problem.block_system(y, ctx);
  Eigen::VectorXd r = b.mass * ydot + b.op * y + b.load - b.rhs;
  const Eigen::VectorXd direct = problem.residual(y, ydot, ctx);
  for (int d : problem.dirichlet_dofs()) r[d] = direct[d];
  EXPECT_LT((r - direct).cwiseAbs().maxCoeff(), 1e-11 * (1.0 + direct.cwiseAbs().maxCoeff()));
}

TEST(MixedProblem, PressureVelocityBlocksAreTransposes) {
  const MixedProblem problem = ex1_problem(3);
  const Eigen::VectorXd y = perturbed_state(problem, 0.5, 9);
  const CsrMatrix op = problem.block_system(y, at(0.5)).op;
  const SystemLayout& l = problem.layout();
  std::vector<bool> fixed(static_cast<std::size_t>(l.size()), false);
  for (int d : problem.dirichlet_dofs()) fixed[static_cast<std::size_t>(d)] = true;
  double worst = 0.0;
  for (int i = 0; i < l.n_velocity; ++i) {
    if (fixed[static_cast<std::size_t>(i)]) continue;
    for (int q = l.pressure_offset(); q < l.phase_offset(); ++q) {
      const double a = op.pattern().contains(i, q) ? op.coeff(i, q) : 0.0;
      const double b = op.pattern().contains(q, i) ? op.coeff(q, i) : 0.0;
      worst = std::max(worst, std::abs(a - b));
    }
  }
  EXPECT_LE(worst, 1e-14);
}

TEST(MixedProblem, ManufacturedResidualConvergesAtOrder) {
  // Isotropic, and late enough that psi stays inside [0, 1]: the anisotropic
  // flux is not smooth where grad psi = 0 and the closure tails cut the
  // coefficients' smoothness, both of which cap the local order.
  ModelParameters params = ModelParameters::nondimensional();
  params.gamma = 0.0;
  const ManufacturedCase mc(CaseId::ex1);
  const double t = 2.0;
  for (int order : {2, 3}) {
    std::vector<double> norms;
    for (int n : {8, 16, 32}) {
      const MixedProblem problem(make_discretization(grid(n, mc.domain()), order), params, mc);
      const Eigen::VectorXd r = problem.residual(problem.interpolate_exact(t), problem.interpolate_exact_rate(t), at(t));
      norms.push_back(r.cwiseAbs().maxCoeff());
    }
    for (int i = 0; i < 2; ++i) {
      EXPECT_GE(std::log2(norms[i] / norms[i + 1]), order + 1 - 0.25) << "order " << order;
    }
  }
}

TEST(MixedProblem, RejectsNonFiniteState) {
  const MixedProblem problem = ex1_problem(2);
  Eigen::VectorXd y = problem.interpolate_exact(0.0);
  y[3] = std::nan("");
  EXPECT_THROW((void)problem.residual(y, y, at(0.0)), SolverError);
  EXPECT_THROW((void)problem.jacobian(y, y, at(0.0), 0.0), ValidationError);
}
