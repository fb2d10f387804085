#include "dendrite/assembly.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "dendrite/error.hpp"

namespace dendrite {

namespace {

/// Basis values and reference gradients of one element at every point of a rule.
struct Tabulation {
  int n_basis = 0;
  std::vector<std::array<double, kMaxBasis>> values;
  std::vector<std::array<Eigen::Vector2d, kMaxBasis>> gradients;
};

Tabulation tabulate(const ReferenceElement& element, const QuadratureRule& rule) {
  Tabulation tab;
  tab.n_basis = element.n_basis();
  tab.values.resize(rule.size());
  tab.gradients.resize(rule.size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    element.evaluate(rule.points[q], tab.values[q], tab.gradients[q]);
  }
  return tab;
}

void require_same_mesh(const FunctionSpace& a, const FunctionSpace& b, const char* what) {
  if (&a.mesh() != &b.mesh()) throw ValidationError(std::string(what) + ": spaces live on different meshes");
}

template <typename Kernel>
CsrMatrix assemble_bilinear(const FunctionSpace& space, int degree, Kernel&& kernel) {
  const QuadratureRule rule = quadrature(std::clamp(degree, 1, 10));
  const Tabulation tab = tabulate(space.element(), rule);
  const int nb = tab.n_basis;
  const int nc = space.n_components();
  std::vector<Triplet> triplets;
  triplets.reserve(space.mesh().n_triangles() * static_cast<std::size_t>(nb * nb * nc * nc));
  std::vector<double> local(static_cast<std::size_t>(nb * nc * nb * nc));
  const int nl = nb * nc;
  for (int t = 0; t < static_cast<int>(space.mesh().n_triangles()); ++t) {
    const ElementGeometry geo = element_geometry(space.mesh(), t);
    std::fill(local.begin(), local.end(), 0.0);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double w = rule.weights[q] * std::abs(geo.det);
      std::array<Eigen::Vector2d, kMaxBasis> grad;
      for (int i = 0; i < nb; ++i) grad[static_cast<std::size_t>(i)] = geo.inv_transpose * tab.gradients[q][static_cast<std::size_t>(i)];
      kernel(t, q, rule.points[q], w, tab.values[q], grad, local, nl);
    }
    const auto nodes = space.element_nodes(t);
    for (int i = 0; i < nb; ++i) {
      for (int a = 0; a < nc; ++a) {
        for (int j = 0; j < nb; ++j) {
          for (int b = 0; b < nc; ++b) {
            const double v = local[static_cast<std::size_t>((i * nc + a) * nl + j * nc + b)];
            triplets.push_back({space.dof(nodes[static_cast<std::size_t>(i)], a), space.dof(nodes[static_cast<std::size_t>(j)], b), v});
          }
        }
      }
    }
  }
  return CsrMatrix::from_triplets(space.n_dofs(), space.n_dofs(), triplets);
}

using Values = std::array<double, kMaxBasis>;
using Grads = std::array<Eigen::Vector2d, kMaxBasis>;

}  // namespace

CsrMatrix assemble_mass(const FunctionSpace& space, double coefficient) {
  const int nb = space.element().n_basis();
  const int nc = space.n_components();
  return assemble_bilinear(space, 2 * space.order(),
                           [&](int, std::size_t, const Barycentric&, double w, const Values& phi,
                               const Grads&, std::vector<double>& local, int nl) {
                             for (int i = 0; i < nb; ++i) {
                               for (int j = 0; j < nb; ++j) {
                                 const double v = coefficient * w * phi[static_cast<std::size_t>(i)] * phi[static_cast<std::size_t>(j)];
                                 for (int a = 0; a < nc; ++a) local[static_cast<std::size_t>((i * nc + a) * nl + j * nc + a)] += v;
                               }
                             }
                           });
}

CsrMatrix assemble_stiffness(const FunctionSpace& space, double coefficient) {
  const int nb = space.element().n_basis();
  const int nc = space.n_components();
  return assemble_bilinear(space, std::max(1, 2 * space.order() - 2),
                           [&](int, std::size_t, const Barycentric&, double w, const Values&,
                               const Grads& grad, std::vector<double>& local, int nl) {
                             for (int i = 0; i < nb; ++i) {
                               for (int j = 0; j < nb; ++j) {
                                 const double v = coefficient * w * grad[static_cast<std::size_t>(i)].dot(grad[static_cast<std::size_t>(j)]);
                                 for (int a = 0; a < nc; ++a) local[static_cast<std::size_t>((i * nc + a) * nl + j * nc + a)] += v;
                               }
                             }
                           });
}

CsrMatrix assemble_stiffness_viscous(const FunctionSpace& velocity, double mu) {
  if (velocity.n_components() != 2) throw ValidationError("viscous form: vector space required");
  return assemble_stiffness(velocity, mu);
}

CsrMatrix assemble_divergence(const FunctionSpace& velocity, const FunctionSpace& pressure) {
  require_same_mesh(velocity, pressure, "divergence");
  if (velocity.n_components() != 2 || pressure.n_components() != 1) {
    throw ValidationError("divergence: need a vector velocity space and a scalar pressure space");
  }
  if (velocity.order() < 2 || pressure.order() != velocity.order() - 1) {
    throw ValidationError("divergence: pair " + velocity.family() + "-" + pressure.family() +
                          " is not a Taylor-Hood pair (inf-sup unstable)");
  }
  const QuadratureRule rule = quadrature(2 * velocity.order());
  const Tabulation tu = tabulate(velocity.element(), rule);
  const Tabulation tp = tabulate(pressure.element(), rule);
  std::vector<Triplet> triplets;
  for (int t = 0; t < static_cast<int>(velocity.mesh().n_triangles()); ++t) {
    const ElementGeometry geo = element_geometry(velocity.mesh(), t);
    const auto un = velocity.element_nodes(t);
    const auto pn = pressure.element_nodes(t);
    std::vector<double> local(static_cast<std::size_t>(tp.n_basis * tu.n_basis * 2), 0.0);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double w = rule.weights[q] * std::abs(geo.det);
      for (int j = 0; j < tu.n_basis; ++j) {
        const Eigen::Vector2d g = geo.inv_transpose * tu.gradients[q][static_cast<std::size_t>(j)];
        for (int i = 0; i < tp.n_basis; ++i) {
          const double qi = tp.values[q][static_cast<std::size_t>(i)];
          for (int b = 0; b < 2; ++b) local[static_cast<std::size_t>((i * tu.n_basis + j) * 2 + b)] -= w * qi * g[b];
        }
      }
    }
    for (int i = 0; i < tp.n_basis; ++i) {
      for (int j = 0; j < tu.n_basis; ++j) {
        for (int b = 0; b < 2; ++b) {
          triplets.push_back({pn[static_cast<std::size_t>(i)], velocity.dof(un[static_cast<std::size_t>(j)], b),
                              local[static_cast<std::size_t>((i * tu.n_basis + j) * 2 + b)]});
        }
      }
    }
  }
  return CsrMatrix::from_triplets(pressure.n_dofs(), velocity.n_dofs(), triplets);
}

CsrMatrix assemble_convection(const FunctionSpace& space, const FEFunction& wind, double scale) {
  require_same_mesh(space, wind.space(), "convection");
  if (wind.space().n_components() != 2) throw ValidationError("convection: wind must be a vector field");
  const int nb = space.element().n_basis();
  const int nc = space.n_components();
  const int degree = wind.space().order() + 2 * space.order();
  const QuadratureRule rule = quadrature(std::clamp(degree, 1, 10));
  const Tabulation tw = tabulate(wind.space().element(), rule);
  return assemble_bilinear(
      space, degree,
      [&](int t, std::size_t q, const Barycentric&, double w, const Values& phi, const Grads& grad,
          std::vector<double>& local, int nl) {
        const auto wn = wind.space().element_nodes(t);
        Eigen::Vector2d u = Eigen::Vector2d::Zero();
        for (int k = 0; k < tw.n_basis; ++k) {
          for (int a = 0; a < 2; ++a) {
            u[a] += tw.values[q][static_cast<std::size_t>(k)] * wind.coefficients()[wind.space().dof(wn[static_cast<std::size_t>(k)], a)];
          }
        }
        for (int i = 0; i < nb; ++i) {
          for (int j = 0; j < nb; ++j) {
            const double v = scale * w * u.dot(grad[static_cast<std::size_t>(j)]) * phi[static_cast<std::size_t>(i)];
            for (int a = 0; a < nc; ++a) local[static_cast<std::size_t>((i * nc + a) * nl + j * nc + a)] += v;
          }
        }
      });
}

CsrMatrix assemble_anisotropic_stiffness(const FunctionSpace& space, const FEFunction& psi,
                                         const ModelParameters& params) {
  require_same_mesh(space, psi.space(), "anisotropic stiffness");
  if (space.n_components() != 1 || psi.space().n_components() != 1) {
    throw ValidationError("anisotropic stiffness: scalar spaces required");
  }
  const int nb = space.element().n_basis();
  const int degree = std::min(10, 2 * space.order() + 2);
  return assemble_bilinear(space, degree,
                           [&](int t, std::size_t, const Barycentric& b, double w, const Values&,
                               const Grads& grad, std::vector<double>& local, int nl) {
                             const Mat2 a = anisotropy_matrix(psi.gradient(t, b), params);
                             for (int i = 0; i < nb; ++i) {
                               for (int j = 0; j < nb; ++j) {
                                 local[static_cast<std::size_t>(i * nl + j)] +=
                                     w * (a * grad[static_cast<std::size_t>(j)]).dot(grad[static_cast<std::size_t>(i)]);
                               }
                             }
                           });
}

// ---------------------------------------------------------------------------

std::string to_string(Block b) {
  switch (b) {
    case Block::velocity: return "velocity";
    case Block::pressure: return "pressure";
    case Block::phase: return "phase-field";
    case Block::concentration: return "concentration";
    case Block::multiplier: return "zero-mean multiplier";
  }
  return "unknown";
}

Block SystemLayout::block_of(int index) const {
  if (index < pressure_offset()) return Block::velocity;
  if (index < phase_offset()) return Block::pressure;
  if (index < concentration_offset()) return Block::phase;
  if (index < multiplier_index()) return Block::concentration;
  return Block::multiplier;
}

int SystemLayout::offset(Block b) const {
  switch (b) {
    case Block::velocity: return velocity_offset();
    case Block::pressure: return pressure_offset();
    case Block::phase: return phase_offset();
    case Block::concentration: return concentration_offset();
    case Block::multiplier: return multiplier_index();
  }
  return 0;
}

int SystemLayout::block_size(Block b) const {
  switch (b) {
    case Block::velocity: return n_velocity;
    case Block::pressure: return n_pressure;
    case Block::phase: return n_phase;
    case Block::concentration: return n_concentration;
    case Block::multiplier: return 1;
  }
  return 0;
}

Discretization make_discretization(std::shared_ptr<const Mesh> mesh, int order) {
  if (order < 2 || order > 3) throw ValidationError("discretization: velocity order must be 2 or 3");
  Discretization d;
  d.mesh = mesh;
  d.velocity = build_space(mesh, order, 2, Constraint::zero_boundary);
  d.pressure = build_space(mesh, order - 1, 1, Constraint::zero_mean);
  d.scalar = build_space(mesh, order, 1, Constraint::none);
  d.layout.n_velocity = d.velocity->n_dofs();
  d.layout.n_pressure = d.pressure->n_dofs();
  d.layout.n_phase = d.scalar->n_dofs();
  d.layout.n_concentration = d.scalar->n_dofs();
  return d;
}

namespace {

/// Local DOF ordering inside one element of the coupled system.
struct LocalLayout {
  int nb = 0;   // P_l basis size
  int nbp = 0;  // P_{l-1} basis size
  [[nodiscard]] int u(int i, int a) const { return 2 * i + a; }
  [[nodiscard]] int p(int i) const { return 2 * nb + i; }
  [[nodiscard]] int psi(int i) const { return 2 * nb + nbp + i; }
  [[nodiscard]] int c(int i) const { return 3 * nb + nbp + i; }
  [[nodiscard]] int lambda() const { return 4 * nb + nbp; }
  [[nodiscard]] int size() const { return 4 * nb + nbp + 1; }
};

void local_to_global(const Discretization& d, const LocalLayout& ll, int t, std::vector<int>& g) {
  const auto& L = d.layout;
  const auto un = d.velocity->element_nodes(t);
  const auto pn = d.pressure->element_nodes(t);
  const auto sn = d.scalar->element_nodes(t);
  g.resize(static_cast<std::size_t>(ll.size()));
  for (int i = 0; i < ll.nb; ++i) {
    for (int a = 0; a < 2; ++a) g[static_cast<std::size_t>(ll.u(i, a))] = L.velocity_offset() + d.velocity->dof(un[static_cast<std::size_t>(i)], a);
    g[static_cast<std::size_t>(ll.psi(i))] = L.phase_offset() + sn[static_cast<std::size_t>(i)];
    g[static_cast<std::size_t>(ll.c(i))] = L.concentration_offset() + sn[static_cast<std::size_t>(i)];
  }
  for (int i = 0; i < ll.nbp; ++i) g[static_cast<std::size_t>(ll.p(i))] = L.pressure_offset() + pn[static_cast<std::size_t>(i)];
  g[static_cast<std::size_t>(ll.lambda())] = L.multiplier_index();
}

/// Which blocks of the Jacobian are structurally nonzero.
bool couples(Block row, Block col) {
  switch (row) {
    case Block::velocity: return col != Block::multiplier;
    case Block::pressure: return col == Block::velocity || col == Block::multiplier;
    case Block::phase:
    case Block::concentration: return col == Block::velocity || col == Block::phase || col == Block::concentration;
    case Block::multiplier: return col == Block::pressure;
  }
  return false;
}

}  // namespace

MixedProblem::MixedProblem(Discretization disc, ModelParameters params, ManufacturedCase mc,
                           AssemblyOptions options)
    : disc_(std::move(disc)), params_(std::move(params)), case_(mc), options_(options) {
  const int l = disc_.order();
  const int degree = options_.quadrature_degree > 0 ? options_.quadrature_degree
                                                    : std::max(2 * l + 2, 3 * l - 1);
  rule_ = quadrature(std::min(degree, 10));

  const LocalLayout ll{disc_.velocity->element().n_basis(), disc_.pressure->element().n_basis()};
  local_size_ = ll.size();
  const auto& L = disc_.layout;
  const int nt = static_cast<int>(disc_.mesh->n_triangles());

  std::vector<std::vector<int>> rows(static_cast<std::size_t>(L.size()));
  for (int r = 0; r < L.size(); ++r) rows[static_cast<std::size_t>(r)].push_back(r);
  std::vector<int> g;
  for (int t = 0; t < nt; ++t) {
    local_to_global(disc_, ll, t, g);
    for (int i = 0; i < ll.size(); ++i) {
      const Block bi = L.block_of(g[static_cast<std::size_t>(i)]);
      for (int j = 0; j < ll.size(); ++j) {
        if (couples(bi, L.block_of(g[static_cast<std::size_t>(j)]))) rows[static_cast<std::size_t>(g[static_cast<std::size_t>(i)])].push_back(g[static_cast<std::size_t>(j)]);
      }
    }
  }
  pattern_ = std::make_shared<const SparsityPattern>(SparsityPattern::from_rows(L.size(), std::move(rows)));

  local_positions_.resize(static_cast<std::size_t>(nt) * static_cast<std::size_t>(local_size_ * local_size_));
  for (int t = 0; t < nt; ++t) {
    local_to_global(disc_, ll, t, g);
    int* pos = local_positions_.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(local_size_ * local_size_);
    for (int i = 0; i < local_size_; ++i) {
      for (int j = 0; j < local_size_; ++j) {
        pos[i * local_size_ + j] = pattern_->find(g[static_cast<std::size_t>(i)], g[static_cast<std::size_t>(j)]);
      }
    }
  }

  dirichlet_ = disc_.velocity->constrained_dofs();
  for (int& d : dirichlet_) d += L.velocity_offset();
}

void MixedProblem::assemble(const Eigen::VectorXd& y, const Eigen::VectorXd& ydot,
                            const StepContext& ctx, double shift, CsrMatrix* jac,
                            Eigen::VectorXd* res) const {
  const auto& L = disc_.layout;
  if (y.size() != L.size() || ydot.size() != L.size()) {
    throw ValidationError("assembly: state size does not match the layout");
  }
  if (!y.allFinite() || !ydot.allFinite()) throw SolverError("assembly: non-finite state");

  const ModelParameters& P = params_;
  const LocalLayout ll{disc_.velocity->element().n_basis(), disc_.pressure->element().n_basis()};
  const int nb = ll.nb;
  const int nbp = ll.nbp;
  const int n = local_size_;
  const Tabulation tv = tabulate(disc_.velocity->element(), rule_);
  const Tabulation tp = tabulate(disc_.pressure->element(), rule_);
  const Mat2 lor_op = lorentz_operator(P);
  const bool frozen = options_.linearization == AnisotropyLinearization::frozen;
  const double lambda = y[L.multiplier_index()];

  if (res) *res = Eigen::VectorXd::Zero(L.size());
  if (jac) {
    *jac = CsrMatrix(pattern_);
  }

  std::vector<int> g;
  std::vector<double> rl(static_cast<std::size_t>(n));
  std::vector<double> kl(jac ? static_cast<std::size_t>(n * n) : 0U);
  std::array<double, 2 * kMaxBasis> uc{};
  std::array<double, 2 * kMaxBasis> udc{};
  std::array<double, kMaxBasis> pc{}, sc{}, sdc{}, cc{}, cdc{};
  std::array<Eigen::Vector2d, kMaxBasis> G;

  for (int t = 0; t < static_cast<int>(disc_.mesh->n_triangles()); ++t) {
    const ElementGeometry geo = element_geometry(*disc_.mesh, t);
    local_to_global(disc_, ll, t, g);
    for (int i = 0; i < nb; ++i) {
      for (int a = 0; a < 2; ++a) {
        const int gi = g[static_cast<std::size_t>(ll.u(i, a))];
        uc[static_cast<std::size_t>(2 * i + a)] = y[gi];
        udc[static_cast<std::size_t>(2 * i + a)] = ydot[gi];
      }
      sc[static_cast<std::size_t>(i)] = y[g[static_cast<std::size_t>(ll.psi(i))]];
      sdc[static_cast<std::size_t>(i)] = ydot[g[static_cast<std::size_t>(ll.psi(i))]];
      cc[static_cast<std::size_t>(i)] = y[g[static_cast<std::size_t>(ll.c(i))]];
      cdc[static_cast<std::size_t>(i)] = ydot[g[static_cast<std::size_t>(ll.c(i))]];
    }
    for (int i = 0; i < nbp; ++i) pc[static_cast<std::size_t>(i)] = y[g[static_cast<std::size_t>(ll.p(i))]];

    std::fill(rl.begin(), rl.end(), 0.0);
    std::fill(kl.begin(), kl.end(), 0.0);
    auto K = [&](int r, int c) -> double& { return kl[static_cast<std::size_t>(r * n + c)]; };

    for (std::size_t q = 0; q < rule_.size(); ++q) {
      const double W = rule_.weights[q] * std::abs(geo.det);
      const auto& phi = tv.values[q];
      const auto& qv = tp.values[q];
      for (int i = 0; i < nb; ++i) G[static_cast<std::size_t>(i)] = geo.inv_transpose * tv.gradients[q][static_cast<std::size_t>(i)];

      Vec2 u = Vec2::Zero();
      Vec2 udot = Vec2::Zero();
      Mat2 du = Mat2::Zero();  // du(a, d) = d u_a / d x_d
      double psi = 0.0, psidot = 0.0, c = 0.0, cdot = 0.0, p = 0.0;
      Vec2 dpsi = Vec2::Zero();
      Vec2 dc = Vec2::Zero();
      for (int i = 0; i < nb; ++i) {
        const auto si = static_cast<std::size_t>(i);
        for (int a = 0; a < 2; ++a) {
          u[a] += phi[si] * uc[2 * si + static_cast<std::size_t>(a)];
          udot[a] += phi[si] * udc[2 * si + static_cast<std::size_t>(a)];
          du.row(a) += uc[2 * si + static_cast<std::size_t>(a)] * G[si].transpose();
        }
        psi += phi[si] * sc[si];
        psidot += phi[si] * sdc[si];
        dpsi += sc[si] * G[si];
        c += phi[si] * cc[si];
        cdot += phi[si] * cdc[si];
        dc += cc[si] * G[si];
      }
      for (int i = 0; i < nbp; ++i) p += qv[static_cast<std::size_t>(i)] * pc[static_cast<std::size_t>(i)];

      const Coefficients k = coefficients(psi, c, P);
      const Mat2 aniso = anisotropy_matrix(dpsi, P);
      const Vec2 flux = aniso * dpsi;
      const Vec2 lor = k.b * (lor_op * u);
      const Point x = geo.map(rule_.points[q]);
      SourceValues src = sources(case_, P, x.x(), x.y(), ctx.t);
      const double f = ctx.perturbation.factor(draw_index(ctx.step, static_cast<std::uint64_t>(t), q, 0));
      src.F_u *= f;
      src.F_psi *= f;
      src.F_c *= f;
      const double div_u = du.trace();
      const Vec2 conc_flux = k.D * dc + k.A3 * dpsi;

      if (res) {
        for (int i = 0; i < nb; ++i) {
          const auto si = static_cast<std::size_t>(i);
          for (int a = 0; a < 2; ++a) {
            rl[static_cast<std::size_t>(ll.u(i, a))] +=
                W * (P.rho0 * udot[a] * phi[si] + P.mu * du.row(a).dot(G[si]) +
                     P.rho0 * du.row(a).dot(u) * phi[si] - p * G[si][a] -
                     (k.A1[a] + lor[a] + src.F_u[a]) * phi[si]);
          }
          rl[static_cast<std::size_t>(ll.psi(i))] +=
              W * ((psidot + u.dot(dpsi) + k.A2 - src.F_psi) * phi[si] + flux.dot(G[si]));
          rl[static_cast<std::size_t>(ll.c(i))] +=
              W * ((cdot + u.dot(dc) - src.F_c) * phi[si] + conc_flux.dot(G[si]));
        }
        for (int i = 0; i < nbp; ++i) {
          rl[static_cast<std::size_t>(ll.p(i))] += W * (lambda - div_u) * qv[static_cast<std::size_t>(i)];
        }
        rl[static_cast<std::size_t>(ll.lambda())] += W * p;
      }

      if (jac) {
        const Mat2 jflux = frozen ? aniso : anisotropy_flux_jacobian(dpsi, P);
        const Vec2 lor_u = lor_op * u;
        for (int i = 0; i < nb; ++i) {
          const auto si = static_cast<std::size_t>(i);
          for (int j = 0; j < nb; ++j) {
            const auto sj = static_cast<std::size_t>(j);
            const double mm = W * phi[sj] * phi[si];
            const double conv = W * u.dot(G[sj]) * phi[si];
            const double lap = W * G[sj].dot(G[si]);
            for (int a = 0; a < 2; ++a) {
              const int ra = ll.u(i, a);
              for (int b = 0; b < 2; ++b) {
                double v = P.rho0 * du(a, b) * mm - k.b * lor_op(a, b) * mm;
                if (a == b) v += shift * P.rho0 * mm + P.mu * lap + P.rho0 * conv;
                K(ra, ll.u(j, b)) += v;
              }
              K(ra, ll.psi(j)) -= (k.dA1_dpsi[a] + k.db_dpsi * lor_u[a]) * mm;
              K(ra, ll.c(j)) -= k.dA1_dc[a] * mm;
            }
            // phase-field row
            const int rp = ll.psi(i);
            K(rp, ll.psi(j)) += shift * mm + conv + W * (jflux * G[sj]).dot(G[si]) + k.dA2_dpsi * mm;
            K(rp, ll.c(j)) += k.dA2_dc * mm;
            for (int b = 0; b < 2; ++b) K(rp, ll.u(j, b)) += dpsi[b] * mm;
            // concentration row
            const int rc = ll.c(i);
            K(rc, ll.c(j)) += shift * mm + conv + k.D * lap + k.dA3_dc * W * phi[sj] * dpsi.dot(G[si]);
            K(rc, ll.psi(j)) += W * phi[sj] * (k.dD_dpsi * dc.dot(G[si]) + k.dA3_dpsi * dpsi.dot(G[si])) + k.A3 * lap;
            for (int b = 0; b < 2; ++b) K(rc, ll.u(j, b)) += dc[b] * mm;
          }
          for (int j = 0; j < nbp; ++j) {
            const double qj = qv[static_cast<std::size_t>(j)];
            for (int a = 0; a < 2; ++a) {
              K(ll.u(i, a), ll.p(j)) -= W * qj * G[si][a];
              K(ll.p(j), ll.u(i, a)) -= W * qj * G[si][a];
            }
          }
        }
        for (int j = 0; j < nbp; ++j) {
          const double wq = W * qv[static_cast<std::size_t>(j)];
          K(ll.p(j), ll.lambda()) += wq;
          K(ll.lambda(), ll.p(j)) += wq;
        }
      }
    }

    if (res) {
      for (int i = 0; i < n; ++i) (*res)[g[static_cast<std::size_t>(i)]] += rl[static_cast<std::size_t>(i)];
    }
    if (jac) {
      const int* pos = local_positions_.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(n * n);
      auto& vals = jac->values();
      for (int e = 0; e < n * n; ++e) {
        if (pos[e] >= 0) vals[static_cast<std::size_t>(pos[e])] += kl[static_cast<std::size_t>(e)];
      }
    }
  }

  if (res && options_.boundary_consistency) add_boundary_terms(ctx, *res, -1.0);

  for (int d : dirichlet_) {
    if (res) (*res)[d] = y[d];
    if (jac) jac->set_identity_row(d);
  }
  if (res && !res->allFinite()) throw SolverError("assembly: residual is not finite");
}

void MixedProblem::add_boundary_terms(const StepContext& ctx, Eigen::VectorXd& res, double sign) const {
  const auto& L = disc_.layout;
  const FunctionSpace& S = *disc_.scalar;
  const ReferenceElement& element = S.element();
  const GaussRule1D gauss = gauss_legendre(S.order() + 3);
  const Mesh& mesh = *disc_.mesh;
  std::array<double, kMaxBasis> phi{};
  for (int edge_id : mesh.boundary_edges()) {
    const Edge& edge = mesh.edges()[static_cast<std::size_t>(edge_id)];
    const int t = edge.triangles[0];
    const int e = edge.local[0];
    const int a = (e + 1) % 3;
    const int b = (e + 2) % 3;
    const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
    const Point pa = mesh.vertices()[static_cast<std::size_t>(tri[static_cast<std::size_t>(a)])];
    const Point pb = mesh.vertices()[static_cast<std::size_t>(tri[static_cast<std::size_t>(b)])];
    const Eigen::Vector2d d = pb - pa;
    const double len = d.norm();
    const Vec2 normal(d.y() / len, -d.x() / len);
    const auto nodes = S.element_nodes(t);
    for (std::size_t q = 0; q < gauss.points.size(); ++q) {
      const double s = gauss.points[q];
      Barycentric bc{0.0, 0.0, 0.0};
      bc[static_cast<std::size_t>(a)] = 1.0 - s;
      bc[static_cast<std::size_t>(b)] = s;
      element.evaluate(bc, phi, {});
      const Point x = (1.0 - s) * pa + s * pb;
      const BoundaryFluxes flux = boundary_fluxes(case_, params_, x.x(), x.y(), ctx.t, normal);
      const double f = ctx.perturbation.factor(draw_index(ctx.step, static_cast<std::uint64_t>(edge_id), q, 1));
      const double w = sign * f * gauss.weights[q] * len;
      for (int i = 0; i < element.n_basis(); ++i) {
        const int node = nodes[static_cast<std::size_t>(i)];
        res[L.phase_offset() + node] += w * flux.psi * phi[static_cast<std::size_t>(i)];
        res[L.concentration_offset() + node] += w * flux.c * phi[static_cast<std::size_t>(i)];
      }
    }
  }
}

Eigen::VectorXd MixedProblem::residual(const Eigen::VectorXd& y, const Eigen::VectorXd& ydot,
                                       const StepContext& ctx) const {
  Eigen::VectorXd r;
  assemble(y, ydot, ctx, 0.0, nullptr, &r);
  return r;
}

AssembledSystem MixedProblem::jacobian(const Eigen::VectorXd& y, const Eigen::VectorXd& ydot,
                                       const StepContext& ctx, double shift) const {
  if (!(shift > 0.0)) throw ValidationError("jacobian: shift must be positive");
  AssembledSystem sys;
  sys.layout = disc_.layout;
  assemble(y, ydot, ctx, shift, &sys.matrix, &sys.residual);
  return sys;
}

BlockSystem MixedProblem::block_system(const Eigen::VectorXd& y, const StepContext& ctx) const {
  const auto& L = disc_.layout;
  if (y.size() != L.size()) throw ValidationError("block_system: state size does not match the layout");
  if (!y.allFinite()) throw SolverError("block_system: non-finite state");
  const ModelParameters& P = params_;
  const LocalLayout ll{disc_.velocity->element().n_basis(), disc_.pressure->element().n_basis()};
  const int nb = ll.nb;
  const int nbp = ll.nbp;
  const Tabulation tv = tabulate(disc_.velocity->element(), rule_);
  const Tabulation tp = tabulate(disc_.pressure->element(), rule_);
  const Mat2 lor_op = lorentz_operator(P);

  std::vector<Triplet> mass;
  std::vector<Triplet> op;
  BlockSystem out;
  out.load = Eigen::VectorXd::Zero(L.size());
  out.rhs = Eigen::VectorXd::Zero(L.size());
  std::vector<int> g;
  std::array<Eigen::Vector2d, kMaxBasis> G;

  for (int t = 0; t < static_cast<int>(disc_.mesh->n_triangles()); ++t) {
    const ElementGeometry geo = element_geometry(*disc_.mesh, t);
    local_to_global(disc_, ll, t, g);
    auto gi = [&g](int local) { return g[static_cast<std::size_t>(local)]; };
    for (std::size_t q = 0; q < rule_.size(); ++q) {
      const double W = rule_.weights[q] * std::abs(geo.det);
      const auto& phi = tv.values[q];
      const auto& qv = tp.values[q];
      for (int i = 0; i < nb; ++i) G[static_cast<std::size_t>(i)] = geo.inv_transpose * tv.gradients[q][static_cast<std::size_t>(i)];
      Vec2 u = Vec2::Zero();
      double psi = 0.0, c = 0.0;
      Vec2 dpsi = Vec2::Zero();
      for (int i = 0; i < nb; ++i) {
        const auto si = static_cast<std::size_t>(i);
        for (int a = 0; a < 2; ++a) u[a] += phi[si] * y[gi(ll.u(i, a))];
        psi += phi[si] * y[gi(ll.psi(i))];
        dpsi += y[gi(ll.psi(i))] * G[si];
        c += phi[si] * y[gi(ll.c(i))];
      }
      const Coefficients k = coefficients(psi, c, P);
      const Mat2 aniso = anisotropy_matrix(dpsi, P);
      const Point x = geo.map(rule_.points[q]);
      SourceValues src = sources(case_, P, x.x(), x.y(), ctx.t);
      const double f = ctx.perturbation.factor(draw_index(ctx.step, static_cast<std::uint64_t>(t), q, 0));

      for (int i = 0; i < nb; ++i) {
        const auto si = static_cast<std::size_t>(i);
        for (int j = 0; j < nb; ++j) {
          const auto sj = static_cast<std::size_t>(j);
          const double mm = W * phi[sj] * phi[si];
          const double conv = W * u.dot(G[sj]) * phi[si];
          const double lap = W * G[sj].dot(G[si]);
          for (int a = 0; a < 2; ++a) {
            mass.push_back({gi(ll.u(i, a)), gi(ll.u(j, a)), P.rho0 * mm});
            for (int b = 0; b < 2; ++b) {
              double v = -k.b * lor_op(a, b) * mm;
              if (a == b) v += P.mu * lap + P.rho0 * conv;
              op.push_back({gi(ll.u(i, a)), gi(ll.u(j, b)), v});
            }
          }
          mass.push_back({gi(ll.psi(i)), gi(ll.psi(j)), mm});
          mass.push_back({gi(ll.c(i)), gi(ll.c(j)), mm});
          op.push_back({gi(ll.psi(i)), gi(ll.psi(j)), W * (aniso * G[sj]).dot(G[si]) + conv});
          op.push_back({gi(ll.c(i)), gi(ll.psi(j)), k.A3 * lap});
          op.push_back({gi(ll.c(i)), gi(ll.c(j)), k.D * lap + conv});
        }
        for (int j = 0; j < nbp; ++j) {
          const double qj = qv[static_cast<std::size_t>(j)];
          for (int a = 0; a < 2; ++a) {
            op.push_back({gi(ll.u(i, a)), gi(ll.p(j)), -W * qj * G[si][a]});
            op.push_back({gi(ll.p(j)), gi(ll.u(i, a)), -W * qj * G[si][a]});
          }
        }
        for (int a = 0; a < 2; ++a) {
          out.load[gi(ll.u(i, a))] -= W * k.A1[a] * phi[si];
          out.rhs[gi(ll.u(i, a))] += W * f * src.F_u[a] * phi[si];
        }
        out.load[gi(ll.psi(i))] += W * k.A2 * phi[si];
        out.rhs[gi(ll.psi(i))] += W * f * src.F_psi * phi[si];
        out.rhs[gi(ll.c(i))] += W * f * src.F_c * phi[si];
      }
      for (int j = 0; j < nbp; ++j) {
        const double wq = W * qv[static_cast<std::size_t>(j)];
        op.push_back({gi(ll.p(j)), L.multiplier_index(), wq});
        op.push_back({L.multiplier_index(), gi(ll.p(j)), wq});
      }
    }
  }
  if (options_.boundary_consistency) add_boundary_terms(ctx, out.rhs, 1.0);
  out.mass = CsrMatrix::from_triplets(L.size(), L.size(), mass);
  out.op = CsrMatrix::from_triplets(L.size(), L.size(), op);
  return out;
}

Eigen::VectorXd MixedProblem::interpolate_exact(double t) const {
  const auto& L = disc_.layout;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(L.size());
  const ManufacturedCase mc = case_;
  const FEFunction u = interpolate(disc_.velocity, [&mc](const Point& x, double s, int comp) {
    const ExactValues e = mc.exact(x.x(), x.y(), s);
    return comp == 0 ? e.u : e.v;
  }, t);
  FEFunction p = interpolate(disc_.pressure, [&mc](const Point& x, double s, int) { return mc.exact(x.x(), x.y(), s).p; }, t);
  remove_mean(p);
  const FEFunction psi = interpolate(disc_.scalar, [&mc](const Point& x, double s, int) { return mc.exact(x.x(), x.y(), s).psi; }, t);
  const FEFunction c = interpolate(disc_.scalar, [&mc](const Point& x, double s, int) { return mc.exact(x.x(), x.y(), s).c; }, t);
  y.segment(L.velocity_offset(), L.n_velocity) = u.coefficients();
  y.segment(L.pressure_offset(), L.n_pressure) = p.coefficients();
  y.segment(L.phase_offset(), L.n_phase) = psi.coefficients();
  y.segment(L.concentration_offset(), L.n_concentration) = c.coefficients();
  return y;
}

Eigen::VectorXd MixedProblem::interpolate_exact_rate(double t) const {
  const auto& L = disc_.layout;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(L.size());
  const ManufacturedCase mc = case_;
  const FEFunction u = interpolate(disc_.velocity, [&mc](const Point& x, double s, int comp) {
    const ExactJets j = mc.derivatives(x.x(), x.y(), s);
    return comp == 0 ? j.u.dt : j.v.dt;
  }, t);
  FEFunction p = interpolate(disc_.pressure, [&mc](const Point& x, double s, int) { return mc.derivatives(x.x(), x.y(), s).p.dt; }, t);
  remove_mean(p);
  const FEFunction psi = interpolate(disc_.scalar, [&mc](const Point& x, double s, int) { return mc.derivatives(x.x(), x.y(), s).psi.dt; }, t);
  const FEFunction c = interpolate(disc_.scalar, [&mc](const Point& x, double s, int) { return mc.derivatives(x.x(), x.y(), s).c.dt; }, t);
  y.segment(L.velocity_offset(), L.n_velocity) = u.coefficients();
  y.segment(L.pressure_offset(), L.n_pressure) = p.coefficients();
  y.segment(L.phase_offset(), L.n_phase) = psi.coefficients();
  y.segment(L.concentration_offset(), L.n_concentration) = c.coefficients();
  return y;
}

FEFunction MixedProblem::velocity(const Eigen::VectorXd& y) const {
  return FEFunction(disc_.velocity, y.segment(layout().velocity_offset(), layout().n_velocity));
}
FEFunction MixedProblem::pressure(const Eigen::VectorXd& y) const {
  return FEFunction(disc_.pressure, y.segment(layout().pressure_offset(), layout().n_pressure));
}
FEFunction MixedProblem::phase(const Eigen::VectorXd& y) const {
  return FEFunction(disc_.scalar, y.segment(layout().phase_offset(), layout().n_phase));
}
FEFunction MixedProblem::concentration(const Eigen::VectorXd& y) const {
  return FEFunction(disc_.scalar, y.segment(layout().concentration_offset(), layout().n_concentration));
}

}  // namespace dendrite
