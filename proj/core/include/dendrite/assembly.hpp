#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dendrite/constitutive.hpp"
#include "dendrite/mms.hpp"
#include "dendrite/random.hpp"
#include "dendrite/sparse.hpp"
#include "dendrite/spaces.hpp"

namespace dendrite {

// ---------------------------------------------------------------------------
// Standalone forms on a single space
// ---------------------------------------------------------------------------

/// coefficient * (phi_j, phi_i); block diagonal for vector spaces.
[[nodiscard]] CsrMatrix assemble_mass(const FunctionSpace& space, double coefficient = 1.0);

/// coefficient * (grad phi_j, grad phi_i); block diagonal for vector spaces.
/// No boundary elimination is applied.
[[nodiscard]] CsrMatrix assemble_stiffness(const FunctionSpace& space, double coefficient = 1.0);

/// Viscous form a_u(u, v) = mu (grad u, grad v) on a vector space.
[[nodiscard]] CsrMatrix assemble_stiffness_viscous(const FunctionSpace& velocity, double mu);

/// C[q, u] = -(q, div u). Requires a Taylor-Hood pair (vector P_l, scalar P_{l-1}, l >= 2).
[[nodiscard]] CsrMatrix assemble_divergence(const FunctionSpace& velocity, const FunctionSpace& pressure);

/// N[w, v] = scale * sum_i int wind_i (d_i v) w (componentwise for vector spaces).
[[nodiscard]] CsrMatrix assemble_convection(const FunctionSpace& space, const FEFunction& wind,
                                            double scale = 1.0);

/// K[phi, z] = (A_g(grad psi_h) grad z, grad phi).
[[nodiscard]] CsrMatrix assemble_anisotropic_stiffness(const FunctionSpace& space, const FEFunction& psi,
                                                       const ModelParameters& params);

// ---------------------------------------------------------------------------
// Coupled system
// ---------------------------------------------------------------------------

enum class Block { velocity, pressure, phase, concentration, multiplier };

[[nodiscard]] std::string to_string(Block b);

/// Offsets of the four DOF blocks plus the zero-mean multiplier slot:
/// [u (interleaved) | p | psi | c | lambda].
struct SystemLayout {
  int n_velocity = 0;
  int n_pressure = 0;
  int n_phase = 0;
  int n_concentration = 0;

  [[nodiscard]] int velocity_offset() const { return 0; }
  [[nodiscard]] int pressure_offset() const { return n_velocity; }
  [[nodiscard]] int phase_offset() const { return n_velocity + n_pressure; }
  [[nodiscard]] int concentration_offset() const { return phase_offset() + n_phase; }
  [[nodiscard]] int multiplier_index() const { return concentration_offset() + n_concentration; }
  [[nodiscard]] int size() const { return multiplier_index() + 1; }

  [[nodiscard]] Block block_of(int index) const;
  [[nodiscard]] int offset(Block b) const;
  [[nodiscard]] int block_size(Block b) const;
};

/// Velocity order l of the pair P_l - P_{l-1}; psi and c use P_l.
struct Discretization {
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<const FunctionSpace> velocity;
  std::shared_ptr<const FunctionSpace> pressure;
  std::shared_ptr<const FunctionSpace> scalar;
  SystemLayout layout;

  [[nodiscard]] int order() const { return velocity->order(); }
};

[[nodiscard]] Discretization make_discretization(std::shared_ptr<const Mesh> mesh, int order);

enum class AnisotropyLinearization { full, frozen };

struct AssemblyOptions {
  AnisotropyLinearization linearization = AnisotropyLinearization::full;
  /// Include the exact-flux boundary integrals on the psi and c equations.
  bool boundary_consistency = true;
  /// Quadrature degree; <= 0 selects max(2l + 2, 3l - 1).
  int quadrature_degree = 0;
};

/// Time level at which the system is evaluated. `step` keys the
/// perturbation draws so every Newton iteration of a step sees the same field.
struct StepContext {
  double t = 0.0;
  std::uint64_t step = 0;
  Perturbation perturbation;
};

/// Matrix, residual and layout of one Newton linearization.
struct AssembledSystem {
  CsrMatrix matrix;
  Eigen::VectorXd residual;
  SystemLayout layout;
};

/// Implicit system F(t, Y, Ydot) = 0 as seen by the time stepper.
class TransientSystem {
 public:
  virtual ~TransientSystem() = default;
  [[nodiscard]] virtual int system_size() const = 0;
  [[nodiscard]] virtual Eigen::VectorXd residual(const Eigen::VectorXd& y, const Eigen::VectorXd& ydot,
                                                 const StepContext& ctx) const = 0;
  /// shift * dF/dYdot + dF/dY together with the residual.
  [[nodiscard]] virtual AssembledSystem jacobian(const Eigen::VectorXd& y, const Eigen::VectorXd& ydot,
                                                 const StepContext& ctx, double shift) const = 0;
  /// Block structure used to name the offending block of a singular matrix.
  [[nodiscard]] virtual std::optional<SystemLayout> block_layout() const { return std::nullopt; }
};

/// M dY/dt + A(Y) Y + L(Y) = R split into its pieces (velocity Dirichlet rows
/// are not eliminated here).
struct BlockSystem {
  CsrMatrix mass;
  CsrMatrix op;
  Eigen::VectorXd load;
  Eigen::VectorXd rhs;
};

/// Mixed finite-element discretization of the coupled flow / phase-field /
/// concentration model with manufactured right-hand sides.
class MixedProblem final : public TransientSystem {
 public:
  MixedProblem(Discretization disc, ModelParameters params, ManufacturedCase mc,
               AssemblyOptions options = {});

  [[nodiscard]] const Discretization& discretization() const { return disc_; }
  [[nodiscard]] const SystemLayout& layout() const { return disc_.layout; }
  [[nodiscard]] const ModelParameters& params() const { return params_; }
  [[nodiscard]] const ManufacturedCase& manufactured_case() const { return case_; }
  [[nodiscard]] const AssemblyOptions& options() const { return options_; }
  [[nodiscard]] const std::shared_ptr<const SparsityPattern>& jacobian_pattern() const { return pattern_; }
  /// Velocity DOFs held at zero (global indices).
  [[nodiscard]] const std::vector<int>& dirichlet_dofs() const { return dirichlet_; }

  /// F(t, Y, Ydot) of the semi-discrete system, with velocity Dirichlet rows
  /// replaced by Y_i. Throws SolverError on non-finite input.
  [[nodiscard]] Eigen::VectorXd residual(const Eigen::VectorXd& y, const Eigen::VectorXd& ydot,
                                         const StepContext& ctx) const override;

  [[nodiscard]] AssembledSystem jacobian(const Eigen::VectorXd& y, const Eigen::VectorXd& ydot,
                                         const StepContext& ctx, double shift) const override;
  [[nodiscard]] int system_size() const override { return disc_.layout.size(); }
  [[nodiscard]] std::optional<SystemLayout> block_layout() const override { return disc_.layout; }

  /// Mass matrix M, operator A(Y), load L(Y) and right-hand side R.
  [[nodiscard]] BlockSystem block_system(const Eigen::VectorXd& y, const StepContext& ctx) const;

  /// Nodal interpolant of the exact solution (pressure shifted to zero mean).
  [[nodiscard]] Eigen::VectorXd interpolate_exact(double t) const;
  /// Nodal interpolant of the exact time derivative.
  [[nodiscard]] Eigen::VectorXd interpolate_exact_rate(double t) const;

  /// Views of one block of a state vector as an FEFunction.
  [[nodiscard]] FEFunction velocity(const Eigen::VectorXd& y) const;
  [[nodiscard]] FEFunction pressure(const Eigen::VectorXd& y) const;
  [[nodiscard]] FEFunction phase(const Eigen::VectorXd& y) const;
  [[nodiscard]] FEFunction concentration(const Eigen::VectorXd& y) const;

 private:
  void assemble(const Eigen::VectorXd& y, const Eigen::VectorXd& ydot, const StepContext& ctx,
                double shift, CsrMatrix* jac, Eigen::VectorXd* res) const;
  void add_boundary_terms(const StepContext& ctx, Eigen::VectorXd& res, double sign) const;

  Discretization disc_;
  ModelParameters params_;
  ManufacturedCase case_;
  AssemblyOptions options_;
  QuadratureRule rule_;
  std::shared_ptr<const SparsityPattern> pattern_;
  std::vector<int> local_positions_;  // per element, dense local -> pattern position
  int local_size_ = 0;
  std::vector<int> dirichlet_;
};

}  // namespace dendrite
