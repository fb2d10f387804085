#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dendrite/assembly.hpp"
#include "dendrite/error.hpp"

namespace dendrite {

/// Uniform grid t_i = i T / K on [0, T]; t_K is exactly T.
struct TimeGrid {
  double final_time = 1.0;
  int steps = 1;

  [[nodiscard]] double tau() const { return final_time / steps; }
  [[nodiscard]] double time(int i) const { return i == steps ? final_time : i * tau(); }
  void validate() const;
};

/// Newton stops when ||F||_inf <= tol_abs + tol_rel ||F_0||_inf or the
/// update satisfies ||dY||_inf <= step_tol (1 + ||Y||_inf).
struct NewtonOptions {
  double tol_abs = 1e-12;
  double tol_rel = 1e-10;
  double step_tol = 1e-13;
  int max_iterations = 25;
  /// Divergence is declared when the residual exceeds this multiple of ||F_0||.
  double divergence_factor = 1e4;
  /// Keep the factorized Jacobian across iterations and steps (modified
  /// Newton); it is rebuilt whenever an iteration reduces the residual by
  /// less than `refresh_ratio` or the shift 1/tau changes.
  bool reuse_jacobian = true;
  double refresh_ratio = 0.25;
};

struct StepStats {
  int step = 0;
  double time = 0.0;
  int iterations = 0;
  int factorizations = 0;
  double residual = 0.0;
  double wall_seconds = 0.0;
};

/// Newton failure with the last iterate and the residual history attached.
class NewtonError : public SolverError {
 public:
  NewtonError(const std::string& what, Eigen::VectorXd last_iterate, std::vector<double> history)
      : SolverError(what), last_iterate_(std::move(last_iterate)), history_(std::move(history)) {}
  [[nodiscard]] const Eigen::VectorXd& last_iterate() const { return last_iterate_; }
  [[nodiscard]] const std::vector<double>& history() const { return history_; }

 private:
  Eigen::VectorXd last_iterate_;
  std::vector<double> history_;
};

/// Sparse LU on a fixed pattern: the ordering is computed on the first
/// factorization and reused. A structurally or numerically singular matrix
/// raises SolverError naming the block of the offending column.
class LinearSolver {
 public:
  explicit LinearSolver(std::optional<SystemLayout> layout = std::nullopt);
  ~LinearSolver();
  LinearSolver(LinearSolver&&) noexcept;
  LinearSolver& operator=(LinearSolver&&) noexcept;

  void factorize(const CsrMatrix& a);
  /// Solves A x = b with ||A x - b|| <= 1e-10 ||b|| (one refinement step allowed).
  [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot convenience wrapper around LinearSolver.
[[nodiscard]] Eigen::VectorXd linear_solve(const CsrMatrix& a, const Eigen::VectorXd& b,
                                           std::optional<SystemLayout> layout = std::nullopt);

struct StepResult {
  Eigen::VectorXd y;
  StepStats stats;
  std::vector<double> history;
};

/// Backward Euler with a Newton solve per step.
class BackwardEuler {
 public:
  explicit BackwardEuler(const TransientSystem& problem, NewtonOptions options = {});

  /// Advances y_prev from t_new - tau to t_new. The initial guess is y_prev.
  [[nodiscard]] StepResult step(const Eigen::VectorXd& y_prev, double t_new, double tau,
                                int step_index, const Perturbation& perturbation = {});

 private:
  const TransientSystem& problem_;
  NewtonOptions options_;
  LinearSolver solver_;
  bool factorized_ = false;
  double factor_shift_ = 0.0;
};

/// Called after each accepted step with (i, t_i, Y_i); also for i = 0.
using StepObserver = std::function<void(int, double, const Eigen::VectorXd&)>;

struct TransientOptions {
  TimeGrid grid;
  Perturbation perturbation;
  NewtonOptions newton;
  StepObserver observer;
};

struct TransientResult {
  Eigen::VectorXd final_state;
  std::vector<StepStats> stats;
};

[[nodiscard]] TransientResult solve_transient(const TransientSystem& problem, const Eigen::VectorXd& y0,
                                              const TransientOptions& options);

/// CSV with columns step,time,iterations,factorizations,residual,wall_seconds.
/// With timings=false the wall_seconds column is written as 0 so the file is reproducible.
void write_step_log(std::ostream& out, const std::vector<StepStats>& stats, bool timings = true);

}  // namespace dendrite
