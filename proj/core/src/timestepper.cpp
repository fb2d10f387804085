#include "dendrite/timestepper.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

namespace dendrite {

void TimeGrid::validate() const {
  if (!(final_time > 0.0) || !std::isfinite(final_time)) throw ValidationError("time grid: T must be positive");
  if (steps < 1) throw ValidationError("time grid: need at least one step");
}

struct LinearSolver::Impl {
  using Matrix = Eigen::SparseMatrix<double>;
  std::optional<SystemLayout> layout;
  Eigen::SparseLU<Matrix, Eigen::COLAMDOrdering<int>> lu;
  Matrix matrix;
  std::shared_ptr<const SparsityPattern> analyzed;

  [[noreturn]] void singular() const {
    std::string what = "linear solve: singular matrix";
    const std::string message = lu.lastErrorMessage();
    const auto at = message.find("ZERO COLUMN AT ");
    if (at != std::string::npos) {
      const int permuted = std::stoi(message.substr(at + 15)) - 1;
      const auto& perm = lu.colsPermutation().indices();
      int column = permuted;
      for (int i = 0; i < perm.size(); ++i) {
        if (perm[i] == permuted) column = i;
      }
      what += " (zero pivot in column " + std::to_string(column);
      if (layout) what += ", " + to_string(layout->block_of(column)) + " block";
      what += ")";
    }
    throw SolverError(what);
  }
};

LinearSolver::LinearSolver(std::optional<SystemLayout> layout) : impl_(std::make_unique<Impl>()) {
  impl_->layout = layout;
}
LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

void LinearSolver::factorize(const CsrMatrix& a) {
  if (a.rows() != a.cols()) throw ValidationError("linear solve: matrix is not square");
  for (double v : a.values()) {
    if (!std::isfinite(v)) throw SolverError("linear solve: non-finite matrix entry");
  }
  impl_->matrix = a.to_eigen();
  impl_->matrix.makeCompressed();
  if (impl_->analyzed != a.pattern_ptr()) {
    impl_->lu.analyzePattern(impl_->matrix);
    impl_->analyzed = a.pattern_ptr();
  }
  impl_->lu.factorize(impl_->matrix);
  if (impl_->lu.info() != Eigen::Success) impl_->singular();
}

Eigen::VectorXd LinearSolver::solve(const Eigen::VectorXd& b) const {
  if (b.size() != impl_->matrix.rows()) throw ValidationError("linear solve: size mismatch");
  Eigen::VectorXd x = impl_->lu.solve(b);
  const double bn = b.norm();
  double rn = (impl_->matrix * x - b).norm();
  if (rn > 1e-10 * bn) {
    x -= impl_->lu.solve(Eigen::VectorXd(impl_->matrix * x - b));
    rn = (impl_->matrix * x - b).norm();
  }
  if (!x.allFinite() || rn > 1e-10 * bn) {
    std::ostringstream msg;
    msg << "linear solve: relative residual " << (bn > 0 ? rn / bn : rn) << " exceeds 1e-10 (matrix is numerically singular)";
    throw SolverError(msg.str());
  }
  return x;
}

Eigen::VectorXd linear_solve(const CsrMatrix& a, const Eigen::VectorXd& b, std::optional<SystemLayout> layout) {
  LinearSolver solver(layout);
  solver.factorize(a);
  return solver.solve(b);
}

BackwardEuler::BackwardEuler(const TransientSystem& problem, NewtonOptions options)
    : problem_(problem), options_(options), solver_(problem.block_layout()) {}

StepResult BackwardEuler::step(const Eigen::VectorXd& y_prev, double t_new, double tau, int step_index,
                               const Perturbation& perturbation) {
  if (!(tau > 0.0)) throw ValidationError("time step must be positive");
  const auto start = std::chrono::steady_clock::now();
  const StepContext ctx{t_new, static_cast<std::uint64_t>(step_index), perturbation};
  const double shift = 1.0 / tau;

  StepResult out;
  out.y = y_prev;
  double r0 = -1.0;
  double r_prev = 0.0;
  for (int it = 0;; ++it) {
    const Eigen::VectorXd ydot = (out.y - y_prev) * shift;
    const Eigen::VectorXd res = problem_.residual(out.y, ydot, ctx);
    const double r = res.lpNorm<Eigen::Infinity>();
    out.history.push_back(r);
    if (r0 < 0.0) r0 = r;
    if (!std::isfinite(r)) throw NewtonError("Newton: non-finite residual", out.y, out.history);
    if (r <= options_.tol_abs + options_.tol_rel * r0) {
      out.stats.iterations = it;
      out.stats.residual = r;
      break;
    }
    if (r > options_.divergence_factor * std::max(r0, options_.tol_abs)) {
      throw NewtonError("Newton: diverged at step " + std::to_string(step_index), out.y, out.history);
    }
    if (it >= options_.max_iterations) {
      throw NewtonError("Newton: no convergence in " + std::to_string(options_.max_iterations) +
                            " iterations at step " + std::to_string(step_index),
                        out.y, out.history);
    }
    const bool refresh = !options_.reuse_jacobian || !factorized_ || std::abs(shift - factor_shift_) > 1e-12 * shift ||
                         (it > 0 && r > options_.refresh_ratio * r_prev);
    if (refresh) {
      factorized_ = false;
      solver_.factorize(problem_.jacobian(out.y, ydot, ctx, shift).matrix);
      factorized_ = true;
      factor_shift_ = shift;
      ++out.stats.factorizations;
    }
    const Eigen::VectorXd dy = solver_.solve(res);
    out.y -= dy;
    r_prev = r;
    if (dy.lpNorm<Eigen::Infinity>() <= options_.step_tol * (1.0 + out.y.lpNorm<Eigen::Infinity>())) {
      const Eigen::VectorXd ydot_new = (out.y - y_prev) * shift;
      out.stats.iterations = it + 1;
      out.stats.residual = problem_.residual(out.y, ydot_new, ctx).lpNorm<Eigen::Infinity>();
      out.history.push_back(out.stats.residual);
      break;
    }
  }
  out.stats.step = step_index;
  out.stats.time = t_new;
  out.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

TransientResult solve_transient(const TransientSystem& problem, const Eigen::VectorXd& y0,
                                const TransientOptions& options) {
  options.grid.validate();
  if (y0.size() != problem.system_size()) throw ValidationError("initial state size does not match the layout");
  BackwardEuler stepper(problem, options.newton);
  TransientResult out;
  out.final_state = y0;
  out.stats.reserve(static_cast<std::size_t>(options.grid.steps));
  if (options.observer) options.observer(0, 0.0, y0);
  for (int i = 1; i <= options.grid.steps; ++i) {
    const double t = options.grid.time(i);
    StepResult s = stepper.step(out.final_state, t, t - options.grid.time(i - 1), i, options.perturbation);
    out.final_state = std::move(s.y);
    out.stats.push_back(s.stats);
    if (options.observer) options.observer(i, t, out.final_state);
  }
  return out;
}

void write_step_log(std::ostream& out, const std::vector<StepStats>& stats, bool timings) {
  out << "step,time,iterations,factorizations,residual,wall_seconds\n" << std::setprecision(17);
  for (const auto& s : stats) {
    out << s.step << ',' << s.time << ',' << s.iterations << ',' << s.factorizations << ',' << s.residual << ','
        << (timings ? s.wall_seconds : 0.0) << '\n';
  }
}

}  // namespace dendrite
