#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dendrite/assembly.hpp"
#include "dendrite/timestepper.hpp"

namespace dendrite {

enum class Field { u, p, psi, c };
inline constexpr std::array<Field, 4> kAllFields{Field::u, Field::p, Field::psi, Field::c};

[[nodiscard]] std::string to_string(Field f);

/// One number per field, indexed by Field.
struct FieldErrors {
  std::array<double, 4> values{};
  [[nodiscard]] double& operator[](Field f) { return values[static_cast<std::size_t>(f)]; }
  [[nodiscard]] double operator[](Field f) const { return values[static_cast<std::size_t>(f)]; }
};

/// n x n grid on the case domain with n = subdivisions_for(h).
[[nodiscard]] Mesh study_mesh(const ManufacturedCase& mc, double h);

/// L2(Omega) error of one field of state y against the exact solution at t.
[[nodiscard]] double field_error(const MixedProblem& problem, const Eigen::VectorXd& y, double t, Field f);

/// L2(Omega) norm of one field of the difference of two states.
[[nodiscard]] double field_difference(const MixedProblem& problem, const Eigen::VectorXd& a,
                                      const Eigen::VectorXd& b, Field f);

/// Accumulates the discrete space-time norm (tau sum_{i>=1} ||e_i||^2)^{1/2}.
class SpaceTimeAccumulator {
 public:
  void add(double tau, const FieldErrors& level);
  [[nodiscard]] FieldErrors result() const;

 private:
  FieldErrors sum_;
};

struct Trajectory {
  TimeGrid grid;
  std::vector<Eigen::VectorXd> states;  // t_0 .. t_K
};

/// (tau sum_{i=1}^{K} ||field_h(t_i) - field_ex(t_i)||^2)^{1/2}.
[[nodiscard]] double space_time_error(const MixedProblem& problem, const Trajectory& traj, Field f);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<double> residuals;
};

/// Least-squares line through (x_i, y_i). Needs >= 3 points with distinct x.
[[nodiscard]] RateFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
/// Slope of log(error) against log(scale).
[[nodiscard]] RateFit fit_rate(const std::vector<double>& scales, const std::vector<double>& errors);
/// log(e_i / e_{i+1}) / log(s_i / s_{i+1}) for consecutive pairs.
[[nodiscard]] std::vector<double> pairwise_rates(const std::vector<double>& scales,
                                                 const std::vector<double>& errors);

struct StudyCommon {
  CaseId case_id = CaseId::ex2;
  int order = 2;
  double final_time = 1.0;
  ModelParameters params = ModelParameters::nondimensional();
  NewtonOptions newton;
  AssemblyOptions assembly;
  int jobs = 1;
};

struct ErrorRecord {
  double h = 0.0;        // target mesh size
  double h_actual = 0.0; // longest edge
  double tau = 0.0;
  int elements = 0;
  int unknowns = 0;
  std::string pair;      // e.g. "P2-P1"
  FieldErrors errors;
  int max_newton = 0;
  double wall_seconds = 0.0;
};

struct RateReport {
  std::vector<ErrorRecord> records;
  std::vector<double> scales;  // abscissae of the fits
  std::array<RateFit, 4> fits;
  std::array<std::vector<double>, 4> pairwise;
  [[nodiscard]] const RateFit& fit(Field f) const { return fits[static_cast<std::size_t>(f)]; }
};

/// Runs one transient MMS solve from the interpolated exact data and returns
/// its space-time errors.
[[nodiscard]] ErrorRecord run_error_case(const StudyCommon& common, double h, int steps);

struct SpatialStudy {
  StudyCommon common;
  std::vector<double> h_list{0.2, 0.15, 0.1, 0.05};
  double tau = 1e-3;
};

struct TemporalStudy {
  StudyCommon common;
  double h = 0.05;
  std::vector<double> tau_list{0.1, 0.05, 0.025, 0.0125};
};

/// Rates are fitted against the longest mesh edge (spatial) or tau (temporal).
[[nodiscard]] RateReport convergence_study_spatial(const SpatialStudy& study);
[[nodiscard]] RateReport convergence_study_temporal(const TemporalStudy& study);

struct StabilityStudy {
  StudyCommon common = [] {
    StudyCommon c;
    c.case_id = CaseId::ex1;
    return c;
  }();
  double h = 0.2;
  double tau = 0.1;
  std::vector<double> eps_list{0.01, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4};
  std::uint64_t seed = 20240601;
  RandomDistribution distribution = RandomDistribution::uniform;
};

struct PerturbationRecord {
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string failure;
  FieldErrors e_ex;   // against the exact solution
  FieldErrors e_app;  // against the unperturbed discrete solution
};

struct StabilityReport {
  FieldErrors baseline;  // unperturbed discretization error
  std::vector<PerturbationRecord> records;
  std::array<RateFit, 4> fit_ex;
  std::array<RateFit, 4> fit_app;
};

/// Seed used by the run with the given index of a sweep.
[[nodiscard]] std::uint64_t run_seed(std::uint64_t seed, std::uint64_t run_index);

[[nodiscard]] StabilityReport perturbation_study(const StabilityStudy& study);

/// CSV writers (17 significant digits).
void write_rates_csv(std::ostream& out, const RateReport& report, const std::string& scale_name);
void write_stability_csv(std::ostream& out, const StabilityReport& report);
/// Two-column log-log data (log10 scale, log10 error) for one field.
void write_loglog(std::ostream& out, const std::vector<double>& scales, const std::vector<ErrorRecord>& records,
                  Field f);

/// Field values along the horizontal line y = y0, sampled at n points.
void write_slice(std::ostream& out, const MixedProblem& problem, const Eigen::VectorXd& y, double y0, int n);

}  // namespace dendrite
