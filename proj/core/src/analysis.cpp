#include "dendrite/analysis.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <iomanip>
#include <ostream>
#include <thread>

namespace dendrite {

std::string to_string(Field f) {
  switch (f) {
    case Field::u: return "u";
    case Field::p: return "p";
    case Field::psi: return "psi";
    case Field::c: return "c";
  }
  return "?";
}

namespace {

FieldFunction exact_field(const ManufacturedCase& mc, Field f) {
  switch (f) {
    case Field::u:
      return [mc](const Point& x, double t, int comp) {
        const ExactValues e = mc.exact(x.x(), x.y(), t);
        return comp == 0 ? e.u : e.v;
      };
    case Field::p: return [mc](const Point& x, double t, int) { return mc.exact(x.x(), x.y(), t).p; };
    case Field::psi: return [mc](const Point& x, double t, int) { return mc.exact(x.x(), x.y(), t).psi; };
    case Field::c: return [mc](const Point& x, double t, int) { return mc.exact(x.x(), x.y(), t).c; };
  }
  return {};
}

FEFunction field_view(const MixedProblem& problem, const Eigen::VectorXd& y, Field f) {
  switch (f) {
    case Field::u: return problem.velocity(y);
    case Field::p: return problem.pressure(y);
    case Field::psi: return problem.phase(y);
    case Field::c: return problem.concentration(y);
  }
  throw ValidationError("unknown field");
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads; rethrows the first
/// failure (lowest index) after all workers finish.
template <typename Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  auto run = [&](int i) {
    try {
      fn(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  };
  const int workers = std::max(1, std::min(jobs, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) run(i);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int i = w; i < n; i += workers) run(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string pair_name(int order) { return "P" + std::to_string(order) + "-P" + std::to_string(order - 1); }

}  // namespace

Mesh study_mesh(const ManufacturedCase& mc, double h) {
  const int n = subdivisions_for(h);
  return generate_rect_mesh(mc.domain(), n, n);
}

double field_error(const MixedProblem& problem, const Eigen::VectorXd& y, double t, Field f) {
  return l2_error(field_view(problem, y, f), exact_field(problem.manufactured_case(), f), t);
}

double field_difference(const MixedProblem& problem, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                        Field f) {
  const Eigen::VectorXd d = a - b;
  return l2_error(field_view(problem, d, f), [](const Point&, double, int) { return 0.0; }, 0.0);
}

void SpaceTimeAccumulator::add(double tau, const FieldErrors& level) {
  for (std::size_t i = 0; i < 4; ++i) sum_.values[i] += tau * level.values[i] * level.values[i];
}

FieldErrors SpaceTimeAccumulator::result() const {
  FieldErrors out;
  for (std::size_t i = 0; i < 4; ++i) out.values[i] = std::sqrt(sum_.values[i]);
  return out;
}

double space_time_error(const MixedProblem& problem, const Trajectory& traj, Field f) {
  if (static_cast<int>(traj.states.size()) != traj.grid.steps + 1) {
    throw ValidationError("space_time_error: trajectory is incomplete");
  }
  double sum = 0.0;
  for (int i = 1; i <= traj.grid.steps; ++i) {
    const double e = field_error(problem, traj.states[static_cast<std::size_t>(i)], traj.grid.time(i), f);
    sum += traj.grid.tau() * e * e;
  }
  return std::sqrt(sum);
}

RateFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ValidationError("fit: size mismatch");
  if (x.size() < 3) throw ValidationError("fit: need at least 3 points for rates");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw ValidationError("fit: non-finite data");
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      if (x[i] == x[j]) throw ValidationError("fit: duplicate abscissae");
    }
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    fit.residuals.push_back(r);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

RateFit fit_rate(const std::vector<double>& scales, const std::vector<double>& errors) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < scales.size() && i < errors.size(); ++i) {
    if (!(scales[i] > 0.0) || !(errors[i] > 0.0)) throw ValidationError("fit_rate: scales and errors must be positive");
    lx.push_back(std::log(scales[i]));
    ly.push_back(std::log(errors[i]));
  }
  if (scales.size() != errors.size()) throw ValidationError("fit: size mismatch");
  return fit_line(lx, ly);
}

std::vector<double> pairwise_rates(const std::vector<double>& scales, const std::vector<double>& errors) {
  if (scales.size() != errors.size()) throw ValidationError("pairwise rates: size mismatch");
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < scales.size(); ++i) {
    out.push_back(std::log(errors[i] / errors[i + 1]) / std::log(scales[i] / scales[i + 1]));
  }
  return out;
}

ErrorRecord run_error_case(const StudyCommon& common, double h, int steps) {
  const auto start = std::chrono::steady_clock::now();
  common.params.validate();
  const ManufacturedCase mc(common.case_id);
  auto mesh = std::make_shared<const Mesh>(study_mesh(mc, h));
  MixedProblem problem(make_discretization(mesh, common.order), common.params, mc, common.assembly);

  TransientOptions opts;
  opts.grid = TimeGrid{common.final_time, steps};
  opts.newton = common.newton;
  SpaceTimeAccumulator acc;
  const double tau = opts.grid.tau();
  opts.observer = [&](int i, double t, const Eigen::VectorXd& y) {
    if (i == 0) return;
    FieldErrors level;
    for (Field f : kAllFields) level[f] = field_error(problem, y, t, f);
    acc.add(tau, level);
  };
  const TransientResult res = solve_transient(problem, problem.interpolate_exact(0.0), opts);

  ErrorRecord rec;
  rec.h = h;
  rec.h_actual = mesh->h();
  rec.tau = tau;
  rec.elements = static_cast<int>(mesh->n_triangles());
  rec.unknowns = problem.layout().size();
  rec.pair = pair_name(common.order);
  rec.errors = acc.result();
  for (const auto& s : res.stats) rec.max_newton = std::max(rec.max_newton, s.iterations);
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

namespace {

RateReport make_report(std::vector<ErrorRecord> records, const std::vector<double>& scales) {
  RateReport report;
  report.records = std::move(records);
  report.scales = scales;
  for (Field f : kAllFields) {
    std::vector<double> e;
    for (const auto& r : report.records) e.push_back(r.errors[f]);
    const auto k = static_cast<std::size_t>(f);
    report.pairwise[k] = pairwise_rates(scales, e);
    if (scales.size() >= 3) report.fits[k] = fit_rate(scales, e);
  }
  return report;
}

}  // namespace

RateReport convergence_study_spatial(const SpatialStudy& study) {
  if (study.h_list.size() < 3) throw ValidationError("convergence: need >= 3 meshes for rates");
  const int steps = static_cast<int>(std::lround(study.common.final_time / study.tau));
  if (steps < 1 || std::abs(steps * study.tau - study.common.final_time) > 1e-9 * study.common.final_time) {
    throw ValidationError("convergence: tau must divide T");
  }
  std::vector<ErrorRecord> records(study.h_list.size());
  parallel_for(static_cast<int>(study.h_list.size()), study.common.jobs, [&](int i) {
    const double h = study.h_list[static_cast<std::size_t>(i)];
    try {
      records[static_cast<std::size_t>(i)] = run_error_case(study.common, h, steps);
    } catch (const SolverError& e) {
      throw SolverError("convergence: run on mesh h = " + std::to_string(h) + " failed: " + e.what());
    }
  });
  std::vector<double> h_actual;
  for (const auto& r : records) h_actual.push_back(r.h_actual);
  return make_report(std::move(records), h_actual);
}

RateReport convergence_study_temporal(const TemporalStudy& study) {
  if (study.tau_list.size() < 3) throw ValidationError("temporal: need >= 3 time steps for rates");
  std::vector<ErrorRecord> records(study.tau_list.size());
  parallel_for(static_cast<int>(study.tau_list.size()), study.common.jobs, [&](int i) {
    const double tau = study.tau_list[static_cast<std::size_t>(i)];
    const int steps = static_cast<int>(std::lround(study.common.final_time / tau));
    if (steps < 1 || std::abs(steps * tau - study.common.final_time) > 1e-9 * study.common.final_time) {
      throw ValidationError("temporal: tau must divide T");
    }
    try {
      records[static_cast<std::size_t>(i)] = run_error_case(study.common, study.h, steps);
    } catch (const SolverError& e) {
      throw SolverError("temporal: run with tau = " + std::to_string(tau) + " failed: " + e.what());
    }
  });
  return make_report(std::move(records), study.tau_list);
}

std::uint64_t run_seed(std::uint64_t seed, std::uint64_t run_index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (run_index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

StabilityReport perturbation_study(const StabilityStudy& study) {
  for (double e : study.eps_list) {
    if (!(e >= 0.0 && e < 1.0)) throw ValidationError("stability: epsilon must lie in [0, 1)");
  }
  const StudyCommon& common = study.common;
  common.params.validate();
  const int steps = static_cast<int>(std::lround(common.final_time / study.tau));
  if (steps < 1 || std::abs(steps * study.tau - common.final_time) > 1e-9 * common.final_time) {
    throw ValidationError("stability: tau must divide T");
  }
  const ManufacturedCase mc(common.case_id);
  auto mesh = std::make_shared<const Mesh>(study_mesh(mc, study.h));
  const MixedProblem problem(make_discretization(mesh, common.order), common.params, mc, common.assembly);
  const Eigen::VectorXd y0 = problem.interpolate_exact(0.0);
  const TimeGrid grid{common.final_time, steps};

  // Baseline trajectory, kept for the E_app differences.
  std::vector<Eigen::VectorXd> baseline(static_cast<std::size_t>(steps + 1));
  StabilityReport report;
  {
    TransientOptions opts;
    opts.grid = grid;
    opts.newton = common.newton;
    SpaceTimeAccumulator acc;
    opts.observer = [&](int i, double t, const Eigen::VectorXd& y) {
      baseline[static_cast<std::size_t>(i)] = y;
      if (i == 0) return;
      FieldErrors level;
      for (Field f : kAllFields) level[f] = field_error(problem, y, t, f);
      acc.add(grid.tau(), level);
    };
    (void)solve_transient(problem, y0, opts);
    report.baseline = acc.result();
  }

  report.records.resize(study.eps_list.size());
  parallel_for(static_cast<int>(study.eps_list.size()), common.jobs, [&](int r) {
    PerturbationRecord& rec = report.records[static_cast<std::size_t>(r)];
    rec.epsilon = study.eps_list[static_cast<std::size_t>(r)];
    rec.seed = run_seed(study.seed, static_cast<std::uint64_t>(r));
    TransientOptions opts;
    opts.grid = grid;
    opts.newton = common.newton;
    opts.perturbation = Perturbation{rec.epsilon, rec.seed, study.distribution};
    SpaceTimeAccumulator ex, app;
    opts.observer = [&](int i, double t, const Eigen::VectorXd& y) {
      if (i == 0) return;
      FieldErrors le, la;
      for (Field f : kAllFields) {
        le[f] = field_error(problem, y, t, f);
        la[f] = field_difference(problem, y, baseline[static_cast<std::size_t>(i)], f);
      }
      ex.add(grid.tau(), le);
      app.add(grid.tau(), la);
    };
    try {
      (void)solve_transient(problem, y0, opts);
      rec.e_ex = ex.result();
      rec.e_app = app.result();
    } catch (const SolverError& e) {
      rec.ok = false;
      rec.failure = e.what();
    }
  });

  std::vector<double> eps;
  std::array<std::vector<double>, 4> ex, app;
  for (const auto& rec : report.records) {
    if (!rec.ok) continue;
    eps.push_back(rec.epsilon);
    for (Field f : kAllFields) {
      ex[static_cast<std::size_t>(f)].push_back(rec.e_ex[f]);
      app[static_cast<std::size_t>(f)].push_back(rec.e_app[f]);
    }
  }
  if (eps.size() >= 3) {
    for (std::size_t k = 0; k < 4; ++k) {
      report.fit_ex[k] = fit_line(eps, ex[k]);
      report.fit_app[k] = fit_line(eps, app[k]);
    }
  }
  return report;
}

void write_rates_csv(std::ostream& out, const RateReport& report, const std::string& scale_name) {
  out << std::setprecision(17);
  out << "kind,pair," << scale_name << ",h_actual,tau,elements,unknowns,u,p,psi,c\n";
  for (const auto& r : report.records) {
    out << "error," << r.pair << ',' << (scale_name == "tau" ? r.tau : r.h) << ',' << r.h_actual << ','
        << r.tau << ',' << r.elements << ',' << r.unknowns;
    for (double v : r.errors.values) out << ',' << v;
    out << '\n';
  }
  const std::string pair = report.records.empty() ? "" : report.records.front().pair;
  for (std::size_t i = 0; i + 1 < report.records.size(); ++i) {
    out << "rate_pairwise," << pair << ',' << (scale_name == "tau" ? report.records[i + 1].tau : report.records[i + 1].h)
        << ",,,,";
    for (std::size_t k = 0; k < 4; ++k) out << ',' << report.pairwise[k][i];
    out << '\n';
  }
  out << "rate_fit," << pair << ",,,,,";
  for (const auto& f : report.fits) out << ',' << f.slope;
  out << "\nr_squared," << pair << ",,,,,";
  for (const auto& f : report.fits) out << ',' << f.r_squared;
  out << '\n';
}

void write_stability_csv(std::ostream& out, const StabilityReport& report) {
  out << std::setprecision(17);
  out << "kind,epsilon,seed,status,Eex_u,Eex_p,Eex_psi,Eex_c,Eapp_u,Eapp_p,Eapp_psi,Eapp_c\n";
  out << "baseline,0,0,ok";
  for (double v : report.baseline.values) out << ',' << v;
  out << ",0,0,0,0\n";
  for (const auto& r : report.records) {
    out << "run," << r.epsilon << ',' << r.seed << ',' << (r.ok ? "ok" : "failed");
    for (double v : r.e_ex.values) out << ',' << v;
    for (double v : r.e_app.values) out << ',' << v;
    out << '\n';
  }
  out << "slope,,,";
  for (const auto& f : report.fit_ex) out << ',' << f.slope;
  for (const auto& f : report.fit_app) out << ',' << f.slope;
  out << "\nr_squared,,,";
  for (const auto& f : report.fit_ex) out << ',' << f.r_squared;
  for (const auto& f : report.fit_app) out << ',' << f.r_squared;
  out << '\n';
}

void write_loglog(std::ostream& out, const std::vector<double>& scales, const std::vector<ErrorRecord>& records,
                  Field f) {
  out << std::setprecision(17);
  out << "# log10(scale) log10(error_" << to_string(f) << ")\n";
  for (std::size_t i = 0; i < scales.size() && i < records.size(); ++i) {
    out << std::log10(scales[i]) << ' ' << std::log10(records[i].errors[f]) << '\n';
  }
}

void write_slice(std::ostream& out, const MixedProblem& problem, const Eigen::VectorXd& y, double y0, int n) {
  if (n < 2) throw ValidationError("slice: need at least two samples");
  const Rectangle& d = problem.discretization().mesh->domain();
  if (y0 < d.y0 || y0 > d.y1) throw ValidationError("slice: line lies outside the domain");
  const FEFunction u = problem.velocity(y);
  const FEFunction p = problem.pressure(y);
  const FEFunction psi = problem.phase(y);
  const FEFunction c = problem.concentration(y);
  out << std::setprecision(17) << "# x u v p psi c\n";
  for (int i = 0; i < n; ++i) {
    const Point x(d.x0 + (d.x1 - d.x0) * i / (n - 1), y0);
    out << x.x() << ' ' << u.value_at(x, 0) << ' ' << u.value_at(x, 1) << ' ' << p.value_at(x) << ' '
        << psi.value_at(x) << ' ' << c.value_at(x) << '\n';
  }
}

}  // namespace dendrite
