#include "dendrite_cli/commands.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "dendrite/error.hpp"

namespace dendrite::cli {

namespace fs = std::filesystem;

namespace {

void require_case(const RunConfig& c, const char* command) {
  if (!c.has_case) throw ValidationError(std::string(command) + ": config must set study.case");
}

StudyCommon common_of(const RunConfig& c) {
  StudyCommon s;
  s.case_id = c.case_id;
  s.order = c.order;
  s.final_time = c.final_time;
  s.params = c.params;
  s.newton = c.newton;
  s.assembly = c.assembly;
  s.jobs = c.deterministic ? 1 : c.jobs;
  return s;
}

int steps_for(double final_time, double tau) {
  const long steps = std::lround(final_time / tau);
  if (steps < 1 || std::abs(static_cast<double>(steps) * tau - final_time) > 1e-9 * final_time) {
    throw ValidationError("tau must divide final_time");
  }
  return static_cast<int>(steps);
}

fs::path prepare_output(const RunConfig& c) {
  const fs::path dir = output_directory(c);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  std::ofstream cfg(dir / "resolved_config.ini");
  write_resolved_config(cfg, c);
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string time_tag(double t) {
  std::ostringstream s;
  s << std::setprecision(6) << t;
  return s.str();
}

void print_report(std::ostream& out, const RateReport& report, const char* scale) {
  out << std::setw(10) << scale << std::setw(10) << "elements";
  for (Field f : kAllFields) out << std::setw(14) << ("E_" + to_string(f));
  out << '\n' << std::scientific << std::setprecision(4);
  for (const auto& r : report.records) {
    out << std::setw(10) << (std::string(scale) == "h" ? r.h : r.tau) << std::setw(10) << r.elements;
    for (Field f : kAllFields) out << std::setw(14) << r.errors[f];
    out << '\n';
  }
  out << std::fixed << std::setprecision(3);
  for (Field f : kAllFields) {
    out << "rate " << to_string(f) << " = " << report.fit(f).slope << "  (R^2 = " << report.fit(f).r_squared
        << ")\n";
  }
  out << std::defaultfloat;
}

void write_loglogs(const fs::path& dir, const std::string& prefix, const std::vector<double>& scales,
                   const RateReport& report) {
  for (Field f : kAllFields) {
    auto out = open_out(dir / (prefix + to_string(f) + ".dat"));
    write_loglog(out, scales, report.records, f);
  }
}

}  // namespace

std::string output_directory(const RunConfig& config) {
  if (const char* env = std::getenv("MHD_DENDRITE_OUT"); env != nullptr && *env != '\0') return env;
  return config.output;
}

void cmd_mesh_stats(const RunConfig& config, std::ostream& out) {
  const ManufacturedCase mc(config.has_case ? config.case_id : CaseId::ex2);
  out << std::setw(8) << "h" << std::setw(12) << "h_actual" << std::setw(10) << "elements" << std::setw(16)
      << "boundary_edges" << '\n';
  for (double h : config.h_list) {
    const MeshStatistics s = mesh_statistics(study_mesh(mc, h));
    out << std::setw(8) << h << std::setw(12) << std::setprecision(5) << s.h << std::setw(10) << s.n_elements
        << std::setw(16) << s.n_boundary_edges << '\n';
  }
}

void cmd_convergence(const RunConfig& config, std::ostream& out) {
  require_case(config, "convergence");
  if (config.h_list.size() < 3) throw ValidationError("convergence: need >= 3 meshes for rates");
  SpatialStudy study;
  study.common = common_of(config);
  study.h_list = config.h_list;
  study.tau = config.tau;
  (void)steps_for(config.final_time, config.tau);
  const fs::path dir = prepare_output(config);
  const RateReport report = convergence_study_spatial(study);
  auto csv = open_out(dir / "spatial_rates.csv");
  write_rates_csv(csv, report, "h");
  write_loglogs(dir, "loglog_", report.scales, report);
  print_report(out, report, "h");
}

void cmd_temporal(const RunConfig& config, std::ostream& out) {
  require_case(config, "temporal");
  TemporalStudy study;
  study.common = common_of(config);
  study.h = config.h_list.back();
  study.tau_list = config.tau_list;
  if (study.tau_list.size() < 3) throw ValidationError("temporal: need >= 3 time steps for rates");
  for (double tau : study.tau_list) (void)steps_for(config.final_time, tau);
  const fs::path dir = prepare_output(config);
  const RateReport report = convergence_study_temporal(study);
  auto csv = open_out(dir / "temporal_rates.csv");
  write_rates_csv(csv, report, "tau");
  write_loglogs(dir, "loglog_tau_", report.scales, report);
  print_report(out, report, "tau");
}

void cmd_stability(const RunConfig& config, std::ostream& out) {
  require_case(config, "stability");
  StabilityStudy study;
  study.common = common_of(config);
  study.h = config.h_list.front();
  study.tau = config.tau;
  study.eps_list = config.eps_list;
  study.seed = config.seed;
  study.distribution = config.distribution;
  (void)steps_for(config.final_time, config.tau);
  const fs::path dir = prepare_output(config);
  const StabilityReport report = perturbation_study(study);
  auto csv = open_out(dir / "stability.csv");
  write_stability_csv(csv, report);

  int failed = 0;
  out << std::setprecision(4);
  for (const auto& r : report.records) {
    if (!r.ok) {
      ++failed;
      out << "epsilon " << r.epsilon << " failed: " << r.failure << '\n';
    }
  }
  for (Field f : kAllFields) {
    const auto k = static_cast<std::size_t>(f);
    out << to_string(f) << ": m_ex = " << report.fit_ex[k].slope << " (R^2 " << report.fit_ex[k].r_squared
        << "), m_app = " << report.fit_app[k].slope << " (R^2 " << report.fit_app[k].r_squared << ")\n";
  }
  if (failed > 0) throw SolverError("stability: " + std::to_string(failed) + " perturbed run(s) failed");
}

void cmd_run(const RunConfig& config, std::ostream& out) {
  require_case(config, "run");
  const ManufacturedCase mc(config.case_id);
  const Rectangle& dom = mc.domain();
  if (config.slice_y < dom.y0 || config.slice_y > dom.y1) throw ValidationError("run: slice_y outside the domain");
  const int steps = steps_for(config.final_time, config.tau);
  std::map<int, double> snapshots;
  const std::vector<double> snapshot_times =
      config.snapshot_times.empty() ? std::vector<double>{config.final_time} : config.snapshot_times;
  for (double t : snapshot_times) {
    const long i = std::lround(t / config.tau);
    if (std::abs(static_cast<double>(i) * config.tau - t) > 1e-9 * std::max(1.0, t)) {
      throw ValidationError("run: snapshot time " + time_tag(t) + " is not on the time grid");
    }
    snapshots[static_cast<int>(i)] = t;
  }

  auto mesh = std::make_shared<const Mesh>(study_mesh(mc, config.h_list.front()));
  MixedProblem problem(make_discretization(mesh, config.order), config.params, mc, config.assembly);
  const fs::path dir = prepare_output(config);

  TransientOptions opts;
  opts.grid = TimeGrid{config.final_time, steps};
  opts.newton = config.newton;
  opts.observer = [&](int i, double t, const Eigen::VectorXd& y) {
    if (!snapshots.contains(i)) return;
    const std::string tag = time_tag(snapshots[i]);
    const std::pair<Field, FEFunction> views[] = {{Field::u, problem.velocity(y)},
                                                  {Field::p, problem.pressure(y)},
                                                  {Field::psi, problem.phase(y)},
                                                  {Field::c, problem.concentration(y)}};
    out << "t = " << tag;
    for (const auto& [f, fn] : views) {
      auto file = open_out(dir / ("snapshot_" + to_string(f) + "_t" + tag + ".txt"));
      save_function(file, fn);
      out << "  E_" << to_string(f) << " = " << std::scientific << std::setprecision(4)
          << field_error(problem, y, t, f) << std::defaultfloat;
    }
    out << '\n';
    auto slice = open_out(dir / ("slice_t" + tag + ".dat"));
    write_slice(slice, problem, y, config.slice_y, config.slice_points);
  };
  const TransientResult res = solve_transient(problem, problem.interpolate_exact(0.0), opts);
  auto log = open_out(dir / "newton_log.csv");
  write_step_log(log, res.stats, !config.deterministic);
}

int run_command(const std::string& name, const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (name == "mesh-stats") {
      cmd_mesh_stats(config, out);
    } else if (name == "convergence") {
      cmd_convergence(config, out);
    } else if (name == "temporal") {
      cmd_temporal(config, out);
    } else if (name == "stability") {
      cmd_stability(config, out);
    } else if (name == "run") {
      cmd_run(config, out);
    } else {
      throw ValidationError("unknown command '" + name + "'");
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}

}  // namespace dendrite::cli
