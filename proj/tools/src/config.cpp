#include "dendrite_cli/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "dendrite/error.hpp"

namespace dendrite::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  int line = 0;
};

[[noreturn]] void bad(const std::string& key, const Entry& e, const std::string& why) {
  throw ValidationError("config line " + std::to_string(e.line) + ": " + key + " = '" + e.value + "': " + why);
}

double to_double(const std::string& key, const Entry& e, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v)) bad(key, e, "expected a number");
  return v;
}

long long to_integer(const std::string& key, const Entry& e) {
  const std::string t = trim(e.value);
  char* end = nullptr;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size()) bad(key, e, "expected an integer");
  return v;
}

std::vector<double> to_list(const std::string& key, const Entry& e) {
  std::vector<double> out;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, e, item));
  return out;
}

Vec2 to_vec2(const std::string& key, const Entry& e) {
  const auto v = to_list(key, e);
  if (v.size() != 2) bad(key, e, "expected two comma-separated numbers");
  return {v[0], v[1]};
}

bool to_bool(const std::string& key, const Entry& e) {
  const std::string t = trim(e.value);
  if (t == "true" || t == "yes" || t == "1") return true;
  if (t == "false" || t == "no" || t == "0") return false;
  bad(key, e, "expected true or false");
}

template <typename Enum>
Enum to_enum(const std::string& key, const Entry& e, const std::vector<std::pair<std::string, Enum>>& names) {
  for (const auto& [name, value] : names) {
    if (trim(e.value) == name) return value;
  }
  std::string allowed;
  for (const auto& n : names) allowed += (allowed.empty() ? "" : ", ") + n.first;
  bad(key, e, "expected one of " + allowed);
}

template <typename Enum>
std::string enum_name(Enum v, const std::vector<std::pair<std::string, Enum>>& names) {
  for (const auto& [name, value] : names) {
    if (value == v) return name;
  }
  return "?";
}

const std::vector<std::pair<std::string, CaseId>> kCases{{"ex1", CaseId::ex1}, {"ex2", CaseId::ex2}, {"zero", CaseId::zero}};
const std::vector<std::pair<std::string, int>> kPairs{{"P2-P1", 2}, {"P3-P2", 3}};
const std::vector<std::pair<std::string, RandomDistribution>> kDists{{"uniform", RandomDistribution::uniform},
                                                                     {"beta_f", RandomDistribution::beta_f}};
const std::vector<std::pair<std::string, WellKind>> kWells{{"double_well", WellKind::double_well}, {"none", WellKind::none}};
const std::vector<std::pair<std::string, SmoothingKind>> kSmooth{{"quintic", SmoothingKind::quintic},
                                                                 {"cubic", SmoothingKind::cubic}};
const std::vector<std::pair<std::string, BuoyancyKind>> kBuoy{{"linear", BuoyancyKind::linear},
                                                              {"constant", BuoyancyKind::constant}};
const std::vector<std::pair<std::string, ForcingKind>> kForce{{"zero", ForcingKind::zero}, {"gravity", ForcingKind::gravity}};
const std::vector<std::pair<std::string, AnisotropyLinearization>> kLin{{"full", AnisotropyLinearization::full},
                                                                        {"frozen", AnisotropyLinearization::frozen}};

using Setter = std::function<void(RunConfig&, const std::string&, const Entry&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto num = [&t](const std::string& key, auto member) {
      t[key] = [member](RunConfig& c, const std::string& k, const Entry& e) { member(c) = to_double(k, e, e.value); };
    };
    t["study.case"] = [](RunConfig& c, const std::string& k, const Entry& e) {
      c.case_id = to_enum(k, e, kCases);
      c.has_case = true;
    };
    t["study.pair"] = [](RunConfig& c, const std::string& k, const Entry& e) { c.order = to_enum(k, e, kPairs); };
    t["study.h"] = [](RunConfig& c, const std::string& k, const Entry& e) { c.h_list = to_list(k, e); };
    num("study.tau", [](RunConfig& c) -> double& { return c.tau; });
    t["study.tau_list"] = [](RunConfig& c, const std::string& k, const Entry& e) { c.tau_list = to_list(k, e); };
    num("study.final_time", [](RunConfig& c) -> double& { return c.final_time; });
    t["study.output"] = [](RunConfig& c, const std::string&, const Entry& e) { c.output = trim(e.value); };
    t["study.seed"] = [](RunConfig& c, const std::string& k, const Entry& e) {
      const long long v = to_integer(k, e);
      if (v < 0) bad(k, e, "seed must be non-negative");
      c.seed = static_cast<std::uint64_t>(v);
    };
    t["study.epsilon"] = [](RunConfig& c, const std::string& k, const Entry& e) { c.eps_list = to_list(k, e); };
    t["study.distribution"] = [](RunConfig& c, const std::string& k, const Entry& e) { c.distribution = to_enum(k, e, kDists); };
    t["study.deterministic"] = [](RunConfig& c, const std::string& k, const Entry& e) { c.deterministic = to_bool(k, e); };
    t["study.jobs"] = [](RunConfig& c, const std::string& k, const Entry& e) { c.jobs = static_cast<int>(to_integer(k, e)); };
    t["study.snapshot_times"] = [](RunConfig& c, const std::string& k, const Entry& e) { c.snapshot_times = to_list(k, e); };
    num("study.slice_y", [](RunConfig& c) -> double& { return c.slice_y; });
    t["study.slice_points"] = [](RunConfig& c, const std::string& k, const Entry& e) {
      c.slice_points = static_cast<int>(to_integer(k, e));
    };

    num("model.rho0", [](RunConfig& c) -> double& { return c.params.rho0; });
    num("model.mu", [](RunConfig& c) -> double& { return c.params.mu; });
    num("model.mobility", [](RunConfig& c) -> double& { return c.params.mobility; });
    num("model.delta", [](RunConfig& c) -> double& { return c.params.delta; });
    num("model.eps0", [](RunConfig& c) -> double& { return c.params.eps0; });
    num("model.gamma", [](RunConfig& c) -> double& { return c.params.gamma; });
    t["model.k"] = [](RunConfig& c, const std::string& k, const Entry& e) { c.params.k = static_cast<int>(to_integer(k, e)); };
    t["model.B"] = [](RunConfig& c, const std::string& k, const Entry& e) { c.params.B = to_vec2(k, e); };
    num("model.D_S", [](RunConfig& c) -> double& { return c.params.D_S; });
    num("model.D_L", [](RunConfig& c) -> double& { return c.params.D_L; });
    num("model.sigma_A", [](RunConfig& c) -> double& { return c.params.sigma_A; });
    num("model.sigma_B", [](RunConfig& c) -> double& { return c.params.sigma_B; });
    num("model.beta_c", [](RunConfig& c) -> double& { return c.params.beta_c; });
    num("model.zeta", [](RunConfig& c) -> double& { return c.params.zeta; });
    num("model.alpha0", [](RunConfig& c) -> double& { return c.params.alpha0; });
    t["model.G"] = [](RunConfig& c, const std::string& k, const Entry& e) { c.params.G = to_vec2(k, e); };
    t["model.lambda1"] = [](RunConfig& c, const std::string& k, const Entry& e) {
      const Vec2 v = to_vec2(k, e);
      c.params.lambda1 = {v[0], v[1]};
    };
    t["model.lambda2"] = [](RunConfig& c, const std::string& k, const Entry& e) {
      const Vec2 v = to_vec2(k, e);
      c.params.lambda2 = {v[0], v[1]};
    };
    t["model.well"] = [](RunConfig& c, const std::string& k, const Entry& e) { c.params.well = to_enum(k, e, kWells); };
    t["model.smoothing"] = [](RunConfig& c, const std::string& k, const Entry& e) { c.params.smoothing = to_enum(k, e, kSmooth); };
    t["model.buoyancy"] = [](RunConfig& c, const std::string& k, const Entry& e) { c.params.buoyancy = to_enum(k, e, kBuoy); };
    t["model.forcing"] = [](RunConfig& c, const std::string& k, const Entry& e) { c.params.forcing = to_enum(k, e, kForce); };

    num("newton.tol_abs", [](RunConfig& c) -> double& { return c.newton.tol_abs; });
    num("newton.tol_rel", [](RunConfig& c) -> double& { return c.newton.tol_rel; });
    num("newton.step_tol", [](RunConfig& c) -> double& { return c.newton.step_tol; });
    t["newton.max_iterations"] = [](RunConfig& c, const std::string& k, const Entry& e) {
      c.newton.max_iterations = static_cast<int>(to_integer(k, e));
    };
    num("newton.divergence_factor", [](RunConfig& c) -> double& { return c.newton.divergence_factor; });
    t["newton.reuse_jacobian"] = [](RunConfig& c, const std::string& k, const Entry& e) { c.newton.reuse_jacobian = to_bool(k, e); };
    num("newton.refresh_ratio", [](RunConfig& c) -> double& { return c.newton.refresh_ratio; });
    t["newton.linearization"] = [](RunConfig& c, const std::string& k, const Entry& e) {
      c.assembly.linearization = to_enum(k, e, kLin);
    };
    t["newton.boundary_consistency"] = [](RunConfig& c, const std::string& k, const Entry& e) {
      c.assembly.boundary_consistency = to_bool(k, e);
    };
    t["newton.quadrature_degree"] = [](RunConfig& c, const std::string& k, const Entry& e) {
      c.assembly.quadrature_degree = static_cast<int>(to_integer(k, e));
    };
    return t;
  }();
  return table;
}

void check_positive_list(const std::vector<double>& v, const char* name) {
  if (v.empty()) throw ValidationError(std::string("config: ") + name + " list is empty");
  for (double x : v) {
    if (!(x > 0.0)) throw ValidationError(std::string("config: ") + name + " entries must be positive");
  }
}

std::string list_text(const std::vector<double>& v) {
  std::ostringstream s;
  s << std::setprecision(17);
  for (std::size_t i = 0; i < v.size(); ++i) s << (i ? ", " : "") << v[i];
  return s.str();
}

}  // namespace

void RunConfig::validate() const {
  check_positive_list(h_list, "h");
  check_positive_list(tau_list, "tau_list");
  if (!(tau > 0.0)) throw ValidationError("config: tau must be positive");
  if (!(final_time > 0.0)) throw ValidationError("config: final_time must be positive");
  for (double e : eps_list) {
    if (!(e >= 0.0 && e < 1.0)) throw ValidationError("config: epsilon values must lie in [0, 1)");
  }
  if (jobs < 1) throw ValidationError("config: jobs must be >= 1");
  if (slice_points < 2) throw ValidationError("config: slice_points must be >= 2");
  for (double t : snapshot_times) {
    if (t < 0.0 || t > final_time) throw ValidationError("config: snapshot times must lie in [0, final_time]");
  }
  if (order != 2 && order != 3) throw ValidationError("config: pair must be P2-P1 or P3-P2");
  if (newton.max_iterations < 1) throw ValidationError("config: max_iterations must be >= 1");
  if (!(newton.tol_abs >= 0.0) || !(newton.tol_rel >= 0.0)) throw ValidationError("config: tolerances must be >= 0");
  if (assembly.quadrature_degree > 10) throw ValidationError("config: quadrature_degree must be <= 10");
  params.validate();
}

RunConfig parse_config(std::istream& in) {
  std::map<std::string, Entry> entries;
  std::string section;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ValidationError("config line " + std::to_string(line_no) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "study" && section != "model" && section != "newton") {
        throw ValidationError("config line " + std::to_string(line_no) + ": unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError("config line " + std::to_string(line_no) + ": expected key = value");
    if (section.empty()) throw ValidationError("config line " + std::to_string(line_no) + ": key outside a section");
    const std::string key = section + "." + trim(line.substr(0, eq));
    if (key != "model.preset" && !setters().contains(key)) throw ValidationError("config line " + std::to_string(line_no) + ": unknown key " + key);
    if (entries.contains(key)) throw ValidationError("config line " + std::to_string(line_no) + ": duplicate key " + key);
    entries[key] = Entry{trim(line.substr(eq + 1)), line_no};
  }

  RunConfig config;
  if (const auto it = entries.find("model.preset"); it != entries.end()) {
    if (it->second.value == "nondimensional") {
      config.params = ModelParameters::nondimensional();
    } else if (it->second.value == "ni_cu") {
      config.params = ModelParameters::ni_cu();
    } else {
      bad(it->first, it->second, "expected nondimensional or ni_cu");
    }
    config.preset = it->second.value;
    entries.erase(it);
  }
  for (const auto& [key, entry] : entries) setters().at(key)(config, key, entry);
  config.validate();
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open " + path);
  return parse_config(in);
}

void write_resolved_config(std::ostream& out, const RunConfig& c) {
  const ModelParameters& p = c.params;
  out << std::setprecision(17);
  out << "[study]\n";
  if (c.has_case) out << "case = " << enum_name(c.case_id, kCases) << '\n';
  out << "pair = " << enum_name(c.order, kPairs) << '\n'
      << "h = " << list_text(c.h_list) << '\n'
      << "tau = " << c.tau << '\n'
      << "tau_list = " << list_text(c.tau_list) << '\n'
      << "final_time = " << c.final_time << '\n'
      << "output = " << c.output << '\n'
      << "seed = " << c.seed << '\n'
      << "epsilon = " << list_text(c.eps_list) << '\n'
      << "distribution = " << enum_name(c.distribution, kDists) << '\n'
      << "deterministic = " << (c.deterministic ? "true" : "false") << '\n'
      << "jobs = " << c.jobs << '\n'
      << (c.snapshot_times.empty() ? "# snapshot_times = final_time" : "snapshot_times = " + list_text(c.snapshot_times)) << '\n'
      << "slice_y = " << c.slice_y << '\n'
      << "slice_points = " << c.slice_points << '\n';
  out << "\n[model]\n"
      << "preset = " << c.preset << '\n'
      << "rho0 = " << p.rho0 << '\n'
      << "mu = " << p.mu << '\n'
      << "mobility = " << p.mobility << '\n'
      << "delta = " << p.delta << '\n'
      << "eps0 = " << p.eps0 << '\n'
      << "gamma = " << p.gamma << '\n'
      << "k = " << p.k << '\n'
      << "B = " << p.B.x() << ", " << p.B.y() << '\n'
      << "D_S = " << p.D_S << '\n'
      << "D_L = " << p.D_L << '\n'
      << "sigma_A = " << p.sigma_A << '\n'
      << "sigma_B = " << p.sigma_B << '\n'
      << "beta_c = " << p.beta_c << '\n'
      << "zeta = " << p.zeta << '\n'
      << "alpha0 = " << p.alpha0 << '\n'
      << "G = " << p.G.x() << ", " << p.G.y() << '\n'
      << "lambda1 = " << p.lambda1.value0 << ", " << p.lambda1.slope << '\n'
      << "lambda2 = " << p.lambda2.value0 << ", " << p.lambda2.slope << '\n'
      << "well = " << enum_name(p.well, kWells) << '\n'
      << "smoothing = " << enum_name(p.smoothing, kSmooth) << '\n'
      << "buoyancy = " << enum_name(p.buoyancy, kBuoy) << '\n'
      << "forcing = " << enum_name(p.forcing, kForce) << '\n';
  out << "\n[newton]\n"
      << "tol_abs = " << c.newton.tol_abs << '\n'
      << "tol_rel = " << c.newton.tol_rel << '\n'
      << "step_tol = " << c.newton.step_tol << '\n'
      << "max_iterations = " << c.newton.max_iterations << '\n'
      << "divergence_factor = " << c.newton.divergence_factor << '\n'
      << "reuse_jacobian = " << (c.newton.reuse_jacobian ? "true" : "false") << '\n'
      << "refresh_ratio = " << c.newton.refresh_ratio << '\n'
      << "linearization = " << enum_name(c.assembly.linearization, kLin) << '\n'
      << "boundary_consistency = " << (c.assembly.boundary_consistency ? "true" : "false") << '\n'
      << "quadrature_degree = " << c.assembly.quadrature_degree << '\n';
}

}  // namespace dendrite::cli
