// End-to-end acceptance run: one PASS/FAIL line per criterion, exit status
// nonzero if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dendrite/analysis.hpp"
#include "dendrite_cli/commands.hpp"
#include "dendrite_cli/config.hpp"

using namespace dendrite;
namespace fs = std::filesystem;

namespace {

struct Range {
  double lo;
  double hi;
  [[nodiscard]] bool contains(double v) const { return v >= lo && v <= hi; }
};

int failures = 0;

void verdict(int id, bool ok, const std::string& what, const std::string& detail) {
  if (!ok) ++failures;
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << id << ": " << what << " | " << detail << std::endl;
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

class Clock {
 public:
  [[nodiscard]] double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void check_rates(int id, const std::string& what, const RateReport& r,
                 const std::vector<std::pair<Field, Range>>& wanted, double seconds) {
  bool ok = true;
  std::string detail;
  for (const auto& [f, range] : wanted) {
    const double slope = r.fit(f).slope;
    ok = ok && range.contains(slope);
    detail += to_string(f) + "=" + fmt(slope) + " in [" + fmt(range.lo, 2) + "," + fmt(range.hi, 2) + "]; ";
  }
  verdict(id, ok, what, detail + fmt(seconds, 0) + " s");
}

void criterion_spatial_p2() {
  Clock clock;
  SpatialStudy s;
  s.common.case_id = CaseId::ex2;
  s.common.order = 2;
  s.h_list = {0.2, 0.15, 0.1, 0.05};
  s.tau = 1e-3;
  const RateReport r = convergence_study_spatial(s);
  check_rates(1, "P2-P1 spatial orders, Example 2", r,
              {{Field::u, {2.5, 3.2}}, {Field::psi, {2.5, 3.2}}, {Field::c, {2.5, 3.2}}, {Field::p, {1.7, 2.6}}},
              clock.seconds());
}

void criterion_spatial_p3() {
  Clock clock;
  SpatialStudy s;
  s.common.case_id = CaseId::ex2;
  s.common.order = 3;
  s.common.final_time = 0.1;
  s.h_list = {0.2, 0.15, 0.1};
  s.tau = 1e-4;
  const RateReport r = convergence_study_spatial(s);
  check_rates(2, "P3-P2 spatial orders, Example 2, T = 0.1", r,
              {{Field::u, {3.5, 4.3}}, {Field::p, {2.8, 3.7}}, {Field::c, {3.5, 4.3}}}, clock.seconds());
}

void criterion_temporal() {
  Clock clock;
  TemporalStudy s;
  s.common.case_id = CaseId::ex1;
  s.common.order = 2;
  s.h = 0.05;
  s.tau_list = {0.1, 0.05, 0.025, 0.0125};
  const RateReport r = convergence_study_temporal(s);
  std::vector<std::pair<Field, Range>> wanted;
  for (Field f : kAllFields) wanted.emplace_back(f, Range{0.85, 1.25});
  check_rates(3, "temporal order, Example 1, h = 0.05", r, wanted, clock.seconds());
}

void criterion_stability() {
  Clock clock;
  StabilityStudy s;  // Example 1, h = 0.2, tau = 0.1, default epsilon sweep
  const StabilityReport r = perturbation_study(s);
  bool ok = true;
  std::string detail;
  for (Field f : kAllFields) {
    const auto k = static_cast<std::size_t>(f);
    const RateFit& ex = r.fit_ex[k];
    const RateFit& app = r.fit_app[k];
    const double gap = std::abs(ex.slope - app.slope) / ex.slope;
    const bool field_ok = ex.slope > 0.0 && app.slope > 0.0 && ex.r_squared >= 0.95 && app.r_squared >= 0.95 &&
                          gap <= 0.15;
    ok = ok && field_ok;
    detail += to_string(f) + ": m_ex=" + fmt(ex.slope) + " m_app=" + fmt(app.slope) + " gap=" + fmt(gap, 3) +
              " R2=" + fmt(ex.r_squared, 3) + "/" + fmt(app.r_squared, 3) + "; ";
  }
  for (const auto& rec : r.records) ok = ok && rec.ok;
  verdict(4, ok, "perturbation linearity, Example 1", detail + fmt(clock.seconds(), 0) + " s");
}

void criterion_properties() {
  struct Suite {
    const char* binary;
    const char* filter;
  };
  const Suite suites[] = {
      {DENDRITE_TEST_ASSEMBLY, "Convection.*:Mass.*"},
      {DENDRITE_TEST_ELEMENTS, "Quadrature.*"},
      {DENDRITE_TEST_CONSTITUTIVE, "Anisotropy.QuadraticFormIdentity:Anisotropy.RegularityThreshold"},
      {DENDRITE_TEST_ASSEMBLY,
       "MixedProblem.JacobianMatchesFiniteDifferences:MixedProblem.ManufacturedResidualConvergesAtOrder"},
  };
  bool ok = true;
  std::string detail;
  for (const Suite& s : suites) {
    const std::string cmd =
        std::string("\"") + s.binary + "\" --gtest_brief=1 --gtest_filter='" + s.filter + "' > /dev/null 2>&1";
    const bool pass = std::system(cmd.c_str()) == 0;
    ok = ok && pass;
    detail += std::string(s.filter) + (pass ? " ok; " : " FAILED; ");
  }
  verdict(5, ok, "property suites", detail);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void criterion_determinism() {
  const fs::path root = fs::temp_directory_path() / "dendrite_acceptance";
  fs::remove_all(root);
  struct Job {
    const char* command;
    const char* config;
    const char* csv;
  };
  const Job jobs[] = {
      {"stability", "[study]\ncase = ex1\nh = 0.2\ntau = 0.1\nseed = 7\ndeterministic = true\njobs = 4\n", "stability.csv"},
      {"convergence", "[study]\ncase = ex2\nh = 0.8, 0.6, 0.4\ntau = 0.05\nfinal_time = 0.2\ndeterministic = true\n",
       "spatial_rates.csv"},
  };
  bool ok = true;
  std::string detail;
  for (const Job& job : jobs) {
    std::istringstream in(job.config);
    cli::RunConfig config = cli::parse_config(in);
    std::string first;
    bool same = true;
    for (int k = 0; k < 2; ++k) {
      config.output = (root / (std::string(job.command) + std::to_string(k))).string();
      std::ostringstream out;
      std::ostringstream err;
      if (cli::run_command(job.command, config, out, err) != cli::kExitOk) {
        same = false;
        detail += std::string(job.command) + " failed: " + err.str();
        break;
      }
      const std::string csv = slurp(fs::path(config.output) / job.csv);
      if (k == 0) first = csv;
      else same = same && !csv.empty() && csv == first;
    }
    ok = ok && same;
    detail += std::string(job.csv) + (same ? " identical; " : " differs; ");
  }
  fs::remove_all(root);
  verdict(6, ok, "deterministic reruns are bitwise identical", detail);
}

}  // namespace

// Optional arguments select a subset of criteria by number.
int main(int argc, char** argv) {
  void (*const criteria[])() = {criterion_spatial_p2, criterion_spatial_p3, criterion_temporal,
                                criterion_stability,  criterion_properties, criterion_determinism};
  std::vector<bool> selected(std::size(criteria), argc == 1);
  for (int i = 1; i < argc; ++i) {
    const int id = std::atoi(argv[i]);
    if (id < 1 || id > static_cast<int>(std::size(criteria))) {
      std::cerr << "unknown criterion '" << argv[i] << "'\n";
      return EXIT_FAILURE;
    }
    selected[static_cast<std::size_t>(id - 1)] = true;
  }
  for (std::size_t i = 0; i < std::size(criteria); ++i) {
    if (selected[i]) criteria[i]();
  }
  std::cout << (failures == 0 ? "all selected criteria passed" : std::to_string(failures) + " criterion/criteria failed")
            << std::endl;
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
