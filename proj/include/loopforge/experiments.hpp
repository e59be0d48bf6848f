#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "loopforge/excursions.hpp"
#include "loopforge/gff.hpp"
#include "loopforge/oneedge.hpp"
#include "loopforge/stats.hpp"

namespace loopforge {

struct ExperimentConfig {
  std::string experiment;    // two-point | parity | switching | pnew | winding |
                             // one-edge | iic | interlacement | calibrate
  std::string fixture;       // graph fixture id (experiment-dependent default)
  std::string x;             // marked vertex names; empty = fixture default
  std::string y;
  double a = 1.0;
  double b = 1.0;
  int mesh = 4;
  long long replicas = 10000;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string negative_control;  // "", "parity-even", "mass-scale", "c-scale"
  double mass_scale = 1.2;       // used by negative control "mass-scale"
  double c_scale = 1.5;          // used by negative control "c-scale"
  double grid_dt = 1.0 / 400.0;  // one-edge grid step
};

struct FunctionalResult {
  std::string experiment;
  std::string functional;
  long long n = 0;
  std::string kind;  // ks | chi2 | tv | freq | mean | exact | rate
  double statistic = 0.0;
  double p = std::numeric_limits<double>::quiet_NaN();
  double reference = std::numeric_limits<double>::quiet_NaN();
  double observed = std::numeric_limits<double>::quiet_NaN();
  bool pass = false;
  std::string note;  // the threshold that produced the verdict
};

struct TestReport {
  std::string experiment;
  std::uint64_t seed = 0;
  long long replicas = 0;
  bool negative_control = false;
  std::vector<FunctionalResult> results;
  double wall_seconds = 0.0;  // excluded from CSV so reruns stay byte-identical

  bool all_pass() const;
  int failures() const;
};

// Deterministic parallel replica runner: fn(replica_index, rng) with a
// per-index stream; results identical for any jobs value.
void run_replicas(long long n, std::uint64_t seed, int jobs,
                  const std::function<void(long long, std::mt19937_64&)>& fn);

// --- report emission -----------------------------------------------------

// Flat CSV, fixed column order: experiment, functional, n, statistic, p,
// reference, verdict.  Deterministic %.12g formatting, NaN printed as NA.
std::string report_csv(const std::vector<TestReport>& reports);
std::string report_json(const TestReport& report);
void write_file(const std::string& path, const std::string& content);

// --- switching machinery -------------------------------------------------

// Immutable shared state for one switching fixture (build once, then sample
// from many threads).
struct SwitchingSetup {
  Refined refined;
  int x = -1;  // refined-graph indices
  int y = -1;
  double m = 0.0;  // a * b * c_eff
  double a = 1.0;
  double b = 1.0;
  std::vector<int> probes;
  std::vector<std::string> probe_names;
  std::unique_ptr<DirichletSampler> pinned;
  std::unique_ptr<ExcursionSampler> from_x;  // excursions x->y and returns x->x
  std::unique_ptr<ExcursionSampler> from_y;  // returns y->y avoiding x

  SwitchingSetup() = default;
  SwitchingSetup(const SwitchingSetup&) = delete;
  SwitchingSetup& operator=(const SwitchingSetup&) = delete;
};

std::unique_ptr<SwitchingSetup> make_switching_setup(const CableGraph& base, int x,
                                                     int y, double a, double b,
                                                     int mesh);

struct LhsDraw {
  std::vector<double> probe_occupation;  // gamma^2 at probes
  bool connected = false;
  bool same_sign = false;
};

// One unconditioned draw of the conditioned-field side: sign pair (same-sign
// with probability p_same_sign(m)), Gaussian conditioning on the signed roots,
// Lupu opening, connectivity bit.
LhsDraw sample_lhs(const SwitchingSetup& s, std::mt19937_64& rng);

// Same-sign pinned variant (no sign draw), used by the Dynkin comparison.
LhsDraw sample_lhs_same_sign(const SwitchingSetup& s, std::mt19937_64& rng);

// Overlay side: Gamma0^2 + x-returns(a) + y-returns(b) + crossing ensemble
// with the given parity and mass scale.
std::vector<double> sample_rhs(const SwitchingSetup& s, Parity parity,
                               double mass_scale, std::mt19937_64& rng);

// --- experiments ---------------------------------------------------------

TestReport run_two_point_test(const ExperimentConfig& cfg);
TestReport run_parity_test(const ExperimentConfig& cfg);
TestReport run_switching_test(const ExperimentConfig& cfg);
TestReport run_pnew_test(const ExperimentConfig& cfg);
TestReport run_winding_test(const ExperimentConfig& cfg);
TestReport run_cpy_test(const ExperimentConfig& cfg);
TestReport run_iic_experiment(const ExperimentConfig& cfg);
TestReport run_interlacement_test(const ExperimentConfig& cfg);
TestReport run_calibration(const ExperimentConfig& cfg);

// Builds the named graph fixture ("path4", "path6", "triangle", "grid2",
// "grid3", "grid4", "parallel2", "annulus6", "boxL2", "boxL4", "boxL8",
// "intboxL2"); throws ConfigError for unknown names.
GraphSpec fixture_spec(const std::string& name);

// Default marked vertex names for a fixture (x, y).
std::pair<std::string, std::string> fixture_marks(const std::string& name);

}  // namespace loopforge
