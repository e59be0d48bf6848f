#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "loopforge/experiments.hpp"

namespace {

constexpr const char* kVersion = "loopforge 1.0.0";

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

long long default_replicas(const std::string& name) {
  static const std::map<std::string, long long> defaults = {
      {"two-point", 100000}, {"parity", 1000000}, {"switching", 10000},
      {"pnew", 100000},      {"winding", 30000},  {"one-edge", 10000},
      {"iic", 800},          {"interlacement", 4000}, {"calibrate", 50000}};
  return defaults.at(name);
}

loopforge::TestReport dispatch(const std::string& name,
                               const loopforge::ExperimentConfig& cfg) {
  using loopforge::TestReport;
  if (name == "two-point") return loopforge::run_two_point_test(cfg);
  if (name == "parity") return loopforge::run_parity_test(cfg);
  if (name == "switching") return loopforge::run_switching_test(cfg);
  if (name == "pnew") return loopforge::run_pnew_test(cfg);
  if (name == "winding") return loopforge::run_winding_test(cfg);
  if (name == "one-edge") return loopforge::run_cpy_test(cfg);
  if (name == "iic") return loopforge::run_iic_experiment(cfg);
  if (name == "interlacement") return loopforge::run_interlacement_test(cfg);
  if (name == "calibrate") return loopforge::run_calibration(cfg);
  throw loopforge::ConfigError("unknown experiment: " + name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo laboratory for free fields, loop ensembles and "
               "conditioned excursions on electrical networks"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  loopforge::ExperimentConfig cfg;
  cfg.seed = 1;
  if (const char* env = std::getenv("LOOPFORGE_SEED")) {
    char* end = nullptr;
    cfg.seed = std::strtoull(env, &end, 10);
  }
  cfg.replicas = -1;  // resolved per experiment unless set
  cfg.mesh = -1;
  std::string out_dir;

  const std::vector<std::pair<std::string, std::string>> experiments = {
      {"two-point", "connection and sign frequencies for two marked vertices"},
      {"parity", "crossing-count parity laws and the conditioned-Poisson sampler"},
      {"switching", "conditioned field vs odd-crossing excursion overlay"},
      {"pnew", "parity configurations are uniform even subgraphs given the open set"},
      {"winding", "fair-coin winding parity of qualifying annulus clusters"},
      {"one-edge", "positive bridge vs squared-Bessel three-part decomposition"},
      {"iic", "incipient-cluster overlay stability across box sizes"},
      {"interlacement", "switching with an interiorised point at infinity"},
      {"calibrate", "statistical machinery and occupation-normalisation checks"},
  };

  std::vector<CLI::App*> subs;
  for (const auto& [name, blurb] : experiments) {
    CLI::App* sub = app.add_subcommand(name, blurb);
    sub->add_option("--graph", cfg.fixture, "graph fixture id");
    sub->add_option("--x", cfg.x, "first marked vertex name");
    sub->add_option("--y", cfg.y, "second marked vertex name");
    sub->add_option("--a", cfg.a, "root value at x");
    sub->add_option("--b", cfg.b, "root value at y");
    sub->add_option("--mesh", cfg.mesh, "edge subdivision count K");
    sub->add_option("--replicas", cfg.replicas, "Monte Carlo replica count");
    sub->add_option("--seed", cfg.seed, "root RNG seed");
    sub->add_option("--jobs", cfg.jobs, "worker thread count");
    sub->add_option("--out", out_dir, "output directory for report files");
    sub->add_option("--negative-control", cfg.negative_control,
                    "corruption to inject: parity-even | mass-scale | c-scale");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  if (cfg.replicas < 0) cfg.replicas = default_replicas(name);
  if (cfg.mesh < 0) cfg.mesh = name == "interlacement" ? 2 : 4;

  const std::string started = iso_timestamp();
  loopforge::TestReport report;
  try {
    report = dispatch(name, cfg);
  } catch (const loopforge::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  const std::string finished = iso_timestamp();

  for (const auto& r : report.results) {
    std::cout << (r.pass ? "  pass " : "  FAIL ") << r.experiment << "/"
              << r.functional << "  n=" << r.n << " statistic=" << r.statistic;
    if (!std::isnan(r.p)) std::cout << " p=" << r.p;
    if (!std::isnan(r.reference)) std::cout << " reference=" << r.reference;
    std::cout << "\n";
  }
  const int failed = report.failures();
  std::cout << report.experiment << ": "
            << (failed == 0 ? "all checks passed" : std::to_string(failed) + " check(s) failed")
            << " (" << report.results.size() << " checks, "
            << report.wall_seconds << "s)\n";

  if (!out_dir.empty()) {
    try {
      std::filesystem::create_directories(out_dir);
      const std::string json_path = out_dir + "/report.json";
      const std::string csv_path = out_dir + "/report.csv";
      const std::string manifest_path = out_dir + "/manifest.json";
      loopforge::write_file(json_path, loopforge::report_json(report));
      loopforge::write_file(csv_path, loopforge::report_csv({report}));
      nlohmann::ordered_json manifest;
      manifest["command"] = name;
      manifest["resolved_seed"] = cfg.seed;
      manifest["replicas"] = cfg.replicas;
      manifest["tool_version"] = kVersion;
      manifest["started"] = started;
      manifest["finished"] = finished;
      manifest["outputs"] = {json_path, csv_path};
      loopforge::write_file(manifest_path, manifest.dump(2) + "\n");
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    }
  }

  return failed == 0 ? 0 : 1;
}
