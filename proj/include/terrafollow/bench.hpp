#pragma once

#include <map>
#include <string>
#include <vector>

#include "terrafollow/baselines.hpp"
#include "terrafollow/pipeline.hpp"
#include "terrafollow/sim.hpp"

namespace terrafollow {

struct RunSpec {
  std::string scenario;  // flat | slope | water | hill
  std::string name;      // e.g. "flat_agl3"
  ScenarioSpec spec;
};

/// The four canonical scenarios at their three altitudes (fixed seeds):
/// flat field with gentle micro-relief, constant slope, shoreline water with
/// sub-surface multipath, and a sinusoidal vegetated hill.
std::vector<RunSpec> standard_suite(std::uint64_t base_seed = 42);

struct MethodResult {
  bool has_metrics = false;
  SegMetrics metrics;
  bool has_rmse = false;
  double rmse = 0.0;
  bool has_latency = false;
  double lat_mean_ms = 0.0;
  double lat_p95_ms = 0.0;
};

struct RunResult {
  std::string scenario;
  std::string name;
  long frames_evaluated = 0;
  std::map<std::string, MethodResult> methods;
  std::vector<std::string> warnings;  // per-frame failures, recorded not fatal
};

struct BenchReport {
  std::vector<RunResult> runs;
  std::map<std::string, std::map<std::string, MethodResult>> by_scenario;
  std::string config_echo;

  const MethodResult& scenario_method(const std::string& scenario,
                                      const std::string& method) const;
};

inline const std::vector<std::string>& all_methods() {
  static const std::vector<std::string> m = {"proposed",  "ransac_single", "ransac_patch",
                                             "bsp",       "knn",           "poly"};
  return m;
}

/// Runs every requested method over one dataset. Segmentation methods share
/// the identical accumulated input per frame; metrics and latency exclude
/// the warm-up frames. Terrain methods (bsp/knn/poly) are built from the
/// proposed pipeline's final control lattice, scored against analytic truth
/// samples, and timed per query.
RunResult run_benchmark(const Dataset& dataset, const std::vector<std::string>& methods,
                        const PipelineConfig& cfg);

/// Full suite benchmark; runs may execute in parallel (TERRAFOLLOW_THREADS
/// caps the lane count) and are aggregated per scenario in fixed order.
BenchReport run_suite(const std::vector<RunSpec>& runs, const std::vector<std::string>& methods,
                      const PipelineConfig& cfg);

std::string report_csv(const BenchReport& report);
std::string report_table(const BenchReport& report);

struct AblationRow {
  std::string name;  // baseline | plus_ti | plus_ti_psi | full
  bool ti = false, psi = false, ref = false;
  SegMetrics overall;
  std::map<std::string, SegMetrics> by_scenario;
};

/// The four progressive configurations: baseline (K=1, no prior, no
/// refinement), +TI, +TI+PSI, full.
std::vector<AblationRow> run_ablation(const std::vector<RunSpec>& runs,
                                      const PipelineConfig& cfg);

std::string ablation_csv(const std::vector<AblationRow>& rows, const PipelineConfig& cfg);

struct ConsistencyResult {
  double mean_error = 0.0;  // mean terrain-relative height error, m
  double rmse = 0.0;
  double std_dev = 0.0;
  long samples = 0;
};

/// Closed-loop replay: per frame the altitude command is issued at the UAV
/// position and tracked by a first-order kinematic stub with command-rate
/// feedforward; the error is the stub's terrain-relative height minus h_ref,
/// with terrain truth from the scenario field.
ConsistencyResult terrain_following_replay(const Dataset& dataset, const PipelineConfig& cfg,
                                           double h_ref);

/// Uniform-grid plus random truth samples over the lattice interior
/// (boundary spans excluded so every surface model is queried inside its
/// well-supported region).
std::vector<TruthSample> truth_samples(const TerrainField& field, const ControlLattice& lattice,
                                       int degree, long random_count, std::uint64_t seed);

long thread_cap();

}  // namespace terrafollow
