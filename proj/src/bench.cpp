#include "terrafollow/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <future>
#include <memory>
#include <sstream>

#include "terrafollow/io_util.hpp"
#include "terrafollow/rng.hpp"

namespace terrafollow {

namespace {

ScenarioSpec base_scenario(std::uint64_t seed) {
  ScenarioSpec s;
  s.trajectory.start = {-20.0, 0.0, 0.0};
  s.trajectory.end = {20.0, 0.0, 0.0};
  s.trajectory.speed = 2.0;
  s.trajectory.altitude_mode = TrajectorySpec::AltitudeMode::ConstantAgl;
  s.radar.beams_per_step = 16;
  s.radar.boresight_tilt = deg2rad(20.0);
  s.clutter.range_noise_sigma = 0.05;
  s.seed = seed;
  return s;
}

}  // namespace

std::vector<RunSpec> standard_suite(std::uint64_t base_seed) {
  std::vector<RunSpec> runs;

  // Flat field: visually level ground with decimeter micro-relief.
  for (double agl : {3.0, 5.0, 8.0}) {
    ScenarioSpec s = base_scenario(base_seed + runs.size());
    s.terrain = TerrainField::composite(0.01, 0.005, 0.0, 0.15, 18.0);
    s.clutter.vegetation_rate = 60.0;
    s.clutter.vegetation_height_min = 0.25;
    s.clutter.vegetation_height_max = 1.2;
    s.trajectory.agl = agl;
    runs.push_back({"flat", "flat_agl" + std::to_string(static_cast<int>(agl)), s});
  }

  // Natural slope: constant grade with mild micro-relief.
  for (double agl : {5.0, 8.0, 10.0}) {
    ScenarioSpec s = base_scenario(base_seed + runs.size());
    s.terrain = TerrainField::composite(0.2, 0.0, 0.0, 0.3, 20.0);
    s.clutter.vegetation_rate = 40.0;
    s.clutter.vegetation_height_min = 0.25;
    s.clutter.vegetation_height_max = 1.0;
    s.trajectory.agl = agl;
    runs.push_back({"slope", "slope_agl" + std::to_string(static_cast<int>(agl)), s});
  }

  // Water entered from a western bank. Mirror-like multipath sits well
  // below the surface: a diffuse population plus dense specular clusters.
  for (double agl : {3.0, 6.0, 10.0}) {
    ScenarioSpec s = base_scenario(base_seed + runs.size());
    s.terrain = TerrainField::shore(0.35, -8.0, 0.0);
    s.clutter.vegetation_rate = 10.0;
    s.clutter.vegetation_height_min = 0.2;
    s.clutter.vegetation_height_max = 0.8;
    s.clutter.multipath_rate = 30.0;
    s.clutter.multipath_depth_min = 0.8;
    s.clutter.multipath_depth_max = 2.5;
    s.clutter.multipath_min_x = -8.0;
    s.clutter.multipath_max_tilt = deg2rad(25.0);
    s.clutter.water_suppression_tilt = deg2rad(18.0);
    s.trajectory.agl = agl;
    runs.push_back({"water", "water_agl" + std::to_string(static_cast<int>(agl)), s});
  }

  // Vegetated hill, flown high like the tea plantation runs.
  for (double agl : {18.0, 20.0, 22.0}) {
    ScenarioSpec s = base_scenario(base_seed + runs.size());
    s.terrain = TerrainField::hill(1.0, 30.0, 0.0);
    s.clutter.vegetation_rate = 80.0;
    s.clutter.vegetation_height_min = 0.3;
    s.clutter.vegetation_height_max = 0.9;
    s.trajectory.agl = agl;
    runs.push_back({"hill", "hill_agl" + std::to_string(static_cast<int>(agl)), s});
  }
  return runs;
}

long thread_cap() {
  const char* env = std::getenv("TERRAFOLLOW_THREADS");
  if (!env) return 1;
  long n = std::strtol(env, nullptr, 10);
  return n < 1 ? 1 : n;
}

namespace {

double mean_ms(const std::vector<double>& seconds) {
  if (seconds.empty()) return 0.0;
  double sum = 0.0;
  for (double s : seconds) sum += s;
  return 1e3 * sum / static_cast<double>(seconds.size());
}

double p95_ms(std::vector<double> seconds) {
  if (seconds.empty()) return 0.0;
  std::sort(seconds.begin(), seconds.end());
  size_t idx = static_cast<size_t>(std::ceil(0.95 * static_cast<double>(seconds.size())));
  idx = idx == 0 ? 0 : idx - 1;
  return 1e3 * seconds[std::min(idx, seconds.size() - 1)];
}

bool wants(const std::vector<std::string>& methods, const std::string& m) {
  return std::find(methods.begin(), methods.end(), m) != methods.end();
}

}  // namespace

std::vector<TruthSample> truth_samples(const TerrainField& field, const ControlLattice& lattice,
                                       int degree, long random_count, std::uint64_t seed) {
  auto rect = lattice.bounding_rect();
  double s = lattice.resolution;
  long margin = degree + 1;  // skip the clamped boundary spans
  double x_lo = (rect.u_min + margin + 0.5) * s;
  double x_hi = (rect.u_max - margin + 0.5) * s;
  double y_lo = (rect.v_min + margin + 0.5) * s;
  double y_hi = (rect.v_max - margin + 0.5) * s;
  if (x_lo >= x_hi || y_lo >= y_hi) {  // lattice too small to shrink
    x_lo = (rect.u_min + 0.5) * s;
    x_hi = (rect.u_max + 0.5) * s;
    y_lo = (rect.v_min + 0.5) * s;
    y_hi = (rect.v_max + 0.5) * s;
  }

  std::vector<TruthSample> samples;
  double step = s / 2.0;
  for (double x = x_lo; x <= x_hi + 1e-12; x += step) {
    for (double y = y_lo; y <= y_hi + 1e-12; y += step) {
      samples.push_back({x, y, terrain_height(field, x, y)});
    }
  }
  Rng rng(seed);
  for (long i = 0; i < random_count; ++i) {
    double x = rng.uniform(x_lo, x_hi);
    double y = rng.uniform(y_lo, y_hi);
    samples.push_back({x, y, terrain_height(field, x, y)});
  }
  return samples;
}

RunResult run_benchmark(const Dataset& dataset, const std::vector<std::string>& methods,
                        const PipelineConfig& cfg) {
  RunResult result;
  PipelineRunner runner(cfg, dataset.spec.mount);

  RansacParams rp;
  rp.iterations = cfg.ransac_iterations;
  rp.distance_threshold = cfg.seg.plane_distance;
  rp.seed = cfg.seed;

  SegMetrics agg_proposed, agg_single, agg_patch;
  std::vector<double> lat_proposed, lat_single, lat_patch;

  bool need_pipeline = wants(methods, "proposed") || wants(methods, "bsp") ||
                       wants(methods, "knn") || wants(methods, "poly");

  for (const auto& frame : dataset.frames) {
    FrameOutput out;
    try {
      out = runner.process_frame(frame, dataset.track);
    } catch (const std::exception& e) {
      result.warnings.push_back("frame " + std::to_string(frame.frame_index) + ": " + e.what());
      continue;
    }
    bool evaluated = frame.frame_index >= cfg.warmup_frames;
    if (evaluated) ++result.frames_evaluated;

    if (need_pipeline && evaluated) {
      lat_proposed.push_back(out.seg_seconds);
      merge_metrics(agg_proposed, compute_metrics(out.seg.ground_ids, out.accumulated));
    }
    if (wants(methods, "ransac_single") && evaluated && out.accumulated.size() >= 3) {
      auto t0 = std::chrono::steady_clock::now();
      auto ground = ransac_single(out.accumulated, rp);
      auto t1 = std::chrono::steady_clock::now();
      lat_single.push_back(std::chrono::duration<double>(t1 - t0).count());
      merge_metrics(agg_single, compute_metrics(ground, out.accumulated));
    }
    if (wants(methods, "ransac_patch") && evaluated) {
      auto t0 = std::chrono::steady_clock::now();
      auto ground = ransac_patch(out.grid, rp);
      auto t1 = std::chrono::steady_clock::now();
      lat_patch.push_back(std::chrono::duration<double>(t1 - t0).count());
      merge_metrics(agg_patch, compute_metrics(ground, out.accumulated));
    }
  }

  if (wants(methods, "proposed")) {
    MethodResult m;
    m.has_metrics = true;
    m.metrics = agg_proposed;
    m.has_latency = true;
    m.lat_mean_ms = mean_ms(lat_proposed);
    m.lat_p95_ms = p95_ms(lat_proposed);
    result.methods["proposed"] = m;
  }
  if (wants(methods, "ransac_single")) {
    MethodResult m;
    m.has_metrics = true;
    m.metrics = agg_single;
    m.has_latency = true;
    m.lat_mean_ms = mean_ms(lat_single);
    m.lat_p95_ms = p95_ms(lat_single);
    result.methods["ransac_single"] = m;
  }
  if (wants(methods, "ransac_patch")) {
    MethodResult m;
    m.has_metrics = true;
    m.metrics = agg_patch;
    m.has_latency = true;
    m.lat_mean_ms = mean_ms(lat_patch);
    m.lat_p95_ms = p95_ms(lat_patch);
    result.methods["ransac_patch"] = m;
  }

  // Terrain-model comparison on the pipeline's final control lattice.
  bool want_terrain = wants(methods, "bsp") || wants(methods, "knn") || wants(methods, "poly");
  if (want_terrain && !runner.lattice().empty()) {
    const ControlLattice& lattice = runner.lattice();
    std::vector<ControlPoint> controls;
    controls.reserve(lattice.points.size());
    for (const auto& [idx, cp] : lattice.points) controls.push_back(cp);
    std::sort(controls.begin(), controls.end(), [](const ControlPoint& a, const ControlPoint& b) {
      return a.u != b.u ? a.u < b.u : a.v < b.v;
    });

    auto samples = truth_samples(dataset.spec.terrain, lattice, cfg.degree_x, 200, cfg.seed);

    struct Model {
      std::string name;
      std::function<double(double, double)> query;
    };
    std::vector<Model> models;
    TerrainSurface bsp = TerrainSurface::fit(lattice, cfg.degree_x, cfg.degree_y);
    if (wants(methods, "bsp")) {
      models.push_back({"bsp", [&bsp](double x, double y) { return bsp.query(x, y).z; }});
    }
    std::unique_ptr<KnnTerrain> knn;
    if (wants(methods, "knn")) {
      knn = std::make_unique<KnnTerrain>(controls, cfg.knn_k);
      models.push_back({"knn", [&knn](double x, double y) { return knn->query(x, y); }});
    }
    std::unique_ptr<PolyTerrain> poly;
    if (wants(methods, "poly")) {
      poly = std::make_unique<PolyTerrain>(controls);
      models.push_back({"poly", [&poly](double x, double y) { return poly->query(x, y); }});
    }

    // Query latency over a shared deterministic query stream.
    auto rect = lattice.bounding_rect();
    double s = lattice.resolution;
    double x_lo = (rect.u_min + 0.5) * s, x_hi = (rect.u_max + 0.5) * s;
    double y_lo = (rect.v_min + 0.5) * s, y_hi = (rect.v_max + 0.5) * s;
    std::vector<std::pair<double, double>> queries;
    queries.reserve(static_cast<size_t>(cfg.latency_queries));
    Rng qrng(cfg.seed ^ 0xabcdefULL);
    for (long i = 0; i < cfg.latency_queries; ++i) {
      queries.push_back({qrng.uniform(x_lo, x_hi), qrng.uniform(y_lo, y_hi)});
    }

    for (const auto& model : models) {
      MethodResult m;
      m.has_rmse = true;
      m.rmse = rmse_terrain(model.query, samples);

      volatile double sink = 0.0;
      auto t0 = std::chrono::steady_clock::now();
      for (const auto& [qx, qy] : queries) sink = model.query(qx, qy);
      auto t1 = std::chrono::steady_clock::now();
      (void)sink;
      m.has_latency = true;
      m.lat_mean_ms = 1e3 * std::chrono::duration<double>(t1 - t0).count() /
                      static_cast<double>(queries.size());
      m.lat_p95_ms = m.lat_mean_ms;  // single-batch timing; p95 not sampled per query
      result.methods[model.name] = m;
    }
  }

  return result;
}

const MethodResult& BenchReport::scenario_method(const std::string& scenario,
                                                 const std::string& method) const {
  return by_scenario.at(scenario).at(method);
}

BenchReport run_suite(const std::vector<RunSpec>& runs, const std::vector<std::string>& methods,
                      const PipelineConfig& cfg) {
  BenchReport report;
  report.config_echo = serialize_config(cfg);
  report.runs.resize(runs.size());

  long lanes = thread_cap();
  for (size_t base = 0; base < runs.size(); base += static_cast<size_t>(lanes)) {
    size_t end = std::min(runs.size(), base + static_cast<size_t>(lanes));
    std::vector<std::future<RunResult>> futs;
    for (size_t i = base; i < end; ++i) {
      futs.push_back(std::async(std::launch::async, [&, i] {
        Dataset ds = generate_scenario(runs[i].spec);
        RunResult r = run_benchmark(ds, methods, cfg);
        r.scenario = runs[i].scenario;
        r.name = runs[i].name;
        return r;
      }));
    }
    for (size_t i = base; i < end; ++i) {
      report.runs[i] = futs[i - base].get();
    }
  }

  // Aggregate per scenario: confusion counts pooled, RMSE averaged over
  // altitudes, latency means averaged (p95 = max of run p95s).
  for (const auto& run : report.runs) {
    for (const auto& [method, res] : run.methods) {
      MethodResult& agg = report.by_scenario[run.scenario][method];
      if (res.has_metrics) {
        agg.has_metrics = true;
        merge_metrics(agg.metrics, res.metrics);
      }
    }
  }
  // Mean-based fields (RMSE over altitudes, latency) in a second pass.
  for (auto& [scenario, per_method] : report.by_scenario) {
    for (auto& [method, agg] : per_method) {
      double rmse_sum = 0.0, lat_sum = 0.0, p95_max = 0.0;
      long rmse_n = 0, lat_n = 0;
      for (const auto& run : report.runs) {
        if (run.scenario != scenario) continue;
        auto it = run.methods.find(method);
        if (it == run.methods.end()) continue;
        if (it->second.has_rmse) {
          rmse_sum += it->second.rmse;
          ++rmse_n;
        }
        if (it->second.has_latency) {
          lat_sum += it->second.lat_mean_ms;
          p95_max = std::max(p95_max, it->second.lat_p95_ms);
          ++lat_n;
        }
      }
      if (rmse_n > 0) {
        agg.has_rmse = true;
        agg.rmse = rmse_sum / static_cast<double>(rmse_n);
      }
      if (lat_n > 0) {
        agg.has_latency = true;
        agg.lat_mean_ms = lat_sum / static_cast<double>(lat_n);
        agg.lat_p95_ms = p95_max;
      }
    }
  }
  return report;
}

namespace {

std::string fmt(double v, int prec = 4) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

std::string csv_cell_metrics(const MethodResult& m) {
  std::string row;
  if (m.has_metrics) {
    row += fmt(m.metrics.precision) + "," + fmt(m.metrics.recall) + "," + fmt(m.metrics.iou) +
           "," + fmt(m.metrics.f1) + ",";
  } else {
    row += "nan,nan,nan,nan,";
  }
  row += m.has_rmse ? fmt(m.rmse) : "nan";
  row += ",";
  if (m.has_latency) {
    row += fmt(m.lat_mean_ms, 6) + "," + fmt(m.lat_p95_ms, 6);
  } else {
    row += "nan,nan";
  }
  return row;
}

}  // namespace

std::string report_csv(const BenchReport& report) {
  std::string out;
  std::istringstream cfg(report.config_echo);
  std::string line;
  while (std::getline(cfg, line)) {
    if (!line.empty() && line[0] != '#') out += "# " + line + "\n";
  }
  out += "scenario,method,precision,recall,iou,f1,rmse_m,lat_mean_ms,lat_p95_ms\n";
  for (const auto& run : report.runs) {
    for (const std::string& method : all_methods()) {
      auto it = run.methods.find(method);
      if (it == run.methods.end()) continue;
      out += run.name + "," + method + "," + csv_cell_metrics(it->second) + "\n";
    }
  }
  for (const auto& [scenario, per_method] : report.by_scenario) {
    for (const std::string& method : all_methods()) {
      auto it = per_method.find(method);
      if (it == per_method.end()) continue;
      out += scenario + "," + method + "," + csv_cell_metrics(it->second) + "\n";
    }
  }
  return out;
}

std::string report_table(const BenchReport& report) {
  std::ostringstream out;
  out << "scenario        method         prec    recall  iou     f1      rmse_m   lat_ms\n";
  out << "------------------------------------------------------------------------------\n";
  for (const auto& [scenario, per_method] : report.by_scenario) {
    for (const std::string& method : all_methods()) {
      auto it = per_method.find(method);
      if (it == per_method.end()) continue;
      const MethodResult& m = it->second;
      char buf[256];
      std::snprintf(buf, sizeof(buf), "%-15s %-14s %-7s %-7s %-7s %-7s %-8s %-9s\n",
                    scenario.c_str(), method.c_str(),
                    m.has_metrics ? fmt(m.metrics.precision).c_str() : "-",
                    m.has_metrics ? fmt(m.metrics.recall).c_str() : "-",
                    m.has_metrics ? fmt(m.metrics.iou).c_str() : "-",
                    m.has_metrics ? fmt(m.metrics.f1).c_str() : "-",
                    m.has_rmse ? fmt(m.rmse).c_str() : "-",
                    m.has_latency ? fmt(m.lat_mean_ms, 6).c_str() : "-");
      out << buf;
    }
  }
  return out.str();
}

std::vector<AblationRow> run_ablation(const std::vector<RunSpec>& runs,
                                      const PipelineConfig& cfg) {
  struct Variant {
    std::string name;
    bool ti, psi, ref;
  };
  const std::vector<Variant> variants = {
      {"baseline", false, false, false},
      {"plus_ti", true, false, false},
      {"plus_ti_psi", true, true, false},
      {"full", true, true, true},
  };

  std::vector<AblationRow> rows;
  for (const auto& variant : variants) {
    PipelineConfig vc = cfg;
    vc.accumulation_frames = variant.ti ? cfg.accumulation_frames : 1;
    vc.seg.use_prior = variant.psi;
    vc.seg.use_refinement = variant.ref;

    AblationRow row;
    row.name = variant.name;
    row.ti = variant.ti;
    row.psi = variant.psi;
    row.ref = variant.ref;

    long lanes = thread_cap();
    std::vector<RunResult> results(runs.size());
    for (size_t base = 0; base < runs.size(); base += static_cast<size_t>(lanes)) {
      size_t end = std::min(runs.size(), base + static_cast<size_t>(lanes));
      std::vector<std::future<RunResult>> futs;
      for (size_t i = base; i < end; ++i) {
        futs.push_back(std::async(std::launch::async, [&, i] {
          Dataset ds = generate_scenario(runs[i].spec);
          RunResult r = run_benchmark(ds, {"proposed"}, vc);
          r.scenario = runs[i].scenario;
          r.name = runs[i].name;
          return r;
        }));
      }
      for (size_t i = base; i < end; ++i) results[i] = futs[i - base].get();
    }

    for (size_t i = 0; i < runs.size(); ++i) {
      const SegMetrics& m = results[i].methods.at("proposed").metrics;
      merge_metrics(row.overall, m);
      merge_metrics(row.by_scenario[runs[i].scenario], m);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows, const PipelineConfig& cfg) {
  std::string out;
  std::istringstream cfgs(serialize_config(cfg));
  std::string line;
  while (std::getline(cfgs, line)) {
    if (!line.empty() && line[0] != '#') out += "# " + line + "\n";
  }
  out += "config,ti,psi,ref,scenario,precision,recall,iou,f1\n";
  auto flag = [](bool b) { return b ? std::string("1") : std::string("0"); };
  for (const auto& row : rows) {
    out += row.name + "," + flag(row.ti) + "," + flag(row.psi) + "," + flag(row.ref) +
           ",overall," + fmt(row.overall.precision) + "," + fmt(row.overall.recall) + "," +
           fmt(row.overall.iou) + "," + fmt(row.overall.f1) + "\n";
    for (const auto& [scenario, m] : row.by_scenario) {
      out += row.name + "," + flag(row.ti) + "," + flag(row.psi) + "," + flag(row.ref) + "," +
             scenario + "," + fmt(m.precision) + "," + fmt(m.recall) + "," + fmt(m.iou) + "," +
             fmt(m.f1) + "\n";
    }
  }
  return out;
}

ConsistencyResult terrain_following_replay(const Dataset& dataset, const PipelineConfig& cfg,
                                           double h_ref) {
  PipelineRunner runner(cfg, dataset.spec.mount);
  const double dt = 1.0 / dataset.spec.frame_rate;
  const double gain = 2.0;  // 1/s proportional correction of the stub

  ConsistencyResult res;
  double err_sum = 0.0, err_sq = 0.0;
  bool stub_init = false;
  double z = 0.0, prev_cmd = 0.0;

  for (const auto& frame : dataset.frames) {
    FrameOutput out = runner.process_frame(frame, dataset.track);
    if (!out.surface) continue;
    AltitudeCommand cmd =
        altitude_command(*out.surface, out.uav_position.x(), out.uav_position.y(), h_ref);
    if (frame.frame_index < cfg.warmup_frames) {
      prev_cmd = cmd.z_cmd;
      continue;
    }
    if (!stub_init) {
      z = cmd.z_cmd;
      prev_cmd = cmd.z_cmd;
      stub_init = true;
    }
    double feedforward = (cmd.z_cmd - prev_cmd) / dt;
    z += dt * (feedforward + gain * (cmd.z_cmd - z));
    prev_cmd = cmd.z_cmd;

    double truth = terrain_height(dataset.spec.terrain, out.uav_position.x(),
                                  out.uav_position.y());
    double err = (z - truth) - h_ref;
    err_sum += err;
    err_sq += err * err;
    ++res.samples;
  }
  if (res.samples > 0) {
    double n = static_cast<double>(res.samples);
    res.mean_error = err_sum / n;
    res.rmse = std::sqrt(err_sq / n);
    double var = err_sq / n - res.mean_error * res.mean_error;
    res.std_dev = var > 0 ? std::sqrt(var) : 0.0;
  }
  return res;
}

}  // namespace terrafollow
