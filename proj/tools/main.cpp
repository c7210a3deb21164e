#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "terrafollow/bench.hpp"
#include "terrafollow/io_util.hpp"
#include "terrafollow/kv.hpp"

namespace fs = std::filesystem;
using namespace terrafollow;

namespace {

struct CommonOpts {
  std::string config_file;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

PipelineConfig load_config(const CommonOpts& opts) {
  PipelineConfig cfg;
  if (!opts.config_file.empty()) cfg = read_config_file(opts.config_file);
  for (const auto& kv : opts.overrides) apply_override(cfg, kv);
  if (opts.seed) cfg.seed = *opts.seed;
  validate_config(cfg);
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_file, "pipeline config file (key = value lines)");
  cmd->add_option("--set", opts.overrides, "override a config key, e.g. --set seed_count=8");
  cmd->add_option("--seed", opts.seed, "override the config seed");
  cmd->add_flag("--quiet", opts.quiet, "suppress progress output");
}

void say(const CommonOpts& opts, const std::string& msg) {
  if (!opts.quiet) std::cout << msg << "\n";
}

std::vector<RunSpec> suite_or_dataset_runs(bool standard_suite_flag,
                                           const std::string& dataset_dir,
                                           const PipelineConfig& cfg) {
  if (standard_suite_flag) return standard_suite(cfg.seed);
  if (dataset_dir.empty()) {
    throw std::runtime_error("either --data <dir> or --standard-suite is required");
  }
  Dataset ds = read_dataset(dataset_dir);
  RunSpec run;
  run.scenario = fs::path(dataset_dir).filename().string();
  if (run.scenario.empty()) run.scenario = "dataset";
  run.name = run.scenario;
  run.spec = ds.spec;
  return {run};
}

int cmd_simulate(const std::string& spec_file, const std::string& out_dir,
                 const CommonOpts& opts) {
  ScenarioSpec spec = read_scenario_file(spec_file);
  if (opts.seed) spec.seed = *opts.seed;
  Dataset ds = generate_scenario(spec);
  write_dataset(out_dir, ds);
  say(opts, "wrote " + std::to_string(ds.frames.size()) + " frames to " + out_dir);
  return 0;
}

int cmd_pipeline(const std::string& data_dir, const std::string& out_dir,
                 const CommonOpts& opts, bool dumps, bool terrain) {
  PipelineConfig cfg = load_config(opts);
  Dataset ds = read_dataset(data_dir);
  PipelineRunner runner(cfg, ds.spec.mount);
  fs::create_directories(out_dir);

  std::string altitude_log = "# t x y z_terr z_cmd extrapolated\n";
  long frames_done = 0;
  for (const auto& frame : ds.frames) {
    FrameOutput out = runner.process_frame(frame, ds.track);
    ++frames_done;
    if (dumps) {
      char name[64];
      std::snprintf(name, sizeof(name), "seg_%06ld.txt", out.frame_index);
      write_text_atomic((fs::path(out_dir) / name).string(),
                        segmentation_dump(out.seg, out.grid));
    }
    if (terrain && out.surface) {
      double t_mid = 0.5 * (frame.t_start + frame.t_end);
      AltitudeCommand cmd = altitude_command(*out.surface, out.uav_position.x(),
                                             out.uav_position.y(), cfg.h_ref);
      altitude_log += format_double(t_mid) + " " + format_double(out.uav_position.x()) + " " +
                      format_double(out.uav_position.y()) + " " + format_double(cmd.z_terr) +
                      " " + format_double(cmd.z_cmd) + (cmd.extrapolated ? " 1\n" : " 0\n");
    }
  }

  if (terrain) {
    write_text_atomic((fs::path(out_dir) / "terrain_controls.txt").string(),
                      lattice_export(runner.lattice()));
    if (runner.surface()) {
      write_text_atomic((fs::path(out_dir) / "terrain_grid.txt").string(),
                        surface_grid_export(*runner.surface(), cfg.grid_resolution / 2.0));
    }
    write_text_atomic((fs::path(out_dir) / "altitude_log.txt").string(), altitude_log);
  }

  KvWriter summary;
  summary.comment("pipeline run summary");
  summary.put("frames_processed", frames_done);
  summary.put("control_points", static_cast<long>(runner.lattice().points.size()));
  write_text_atomic((fs::path(out_dir) / "summary.txt").string(), summary.text);
  say(opts, "processed " + std::to_string(frames_done) + " frames; outputs in " + out_dir);
  return 0;
}

int cmd_model(const std::string& data_dir, const std::string& out_dir, const CommonOpts& opts,
              const std::vector<double>& query) {
  PipelineConfig cfg = load_config(opts);
  Dataset ds = read_dataset(data_dir);
  PipelineRunner runner(cfg, ds.spec.mount);
  for (const auto& frame : ds.frames) runner.process_frame(frame, ds.track);
  if (!runner.surface()) throw std::runtime_error("no terrain surface (no ground extracted)");

  fs::create_directories(out_dir);
  write_text_atomic((fs::path(out_dir) / "terrain_controls.txt").string(),
                    lattice_export(runner.lattice()));
  write_text_atomic((fs::path(out_dir) / "terrain_grid.txt").string(),
                    surface_grid_export(*runner.surface(), cfg.grid_resolution / 2.0));
  if (query.size() == 2) {
    HeightQuery q = runner.surface()->query(query[0], query[1]);
    std::cout << format_double(q.z) << (q.extrapolated ? " extrapolated" : "") << "\n";
  }
  say(opts, "terrain exports in " + out_dir);
  return 0;
}

int cmd_bench(bool use_suite, const std::string& data_dir, const std::string& out_file,
              std::vector<std::string> methods, const CommonOpts& opts) {
  PipelineConfig cfg = load_config(opts);
  if (methods.empty()) methods = all_methods();
  for (const auto& m : methods) {
    if (std::find(all_methods().begin(), all_methods().end(), m) == all_methods().end()) {
      std::string valid;
      for (const auto& v : all_methods()) valid += (valid.empty() ? "" : ", ") + v;
      throw std::runtime_error("unknown method `" + m + "`; valid: " + valid);
    }
  }
  std::vector<RunSpec> runs = suite_or_dataset_runs(use_suite, data_dir, cfg);
  BenchReport report = run_suite(runs, methods, cfg);
  write_text_atomic(out_file, report_csv(report));
  say(opts, report_table(report));
  say(opts, "report written to " + out_file);
  return 0;
}

int cmd_ablate(bool use_suite, const std::string& data_dir, const std::string& out_file,
               const CommonOpts& opts) {
  PipelineConfig cfg = load_config(opts);
  std::vector<RunSpec> runs = suite_or_dataset_runs(use_suite, data_dir, cfg);
  std::vector<AblationRow> rows = run_ablation(runs, cfg);
  write_text_atomic(out_file, ablation_csv(rows, cfg));
  for (const auto& row : rows) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-12s ti=%d psi=%d ref=%d  P=%.4f R=%.4f IoU=%.4f F1=%.4f",
                  row.name.c_str(), row.ti, row.psi, row.ref, row.overall.precision,
                  row.overall.recall, row.overall.iou, row.overall.f1);
    say(opts, buf);
  }
  say(opts, "ablation table written to " + out_file);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"terrafollow: rotating-radar terrain perception pipeline"};
  app.require_subcommand(1);

  CommonOpts opts;

  auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset from a scenario spec");
  std::string spec_file, out_path, data_dir;
  sim->add_option("--spec", spec_file, "scenario spec file")->required();
  sim->add_option("--out", out_path, "output dataset directory")->required();
  add_common(sim, opts);

  auto* pipe = app.add_subcommand("pipeline", "run the full perception pipeline on a dataset");
  pipe->add_option("--data", data_dir, "dataset directory")->required();
  pipe->add_option("--out", out_path, "output directory")->required();
  add_common(pipe, opts);

  auto* segc = app.add_subcommand("segment", "segmentation dumps only");
  segc->add_option("--data", data_dir, "dataset directory")->required();
  segc->add_option("--out", out_path, "output directory")->required();
  add_common(segc, opts);

  auto* model = app.add_subcommand("model", "terrain fit / query only");
  std::vector<double> query_xy;
  model->add_option("--data", data_dir, "dataset directory")->required();
  model->add_option("--out", out_path, "output directory")->required();
  model->add_option("--query", query_xy, "query the surface at x y")->expected(2);
  add_common(model, opts);

  auto* bench = app.add_subcommand("bench", "benchmark methods over a dataset or the suite");
  bool use_suite = false;
  std::vector<std::string> methods;
  bench->add_option("--data", data_dir, "dataset directory");
  bench->add_flag("--standard-suite", use_suite, "run the four canonical scenarios x 3 altitudes");
  bench->add_option("--methods", methods, "subset of methods to run");
  bench->add_option("--out", out_path, "output report file")->required();
  add_common(bench, opts);

  auto* ablate = app.add_subcommand("ablate", "progressive component ablation");
  ablate->add_option("--data", data_dir, "dataset directory");
  ablate->add_flag("--standard-suite", use_suite, "run on the standard suite");
  ablate->add_option("--out", out_path, "output table file")->required();
  add_common(ablate, opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(spec_file, out_path, opts);
    if (pipe->parsed()) return cmd_pipeline(data_dir, out_path, opts, true, true);
    if (segc->parsed()) return cmd_pipeline(data_dir, out_path, opts, true, false);
    if (model->parsed()) return cmd_model(data_dir, out_path, opts, query_xy);
    if (bench->parsed()) return cmd_bench(use_suite, data_dir, out_path, methods, opts);
    if (ablate->parsed()) return cmd_ablate(use_suite, data_dir, out_path, opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
