#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "ghostscope/error.hpp"
#include "ghostscope/pipeline.hpp"

namespace gs = ghostscope;
namespace cli = ghostscope::cli;

namespace {

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

int fail(int code, const std::string& msg) {
  std::cerr << "error: " << one_line(msg) << '\n';
  return code;
}

void warn(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << one_line(w) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ghostscope: multipath-ghost room layout recovery for MIMO FMCW radar"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::optional<std::string> config_path;
  bool print_config = false;
  std::optional<int> jobs;
  std::optional<double> traj_fraction;
  app.add_option("--config", config_path, "Pipeline config JSON")->check(CLI::ExistingFile);
  app.add_flag("--print-config", print_config, "Print the effective config and exit");
  app.add_option("--jobs", jobs, "Frames processed concurrently");
  app.add_option("--traj-fraction", traj_fraction, "Fraction of trajectory frames to use, in (0, 1]");

  std::string scene, out, cubes, pred, gt;
  std::size_t plans = 10, poses = 3;
  std::uint64_t gen_seed = 0;
  bool seed_given = false, no_bame = false, covered_only = false;
  std::vector<std::string> plot_inputs;

  auto* sim = app.add_subcommand("simulate", "Simulate radar cubes for a scene");
  sim->add_option("--scene", scene, "Scene JSON")->required();
  sim->add_option("--out", out, "Output directory")->required();

  auto* pipe = app.add_subcommand("pipeline", "Run detection, inversion, fitting and refinement");
  auto* scene_opt = pipe->add_option("--scene", scene, "Scene JSON (simulated, or ground truth for --cubes)");
  auto* cubes_opt = pipe->add_option("--cubes", cubes, "Directory of GSC1 cube files");
  pipe->add_option("--out", out, "Output directory")->required();
  pipe->add_flag("--no-bame", no_bame, "Use the virtual-array map and 2D CFAR instead of the bi-angular cube");

  auto* gen = app.add_subcommand("gen-dataset", "Generate partial-observation training rasters");
  gen->add_option("--out", out, "Output directory")->required();
  gen->add_option("--plans", plans, "Number of random floor plans")->check(CLI::PositiveNumber);
  gen->add_option("--poses", poses, "Radar poses per plan")->check(CLI::PositiveNumber);
  auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "Master seed (overrides the config seed)");

  auto* eval = app.add_subcommand("evaluate", "Score predicted layouts against ground-truth scenes");
  eval->add_option("--pred", pred, "Layout JSON or directory of layouts")->required();
  eval->add_option("--gt", gt, "Scene JSON or directory of scenes with matching names")->required();
  eval->add_option("--out", out, "Report CSV")->required();
  eval->add_flag("--covered-only", covered_only, "Restrict ground-truth walls to multipath-covered stretches");

  auto* plt = app.add_subcommand("plot", "Render scenes, layouts, clouds and maps to SVG");
  plt->add_option("inputs", plot_inputs, "Scene/layout JSON, cloud CSV or map CSV files")->required();
  plt->add_option("--out", out, "Output SVG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail(1, e.what());
  }
  if (app.get_subcommands().empty() && !print_config)
    return fail(1, "a subcommand is required (simulate, pipeline, gen-dataset, evaluate, plot)");

  try {
    cli::PipelineConfig cfg = cli::load_config(config_path ? std::optional<cli::fs::path>(*config_path) : std::nullopt);
    if (jobs) cfg.jobs = *jobs;
    if (traj_fraction) cfg.traj_fraction = *traj_fraction;
    if (*pipe && no_bame) cfg.use_bame = false;
    seed_given = gen_seed_opt->count() > 0;
    if (seed_given) cfg.seed = gen_seed;
    cfg.seed = cli::effective_seed(cfg.seed);
    cfg.finalize();

    if (print_config) {
      std::cout << cli::config_to_json(cfg);
      return 0;
    }

    if (*sim) {
      const auto n = cli::run_simulate(scene, out, cfg);
      std::cout << "simulated " << n << " frames into " << out << '\n';
    } else if (*pipe) {
      if (scene_opt->count() == 0 && cubes_opt->count() == 0)
        throw gs::UsageError("pipeline needs --scene or --cubes");
      std::optional<cli::fs::path> scene_path;
      if (scene_opt->count()) scene_path = scene;
      const auto res = cubes_opt->count() ? cli::run_pipeline(cubes, scene_path, out, cfg)
                                          : cli::run_pipeline(scene, std::nullopt, out, cfg);
      warn(res.warnings);
      std::cout << "frames " << res.n_frames << ", reflector points " << res.cloud.points.size() << ", walls "
                << res.refined.layout.walls.size() << ", objects " << res.refined.layout.objects.size();
      if (res.layout_metrics)
        std::cout << ", chamfer " << 100.0 * res.layout_metrics->chamfer << " cm, f1 " << res.layout_metrics->f1;
      std::cout << '\n';
    } else if (*gen) {
      gs::DatasetConfig d;
      d.poses_per_plan = poses;
      d.jobs = cfg.jobs;
      const auto n = cli::run_gen_dataset(out, plans, d, cfg.seed);
      std::cout << "wrote " << n << " samples into " << out << '\n';
    } else if (*eval) {
      cli::run_evaluate(pred, gt, out, covered_only, cfg);
    } else if (*plt) {
      std::vector<cli::fs::path> in(plot_inputs.begin(), plot_inputs.end());
      cli::run_plot(in, out);
    }
  } catch (const gs::UsageError& e) {
    return fail(1, e.what());
  } catch (const gs::DegenerateGeometry& e) {
    return fail(3, e.what());
  } catch (const gs::DataError& e) {
    return fail(2, e.what());
  } catch (const std::exception& e) {
    return fail(2, e.what());
  }
  return 0;
}
