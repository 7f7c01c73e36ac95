#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <stdexcept>

#include "cli.hpp"
#include "nnreach/dataset.hpp"
#include "nnreach/field_io.hpp"
#include "nnreach/model_io.hpp"
#include "nnreach/trainer.hpp"
#include "nnreach/tube_io.hpp"
#include "nnreach/verification.hpp"
#include "output.hpp"

namespace nnreach::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void record_tube(OutputDir& out, const fs::path& manifest) {
  out.record(manifest);
  std::ifstream in(manifest);
  const json m = json::parse(in);
  for (const auto& f : m.at("files")) out.record(out.root() / f.get<std::string>());
}

json mc_config_json(const MonteCarloConfig& mc, const std::string& plant) {
  return {{"plant", plant},
          {"num_samples", mc.num_samples},
          {"include_zero_draw", mc.include_zero_draw},
          {"num_disturbance_draws", mc.num_disturbance_draws},
          {"horizon", mc.horizon},
          {"dt", mc.dt},
          {"seed", mc.seed}};
}

/// Monte-Carlo plant: the true dynamics with zero bounds by default, or the
/// analysed closed loop when monte_carlo.plant is "analysed".
std::pair<ClosedLoopSystem, std::string> mc_system(const RunConfig& rc, const ClosedLoopSystem& analysed, int dims) {
  std::string plant = "true";
  if (rc.json.contains("monte_carlo")) plant = rc.json.at("monte_carlo").value("plant", plant);
  if (plant == "true") return {true_plant(analysed, dims), plant};
  if (plant == "analysed") return {analysed, plant};
  throw std::invalid_argument("config: monte_carlo.plant must be 'true' or 'analysed'");
}

json polyline_json(const ShapePrimitive& prim) {
  json pts = json::array();
  auto circle = [&](double cx, double cy, double r) {
    constexpr int kSegments = 64;
    for (int k = 0; k <= kSegments; ++k) {
      const double a = 2.0 * std::numbers::pi * (k % kSegments) / kSegments;
      pts.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
    }
  };
  auto rectangle = [&](const std::vector<double>& lo, const std::vector<double>& hi) {
    pts = json::array({{lo[0], lo[1]}, {hi[0], lo[1]}, {hi[0], hi[1]}, {lo[0], hi[1]}, {lo[0], lo[1]}});
  };
  std::vector<double> lo, hi;
  bounding_box(prim, lo, hi);
  if (const auto* b = std::get_if<Ball>(&prim)) {
    circle(b->center[0], b->center[1], b->radius);
  } else if (const auto* c = std::get_if<Cylinder>(&prim); c && (c->axis >= 2 || c->center.size() == 2)) {
    circle(c->center[0], c->center[1], c->radius);
  } else {
    rectangle(lo, hi);
  }
  json j = {{"kind", shape_kind(prim)}, {"polyline", pts}};
  if (lo.size() > 2) j["z_range"] = {lo[2], hi[2]};
  return j;
}

json geometry_json(const Scene& scene) {
  auto list = [](const ShapeSet& set) {
    json a = json::array();
    for (const auto& p : set.primitives()) a.push_back(polyline_json(p));
    return a;
  };
  return {{"initial", list(scene.initial_set)}, {"goal", list(scene.goal_set)}, {"obstacles", list(scene.obstacles)}};
}

ScalarField z_slice(const ScalarField& field, double z) {
  const Grid& g = field.grid();
  if (z < g.lo()[2] || z > g.hi()[2]) throw std::invalid_argument("export-plots: z slice outside the grid");
  auto plane = build_grid({g.lo()[0], g.lo()[1]}, {g.hi()[0], g.hi()[1]}, {g.count(0), g.count(1)});
  ScalarField out(plane, 0.0, field.time_tag());
  std::vector<double> p(3);
  p[2] = z;
  for (std::size_t i = 0; i < out.size(); ++i) {
    plane->node_coordinates(i, std::span<double>(p.data(), 2));
    out[i] = interpolate(field, p);
  }
  return out;
}

}  // namespace

int cmd_train(const RunConfig& rc) {
  const Scene scene = rc.scene();
  TrainRunConfig tc = train_config_from_json(rc.json.value("train", json::object()));
  tc.seed = rc.seed;
  const TrainArtifacts art = train_loop(tc, scene);

  OutputDir out(rc.out);
  save_scene(scene, out.file("scene.json"));
  save_dataset_csv(art.dataset, out.file("dataset.csv"));
  save_model(art.model, out.file("model.json"));
  save_policy(art.policy, out.file("policy.json"));
  save_bounds(art.bounds, out.file("bounds.json"));
  json log = art.log;
  log["coverage"] = art.coverage;
  out.write_json("train_log.json", log);
  out.write_manifest("train", rc.seed, rc.json);

  const auto& last = art.iterations.back();
  std::cout << "trained on " << art.dataset.size() << " tuples; validation error " << last.validation_error
            << "; 3-sigma coverage " << art.coverage << "\n";
  return kOk;
}

int cmd_verify(const RunConfig& rc) {
  const Scene scene = rc.scene();
  const LoadedSystem ls = load_system(rc, scene);
  const FrtAnalysis a = analyze_frt(ls.system, scene, rc.solver());
  const auto& c = a.classification;

  OutputDir out(rc.out);
  save_scene(scene, out.file("scene.json"));
  record_tube(out, write_tube(a.frt, out.root(), "frt"));
  json contact = json::array();
  for (double t : c.first_contact_time) contact.push_back(finite_or_null(t));
  const json report = {{"verdict", c.unsafe ? "unsafe" : "safe"},
                       {"frt_intersects_obstacle", c.per_obstacle},
                       {"first_contact_time", contact},
                       {"bounds", bounds_to_json(ls.system.bounds())},
                       {"solver", solver_config_to_json(a.frt.config)},
                       {"provenance", ls.provenance}};
  out.write_json("verify.json", report);
  out.write_manifest("verify", rc.seed, rc.json);

  std::cout << "verdict: " << (c.unsafe ? "unsafe" : "safe");
  for (std::size_t i = 0; i < c.per_obstacle.size(); ++i) {
    if (c.per_obstacle[i]) std::cout << " (reaches obstacle " << i + 1 << ")";
  }
  std::cout << "\n";
  return rc.strict && c.unsafe ? kUnsafe : kOk;
}

int cmd_safe_set(const RunConfig& rc) {
  const Scene scene = rc.scene();
  if (!rc.force && !rc.out.empty() && fs::exists(rc.out / "verify.json")) {
    std::ifstream in(rc.out / "verify.json");
    const json v = json::parse(in, nullptr, false);
    if (!v.is_discarded() && v.value("verdict", "") == "safe") {
      throw std::invalid_argument("safe-set: verify found the controller safe; pass --force to run anyway");
    }
  }
  const LoadedSystem ls = load_system(rc, scene);
  const SolverConfig solver = rc.solver();
  const SafeSetAnalysis a = analyze_safe_set(ls.system, scene, solver);
  if (const std::string err = check_partition(a.report); !err.empty()) {
    throw std::logic_error("safe-set: partition check failed: " + err);
  }

  OutputDir out(rc.out);
  save_scene(scene, out.file("scene.json"));
  for (std::size_t i = 0; i < a.brts.size(); ++i) {
    record_tube(out, write_tube(a.brts[i], out.root(), "brt_obstacle" + std::to_string(i + 1)));
  }
  write_field_csv(a.report.brt_union, out.file("brt_union.csv"));
  write_mask_csv(a.report.initial_mask, out.file("initial_mask.csv"));
  write_mask_csv(a.report.safe_mask, out.file("safe_mask.csv"));
  write_mask_csv(a.report.unsafe_mask, out.file("unsafe_mask.csv"));

  json report = report_to_json(a.report);
  report["provenance"] = ls.provenance;
  if (rc.compare_mc) {
    const MonteCarloConfig mc = rc.monte_carlo(scene, solver);
    const auto [sys, plant] = mc_system(rc, ls.system, scene.grid->dims());
    const MonteCarloResult res = mc_ground_truth(sys, scene.initial_set, scene.obstacles, mc);
    write_mc_csv(res, out.file("mc.csv"));
    const McAgreement agree = compare_with_mc(a.report, res);
    report["monte_carlo"] = mc_config_json(mc, plant);
    report["monte_carlo"]["safe_fraction"] = res.safe_fraction();
    report["monte_carlo"]["comparison"] = agreement_to_json(agree);
    std::cout << "monte-carlo agreement " << agree.agreement() << " (" << agree.conservative << " conservative, "
              << agree.optimistic << " optimistic)\n";
  }
  out.write_json("safe_set.json", report);
  out.write_manifest("safe-set", rc.seed, rc.json);
  std::cout << "safe fraction of the initial set: " << a.report.safe_fraction << " (" << to_string(a.report.verdict)
            << ")\n";
  return kOk;
}

int cmd_oracle(const RunConfig& rc) {
  const Scene scene = rc.scene();
  const LoadedSystem ls = load_system(rc, scene);
  const MonteCarloConfig mc = rc.monte_carlo(scene, rc.solver());
  const auto [sys, plant] = mc_system(rc, ls.system, scene.grid->dims());
  const MonteCarloResult res = mc_ground_truth(sys, scene.initial_set, scene.obstacles, mc);

  OutputDir out(rc.out);
  write_mc_csv(res, out.file("mc.csv"));
  json summary = mc_config_json(mc, plant);
  summary["strategy"] = {{"zero_draw", mc.include_zero_draw}, {"uniform_random_draws", mc.num_disturbance_draws}};
  summary["safe_fraction"] = res.safe_fraction();
  summary["provenance"] = ls.provenance;
  out.write_json("oracle.json", summary);
  out.write_manifest("oracle", rc.seed, rc.json);
  std::cout << "monte-carlo safe fraction " << res.safe_fraction() << " over " << mc.num_samples << " samples\n";
  return kOk;
}

int cmd_export_plots(const RunConfig& rc) {
  if (rc.run_dir.empty()) throw std::invalid_argument("export-plots: --run is required");
  if (!fs::is_directory(rc.run_dir)) throw std::invalid_argument("missing run directory: " + rc.run_dir.string());
  OutputDir out(rc.out.empty() ? rc.run_dir / "plots" : rc.out);

  std::vector<fs::path> tubes;
  for (const auto& entry : fs::directory_iterator(rc.run_dir)) {
    if (entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path());
    const json j = json::parse(in, nullptr, false);
    if (j.is_object() && j.contains("times") && j.contains("files")) tubes.push_back(entry.path());
  }
  std::sort(tubes.begin(), tubes.end());

  int written = 0;
  char name[128];
  for (const auto& manifest : tubes) {
    const TubeResult tube = read_tube(manifest);
    const std::string stem = manifest.stem().string();
    const int dims = tube.snapshots.front().field.grid().dims();
    for (std::size_t k = 0; k < tube.snapshots.size(); ++k) {
      const ScalarField& f = tube.snapshots[k].field;
      if (dims == 2) {
        std::snprintf(name, sizeof(name), "slice_%s_%04zu.csv", stem.c_str(), k);
        write_field_csv(f, out.file(name));
        ++written;
      } else if (dims == 3) {
        std::vector<double> zs = rc.z_slices;
        if (zs.empty()) zs.push_back(0.5 * (f.grid().lo()[2] + f.grid().hi()[2]));
        for (double z : zs) {
          std::snprintf(name, sizeof(name), "slice_%s_%04zu_z%g.csv", stem.c_str(), k, z);
          write_field_csv(z_slice(f, z), out.file(name));
          ++written;
        }
      } else {
        throw std::invalid_argument("export-plots: only 2D and 3D tubes can be sliced");
      }
    }
  }
  if (fs::exists(rc.run_dir / "scene.json")) {
    out.write_json("geometry.json", geometry_json(load_scene(rc.run_dir / "scene.json")));
  }
  if (fs::exists(rc.run_dir / "mc.csv")) {
    fs::copy_file(rc.run_dir / "mc.csv", out.file("mc_scatter.csv"), fs::copy_options::overwrite_existing);
  }
  out.write_manifest("export-plots", rc.seed, {{"run", rc.run_dir.generic_string()}, {"z", rc.z_slices}});
  std::cout << "exported " << written << " slices from " << tubes.size() << " tubes to " << out.root().string()
            << "\n";
  return kOk;
}

}  // namespace nnreach::cli
