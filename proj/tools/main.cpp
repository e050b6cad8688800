// Command line front end: mesh generation, synthetic data simulation,
// reconstruction and result evaluation.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

#include "eitrec/io.hpp"
#include "eitrec/mesh.hpp"
#include "eitrec/optimizer.hpp"
#include "eitrec/synth.hpp"

namespace fs = std::filesystem;
using namespace eit;

namespace {

const std::set<std::string> kConfigKeys = {
    "gamma", "alpha", "beta", "K", "noise", "seed", "E", "width", "shape",
    "gen_mesh", "recon_mesh", "dataset", "out", "snapshots", "truth",
    "allow_inverse_crime", "h", "ls_shrink", "ls_armijo_c", "ls_max_backtracks",
    "ls_growth", "solver_tol", "solver_max_iter", "direct_threshold", "use_clean"};

// Configuration file values fill in flags the user did not pass.
struct ConfigMerge {
  std::map<std::string, std::string> file;

  void load(const std::string& path) {
    if (!path.empty()) file = parse_config_file(path, kConfigKeys);
  }
  void merge(const CLI::Option* opt, const std::string& key, double& target) const {
    if (opt->count() == 0 && file.count(key)) target = std::stod(file.at(key));
  }
  void merge(const CLI::Option* opt, const std::string& key, int& target) const {
    if (opt->count() == 0 && file.count(key)) target = std::stoi(file.at(key));
  }
  void merge(const CLI::Option* opt, const std::string& key, uint64_t& target) const {
    if (opt->count() == 0 && file.count(key)) target = std::stoull(file.at(key));
  }
  void merge(const CLI::Option* opt, const std::string& key, std::string& target) const {
    if (opt->count() == 0 && file.count(key)) target = file.at(key);
  }
  void merge(const CLI::Option* opt, const std::string& key, bool& target) const {
    if (opt->count() == 0 && file.count(key)) {
      const std::string& v = file.at(key);
      target = (v == "1" || v == "true" || v == "yes");
    }
  }
};

std::vector<int> parse_snapshot_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stoi(tok));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int run_mesh(const std::string& config_path, double h, const std::string& shape_str,
             const std::string& out, const CLI::Option* h_opt, const CLI::Option* shape_opt,
             const CLI::Option* out_opt) {
  ConfigMerge cfg;
  cfg.load(config_path);
  std::string shape_text = shape_str, out_path = out;
  double hh = h;
  cfg.merge(h_opt, "h", hh);
  cfg.merge(shape_opt, "shape", shape_text);
  cfg.merge(out_opt, "out", out_path);
  if (out_path.empty()) throw CLI::ValidationError("--out", "output path is required");
  if (!(hh > 0.0 && hh < 1.0))
    throw CLI::ValidationError("--h", "target edge length must be in (0, 1)");

  TriMesh mesh;
  if (shape_text.empty()) {
    mesh = generate_disk_mesh(hh);
  } else {
    mesh = generate_disk_mesh_with_shape(hh, ShapeSpec::parse(shape_text));
  }
  write_mesh(mesh, out_path);
  std::printf("wrote %s: %d vertices, %d triangles, min angle %.1f deg\n", out_path.c_str(),
              mesh.vertex_count(), mesh.triangle_count(), mesh.min_angle_deg());
  return 0;
}

int run_simulate(const ConfigMerge& cfg, const std::string& mesh_path,
                 const std::string& shape_text, int E, double width, double eps, uint64_t seed,
                 const std::string& out) {
  const ShapeSpec shape = ShapeSpec::parse(shape_text);
  const TriMesh gen_mesh = read_mesh(mesh_path, MeshFormat::native);
  NoiseSpec noise{eps, seed};
  const Dataset ds = make_dataset(shape, gen_mesh, E, width, noise);
  write_dataset(ds, out);
  std::printf("wrote dataset %s: %d measurements, eps=%g, seed=%llu\n", out.c_str(),
              static_cast<int>(ds.clean.size()), eps, static_cast<unsigned long long>(seed));
  (void)cfg;
  return 0;
}

int run_reconstruct(const std::string& dataset_dir, const std::string& mesh_path,
                    ReconstructionConfig config, bool noise_given, const std::string& out,
                    const std::string& snapshots_text, const std::string& truth_text,
                    bool allow_inverse_crime, bool use_clean) {
  const auto t_start = std::chrono::steady_clock::now();
  const Dataset ds = read_dataset(dataset_dir);
  auto mesh = std::make_shared<const TriMesh>(read_mesh(mesh_path, MeshFormat::native));

  if (same_mesh(*mesh, ds.gen_mesh) && !allow_inverse_crime)
    throw std::runtime_error(
        "reconstruction mesh equals the generation mesh (inverse crime); pass "
        "--allow-inverse-crime to proceed");

  if (!noise_given) config.noise_level = ds.noise.level;
  config.seed = ds.noise.seed;

  std::optional<ShapeSpec> truth;
  if (truth_text == "auto")
    truth = ds.shape;
  else if (!truth_text.empty())
    truth = ShapeSpec::parse(truth_text);

  const auto patterns = make_patterns(ds.electrode_count, ds.width);
  const auto& measurements = use_clean ? ds.clean : ds.noisy;

  fs::create_directories(out);
  const std::vector<int> snapshots = parse_snapshot_list(snapshots_text);
  SnapshotObserver observer;
  if (!snapshots.empty()) {
    observer = [&](const IterationSnapshot& snap) {
      if (!std::binary_search(snapshots.begin(), snapshots.end(), snap.iter)) return;
      char tag[32];
      std::snprintf(tag, sizeof(tag), "snap_%06d", snap.iter);
      const std::string base = (fs::path(out) / tag).string();
      write_vtk(snap.q, "q", base + "_q.vtk");
      write_vtk(snap.heaviside, "H", base + "_H.vtk");
      write_vtk(snap.f, "f", base + "_f.vtk");
    };
  }

  const ReconstructionResult result =
      reconstruct(config, mesh, patterns, measurements, truth, std::nullopt, observer);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

  write_convergence_csv(result.record, (fs::path(out) / "convergence.csv").string());
  write_vtk(result.q, "q", (fs::path(out) / "q.vtk").string());
  write_vtk(result.heaviside, "H", (fs::path(out) / "H.vtk").string());
  write_vtk(result.sigma, "sigma", (fs::path(out) / "sigma.vtk").string());
  write_vtk(result.f, "f", (fs::path(out) / "f.vtk").string());
  write_vtk(result.lambda, "lambda", (fs::path(out) / "lambda.vtk").string());

  KeyValues run_meta = {
      {"M", std::to_string(patterns.size())},
      {"gamma", fmt17(config.gamma)},
      {"alpha", fmt17(config.alpha)},
      {"noise", fmt17(config.noise_level)},
      {"seed", std::to_string(ds.noise.seed)},
      {"iterations", std::to_string(result.record.iterations())},
      {"reason", to_string(result.record.reason)},
      {"J_final", fmt17(result.record.final_J())},
      {"runtime_seconds", fmt17(elapsed)},
      {"dataset", dataset_dir},
      {"recon_mesh", mesh_path},
  };
  if (!result.record.rows.empty() && result.record.rows.back().eps_err)
    run_meta.push_back({"eps_err", fmt17(*result.record.rows.back().eps_err)});
  write_keyvalues((fs::path(out) / "run.txt").string(), run_meta);

  std::printf("reconstruction finished: %s after %d iterations, J=%.6g",
              to_string(result.record.reason).c_str(), result.record.iterations(),
              result.record.final_J());
  if (!result.record.rows.empty() && result.record.rows.back().eps_err)
    std::printf(", eps_err=%.4f", *result.record.rows.back().eps_err);
  std::printf(" (%.1fs)\n", elapsed);
  return 0;
}

int run_evaluate(std::vector<std::string> dirs, const std::string& out) {
  // Deduplicate while keeping order.
  std::vector<std::string> unique_dirs;
  for (const auto& d : dirs) {
    if (std::find(unique_dirs.begin(), unique_dirs.end(), d) == unique_dirs.end())
      unique_dirs.push_back(d);
    else
      std::fprintf(stderr, "warning: duplicate result directory %s skipped\n", d.c_str());
  }

  struct Row {
    int M;
    double gamma;
    int iterations;
    double J_final;
    std::string eps_err;
  };
  std::vector<Row> rows;
  for (const auto& dir : unique_dirs) {
    const auto meta = read_keyvalues((fs::path(dir) / "run.txt").string());
    auto need = [&](const std::string& key) {
      const auto it = meta.find(key);
      if (it == meta.end())
        throw IoError("run.txt in " + dir + " is missing key '" + key + "'");
      return it->second;
    };
    Row row;
    row.M = std::stoi(need("M"));
    row.gamma = std::stod(need("gamma"));
    row.iterations = std::stoi(need("iterations"));
    row.J_final = std::stod(need("J_final"));
    row.eps_err = meta.count("eps_err") ? meta.at("eps_err") : "";
    rows.push_back(row);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.M != b.M ? a.M < b.M : a.gamma < b.gamma;
  });

  std::string csv = "M,gamma,iterations,J_final,eps_err\n";
  for (const auto& r : rows)
    csv += std::to_string(r.M) + "," + fmt17(r.gamma) + "," + std::to_string(r.iterations) + "," +
           fmt17(r.J_final) + "," + r.eps_err + "\n";
  if (out.empty())
    std::fputs(csv.c_str(), stdout);
  else
    write_text_file(out, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Piecewise constant conductivity reconstruction from boundary data"};
  app.require_subcommand(1);

  // --- mesh ---------------------------------------------------------------
  auto* mesh_cmd = app.add_subcommand("mesh", "Generate a disk mesh (optionally shape-conforming)");
  std::string mesh_config, mesh_shape, mesh_out;
  double mesh_h = 0.05;
  mesh_cmd->add_option("--config", mesh_config, "Configuration file");
  auto* h_opt = mesh_cmd->add_option("--h", mesh_h, "Target edge length in (0, 1)")
                    ->check(CLI::PositiveNumber);
  auto* shape_opt = mesh_cmd->add_option("--shape", mesh_shape,
                                         "Conforming interface: 'ellipse cx cy ax ay rot' or "
                                         "'circles cx1 cy1 r1 ...'");
  auto* mesh_out_opt = mesh_cmd->add_option("--out", mesh_out, "Output mesh path");

  // --- simulate -----------------------------------------------------------
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate boundary measurements for a phantom");
  std::string sim_config, sim_mesh, sim_shape, sim_out;
  int sim_E = 6;
  double sim_width = pi / 20.0, sim_eps = 0.01;
  uint64_t sim_seed = 1;
  sim_cmd->add_option("--config", sim_config, "Configuration file");
  auto* sim_mesh_opt = sim_cmd->add_option("--mesh", sim_mesh, "Generation mesh (native format)");
  auto* sim_shape_opt = sim_cmd->add_option("--shape", sim_shape, "Phantom shape");
  auto* sim_E_opt = sim_cmd->add_option("--E", sim_E, "Electrode count (even)");
  auto* sim_width_opt = sim_cmd->add_option("--width", sim_width, "Electrode width (radians)");
  auto* sim_eps_opt = sim_cmd->add_option("--eps", sim_eps, "Noise level")->check(CLI::NonNegativeNumber);
  auto* sim_seed_opt = sim_cmd->add_option("--seed", sim_seed, "Noise seed");
  auto* sim_out_opt = sim_cmd->add_option("--out", sim_out, "Output dataset directory");

  // --- reconstruct ----------------------------------------------------------
  auto* rec_cmd = app.add_subcommand("reconstruct", "Reconstruct the coefficient from a dataset");
  std::string rec_config, rec_data, rec_mesh, rec_out, rec_snapshots, rec_truth;
  ReconstructionConfig rc;
  bool rec_allow_crime = false, rec_use_clean = false;
  rec_cmd->add_option("--config", rec_config, "Configuration file");
  auto* rec_data_opt = rec_cmd->add_option("--data", rec_data, "Dataset directory");
  auto* rec_mesh_opt = rec_cmd->add_option("--mesh", rec_mesh, "Reconstruction mesh");
  auto* rec_out_opt = rec_cmd->add_option("--out", rec_out, "Result directory");
  auto* gamma_opt = rec_cmd->add_option("--gamma", rc.gamma, "Level-set smoothing parameter")
                        ->check(CLI::PositiveNumber);
  auto* alpha_opt = rec_cmd->add_option("--alpha", rc.alpha, "Heaviside smoothing width")
                        ->check(CLI::PositiveNumber);
  auto* beta_opt = rec_cmd->add_option("--beta", rc.stop_factor, "Stopping factor");
  auto* K_opt = rec_cmd->add_option("--K", rc.max_iters, "Maximum iterations")
                    ->check(CLI::PositiveNumber);
  auto* noise_opt = rec_cmd->add_option("--noise", rc.noise_level,
                                        "Noise level for the stopping rule (default: dataset)");
  auto* snap_opt = rec_cmd->add_option("--snapshots", rec_snapshots,
                                       "Comma-separated iterations to dump fields at");
  auto* truth_opt = rec_cmd->add_option("--truth", rec_truth,
                                        "Truth shape for the error metric ('auto' = dataset)");
  auto* crime_opt = rec_cmd->add_flag("--allow-inverse-crime", rec_allow_crime,
                                      "Allow reconstructing on the generation mesh");
  auto* clean_opt = rec_cmd->add_flag("--use-clean", rec_use_clean,
                                      "Reconstruct from clean instead of noisy data");

  // --- evaluate -------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("evaluate", "Tabulate result directories");
  std::vector<std::string> eval_dirs;
  std::string eval_out;
  eval_cmd->add_option("dirs", eval_dirs, "Result directories")->required()->expected(-1);
  eval_cmd->add_option("--out", eval_out, "Output CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    std::cerr << app.help() << "\n";
    return 2;
  }

  try {
    if (app.got_subcommand(mesh_cmd)) {
      try {
        return run_mesh(mesh_config, mesh_h, mesh_shape, mesh_out, h_opt, shape_opt, mesh_out_opt);
      } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n" << mesh_cmd->help() << "\n";
        return 2;
      } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n" << mesh_cmd->help() << "\n";
        return 2;
      }
    }
    if (app.got_subcommand(sim_cmd)) {
      ConfigMerge cfg;
      cfg.load(sim_config);
      cfg.merge(sim_mesh_opt, "gen_mesh", sim_mesh);
      cfg.merge(sim_shape_opt, "shape", sim_shape);
      cfg.merge(sim_E_opt, "E", sim_E);
      cfg.merge(sim_width_opt, "width", sim_width);
      cfg.merge(sim_eps_opt, "noise", sim_eps);
      cfg.merge(sim_seed_opt, "seed", sim_seed);
      cfg.merge(sim_out_opt, "out", sim_out);
      if (sim_mesh.empty() || sim_shape.empty() || sim_out.empty()) {
        std::cerr << "error: --mesh, --shape and --out are required\n" << sim_cmd->help() << "\n";
        return 2;
      }
      return run_simulate(cfg, sim_mesh, sim_shape, sim_E, sim_width, sim_eps, sim_seed, sim_out);
    }
    if (app.got_subcommand(rec_cmd)) {
      ConfigMerge cfg;
      cfg.load(rec_config);
      cfg.merge(rec_data_opt, "dataset", rec_data);
      cfg.merge(rec_mesh_opt, "recon_mesh", rec_mesh);
      cfg.merge(rec_out_opt, "out", rec_out);
      cfg.merge(gamma_opt, "gamma", rc.gamma);
      cfg.merge(alpha_opt, "alpha", rc.alpha);
      cfg.merge(beta_opt, "beta", rc.stop_factor);
      cfg.merge(K_opt, "K", rc.max_iters);
      cfg.merge(noise_opt, "noise", rc.noise_level);
      cfg.merge(snap_opt, "snapshots", rec_snapshots);
      cfg.merge(truth_opt, "truth", rec_truth);
      cfg.merge(crime_opt, "allow_inverse_crime", rec_allow_crime);
      cfg.merge(clean_opt, "use_clean", rec_use_clean);
      if (cfg.file.count("ls_shrink")) rc.line_search.shrink = std::stod(cfg.file.at("ls_shrink"));
      if (cfg.file.count("ls_armijo_c"))
        rc.line_search.armijo_c = std::stod(cfg.file.at("ls_armijo_c"));
      if (cfg.file.count("ls_max_backtracks"))
        rc.line_search.max_backtracks = std::stoi(cfg.file.at("ls_max_backtracks"));
      if (cfg.file.count("ls_growth")) rc.line_search.growth = std::stod(cfg.file.at("ls_growth"));
      if (cfg.file.count("solver_tol")) rc.solver.tol = std::stod(cfg.file.at("solver_tol"));
      if (cfg.file.count("solver_max_iter"))
        rc.solver.max_iter = std::stoi(cfg.file.at("solver_max_iter"));
      if (cfg.file.count("direct_threshold"))
        rc.solver.direct_threshold = std::stoi(cfg.file.at("direct_threshold"));
      if (rec_data.empty() || rec_mesh.empty() || rec_out.empty()) {
        std::cerr << "error: --data, --mesh and --out are required\n" << rec_cmd->help() << "\n";
        return 2;
      }
      const bool noise_given = noise_opt->count() > 0 || cfg.file.count("noise");
      return run_reconstruct(rec_data, rec_mesh, rc, noise_given, rec_out, rec_snapshots,
                             rec_truth, rec_allow_crime, rec_use_clean);
    }
    if (app.got_subcommand(eval_cmd)) {
      return run_evaluate(eval_dirs, eval_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
