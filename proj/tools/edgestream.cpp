#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "edgestream/harness.hpp"
#include "edgestream/io.hpp"
#include "edgestream/recon.hpp"
#include "edgestream/refine.hpp"
#include "edgestream/verify.hpp"

using namespace edgestream;
namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string frame_path(const std::string& dir, const std::string& stem, int j) {
  return dir + "/" + stem + "_" + std::to_string(j) + ".bin";
}

nlohmann::json scene_doc(const std::string& preset, const std::string& scene_file, int n, int J, int dims) {
  nlohmann::json doc;
  if (!scene_file.empty()) {
    doc = read_json(scene_file);
  } else if (!preset.empty()) {
    doc = ExperimentConfig::preset_named(preset).scene;
  } else {
    doc = {{"kind", dims == 1 ? "example41" : "phantom2d"}};
  }
  if (n > 0) doc["n"] = n;
  if (J > 0) doc["J"] = J;
  if (!doc.contains("n")) doc["n"] = dims == 1 ? 128 : 64;
  if (!doc.contains("J")) doc["J"] = dims == 1 ? 6 : 4;
  return doc;
}

int cmd_generate(const nlohmann::json& doc, const std::string& out) {
  const SceneSequence seq = scene_from_json(doc);
  for (int j = 1; j <= seq.J; ++j) {
    write_raw(frame_path(out, "frame", j), seq.frames[j - 1], {{"frame", j}, {"dims", seq.dims}});
    write_raw(frame_path(out, "truth_edges", j), seq.edges[j - 1], {{"frame", j}, {"dims", seq.dims}});
    if (seq.dims == 2) write_pgm(out + "/frame_" + std::to_string(j) + ".pgm", seq.frames[j - 1]);
  }
  write_json(out + "/scene.json", doc);
  std::cout << "wrote " << seq.J << " frames to " << out << '\n';
  return 0;
}

int cmd_sample(const std::string& in, const std::string& out, std::optional<double> sigma2,
               std::optional<double> snr, std::uint64_t seed) {
  if (!sigma2 && !snr) throw UsageError("sample needs --sigma2 or --snr-db");
  const SceneSequence seq = scene_from_json(read_json(in + "/scene.json"));
  ExperimentConfig cfg;
  cfg.dims = seq.dims;
  cfg.sigma2 = sigma2;
  cfg.snr_db = snr;
  const SimulatedData d = simulate(seq, cfg, seed);
  for (int j = 1; j <= seq.J; ++j) write_measurement(frame_path(out, "meas", j), d.meas[j - 1]);
  write_json(out + "/scene.json", read_json(in + "/scene.json"));
  std::cout << "wrote " << seq.J << " measurements to " << out << '\n';
  return 0;
}

std::vector<SpectralMeasurement> read_measurements(const std::string& dir) {
  std::vector<SpectralMeasurement> out;
  for (int j = 1; fs::exists(frame_path(dir, "meas", j)); ++j) out.push_back(read_measurement(frame_path(dir, "meas", j)));
  if (out.empty()) throw std::runtime_error("no measurements in " + dir);
  return out;
}

int cmd_edges(const std::string& in, const std::string& out) {
  const auto meas = read_measurements(in);
  std::vector<Eigen::MatrixXd> edges;
  double noise_var = 0;
  for (const auto& m : meas) {
    edges.push_back(cf_edges(m));
    write_raw(frame_path(out, "cf", m.frame), edges.back(), {{"frame", m.frame}});
    if (m.dims == 1) noise_var += edge_noise_variance(m.mask, m.n, m.sigma2) / static_cast<double>(meas.size());
  }
  const int J = static_cast<int>(meas.size());
  nlohmann::json meta = {{"layout", "location-major"}, {"J", J}, {"n", meas[0].n}, {"dims", meas[0].dims}};
  if (meas[0].dims == 1) meta["edge_noise_variance"] = noise_var;
  write_raw(out + "/Y.bin", Eigen::MatrixXd(stack_measurements(edges)), meta);
  std::cout << "wrote concentration-factor edges for " << J << " frames to " << out << '\n';
  return 0;
}

int cmd_solve(const std::string& in, const std::string& out, const std::string& algorithm, RefineOptions opts,
              std::optional<double> beta) {
  const Eigen::VectorXd Y = read_raw_real(in + "/Y.bin");
  const auto meta = read_sidecar(in + "/Y.bin");
  const int J = meta.at("J"), n = meta.at("n"), dims = meta.at("dims");
  SolverResult res;
  nlohmann::json summary = {{"algorithm", algorithm}, {"variant", to_string(opts.variant)}, {"vartheta", opts.vartheta}};
  if (algorithm == "jhbl") {
    res = run_jhbl(Y, J, opts);
  } else if (algorithm == "jhbl-fixed-beta") {
    if (!beta && !meta.contains("edge_noise_variance")) throw UsageError("jhbl-fixed-beta needs --beta");
    opts.fixed_beta = beta ? *beta : 1.0 / meta.at("edge_noise_variance").get<double>();
    summary["fixed_beta"] = *opts.fixed_beta;
    res = run_jhbl(Y, J, opts);
  } else if (algorithm == "jhbl-refined") {
    res = run_refined_jhbl(Y, J, opts);
  } else if (algorithm == "jhbl-refined-2d") {
    summary["variant2d"] = to_string(opts.variant2d);
    const RefinedResult r = run_refined_jhbl_2d(Y, J, opts);
    summary["block_solves"] = r.block_solves;
    res = r;
  } else {
    throw UsageError("unknown algorithm " + algorithm);
  }
  const auto frames = unstack_measurements(res.x, J, n, dims == 1 ? 1 : n);
  for (int j = 1; j <= J; ++j) {
    write_raw(frame_path(out, "x", j), frames[j - 1], {{"frame", j}});
    if (dims == 2) write_pgm(out + "/x_" + std::to_string(j) + ".pgm", frames[j - 1].cwiseAbs());
  }
  write_raw(out + "/X.bin", Eigen::MatrixXd(res.x), {{"layout", "location-major"}, {"J", J}, {"n", n}, {"dims", dims}});
  summary["iterations"] = res.iterations;
  summary["converged"] = res.converged;
  summary["beta"] = res.state.beta;
  for (const auto& t : res.trace)
    summary["trace"].push_back({{"iteration", t.iteration}, {"objective", t.objective}, {"change", t.change}});
  write_json(out + "/solve.json", summary);
  std::cout << algorithm << ": " << res.iterations << " iterations, converged=" << std::boolalpha << res.converged
            << '\n';
  return 0;
}

int cmd_recon(const std::string& meas_dir, const std::string& edges_dir, const std::string& out,
              const AdmmOptions& opts, std::optional<double> lambda) {
  const auto meas = read_measurements(meas_dir);
  for (const auto& m : meas) {
    if (m.dims != 2) throw UsageError("recon works on 2D measurements");
    AdmmResult r;
    if (edges_dir.empty()) {
      r = cs_l1(m, lambda.value_or(default_cs_lambda(m)), opts);
    } else {
      r = admm_weighted_l1(m, weights_from_edges(read_raw_real(frame_path(edges_dir, "x", m.frame))), opts);
    }
    write_raw(frame_path(out, "recon", m.frame), r.f, {{"frame", m.frame}, {"iterations", r.iterations},
                                                      {"converged", r.converged}});
    write_pgm(out + "/recon_" + std::to_string(m.frame) + ".pgm", r.f);
    std::cout << "frame " << m.frame << ": " << r.iterations << " ADMM iterations, converged=" << std::boolalpha
              << r.converged << '\n';
  }
  return 0;
}

int cmd_verify() {
  bool ok = true;
  for (const auto& c : run_verification()) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    ok = ok && c.passed;
  }
  return ok ? 0 : 3;
}

// Pulls "--config file.json" out of the arguments. Scalar keys become flags
// that the command line can still override; the whole document is returned
// so experiment can read nested settings.
nlohmann::json expand_config(std::vector<std::string>& args) {
  auto it = std::find(args.begin(), args.end(), "--config");
  if (it == args.end()) return nullptr;
  if (std::next(it) == args.end()) throw UsageError("--config needs a file");
  const nlohmann::json doc = read_json(*std::next(it));
  if (!doc.is_object()) throw UsageError("config file must hold a JSON object");
  args.erase(it, it + 2);
  if (args.empty()) throw UsageError("a subcommand is required");
  std::vector<std::string> extra;
  for (const auto& [key, value] : doc.items()) {
    std::string name = key == "maxIters" ? "max-iters" : key == "fixedBeta" ? "beta" : key;
    std::replace(name.begin(), name.end(), '_', '-');
    const std::string flag = "--" + name;
    if (std::find(args.begin(), args.end(), flag) != args.end()) continue;
    if (value.is_string()) {
      extra.insert(extra.end(), {flag, value.get<std::string>()});
    } else if (value.is_number()) {
      extra.insert(extra.end(), {flag, value.dump()});
    } else if (value.is_array() && key == "seeds") {
      for (const auto& v : value) extra.insert(extra.end(), {"--seed", v.dump()});
    }
  }
  if (args.front() == "experiment") {
    std::vector<std::string> kept;
    for (size_t k = 0; k + 1 < extra.size(); k += 2)
      if (extra[k] == "--preset" || extra[k] == "--seed" || extra[k] == "--out" || extra[k] == "--threads" ||
          extra[k] == "--vartheta")
        kept.insert(kept.end(), {extra[k], extra[k + 1]});
    extra = kept;
  }
  args.insert(args.begin() + 1, extra.begin(), extra.end());
  return doc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential edge detection from under-sampled Fourier data"};
  app.require_subcommand(1);

  std::string preset, scene_file, in, out, edges_dir, algorithm = "jhbl-refined", variant = "reciprocal",
                                                      variant2d = "restored";
  int n = 0, J = 0, dims = 1, threads = 0, max_iters = 1000;
  double tol = 1e-4, vartheta = 0.05;
  std::optional<double> sigma2, snr, beta, lambda;
  std::uint64_t seed = 1;
  std::vector<std::uint64_t> seeds;
  AdmmOptions admm;

  auto* gen = app.add_subcommand("generate", "Write a scene sequence and its true edges");
  gen->add_option("--preset", preset, "Take the scene from a preset");
  gen->add_option("--scene", scene_file, "Scene description (JSON)");
  gen->add_option("--n", n, "Grid size");
  gen->add_option("--J", J, "Number of frames");
  gen->add_option("--dims", dims, "1 or 2 when no scene is given")->check(CLI::IsMember({1, 2}));
  gen->add_option("--out", out, "Output directory")->required();

  auto* smp = app.add_subcommand("sample", "Draw noisy band-limited Fourier data for a generated scene");
  smp->add_option("--in", in, "Directory written by generate")->required();
  smp->add_option("--out", out, "Output directory")->required();
  smp->add_option("--sigma2", sigma2, "Image-domain noise variance");
  smp->add_option("--snr-db", snr, "Per-frame SNR in dB");
  smp->add_option("--seed", seed, "Random seed");

  auto* edg = app.add_subcommand("edges", "Concentration-factor edge estimates of sampled data");
  edg->add_option("--in", in, "Directory written by sample")->required();
  edg->add_option("--out", out, "Output directory")->required();

  auto* sol = app.add_subcommand("solve", "Joint hierarchical Bayesian edge recovery");
  sol->add_option("--in", in, "Directory written by edges")->required();
  sol->add_option("--out", out, "Output directory")->required();
  sol->add_option("--algorithm", algorithm, "jhbl, jhbl-fixed-beta, jhbl-refined or jhbl-refined-2d")
      ->check(CLI::IsMember({"jhbl", "jhbl-fixed-beta", "jhbl-refined", "jhbl-refined-2d"}));
  sol->add_option("--vartheta", vartheta, "Threshold for the change set")->check(CLI::Range(0.0, 1.0));
  sol->add_option("--variant", variant, "as-printed, stabilized or reciprocal");
  sol->add_option("--variant2d", variant2d, "as-printed, reciprocal or restored");
  sol->add_option("--beta", beta, "Noise precision for jhbl-fixed-beta");
  sol->add_option("--max-iters", max_iters, "Iteration cap");
  sol->add_option("--tol", tol, "Relative change tolerance");

  auto* rec = app.add_subcommand("recon", "Weighted l1 image recovery by ADMM");
  rec->add_option("--meas", in, "Directory written by sample")->required();
  rec->add_option("--edges", edges_dir, "Directory written by solve; omit for plain l1");
  rec->add_option("--out", out, "Output directory")->required();
  rec->add_option("--lambda", lambda, "Uniform weight when --edges is omitted");
  rec->add_option("--rho", admm.rho, "ADMM penalty");
  rec->add_option("--admm-iters", admm.max_iters, "ADMM iteration cap");

  auto* exp = app.add_subcommand("experiment", "Run a full experiment and write a report");
  exp->add_option("--preset", preset, "fig2-1d, fig4-mri-style or fig6-scene")->required();
  exp->add_option("--seed", seeds, "One or more seeds");
  exp->add_option("--out", out, "Output directory (default $EDGESTREAM_OUT or ./out)");
  exp->add_option("--threads", threads, "Worker threads for seeds");
  exp->add_option("--vartheta", vartheta, "Override the preset threshold");

  auto* ver = app.add_subcommand("verify", "Run the numerical self-checks");

  std::vector<std::string> args(argv + 1, argv + argc);
  nlohmann::json config;
  try {
    config = expand_config(args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*gen) return cmd_generate(scene_doc(preset, scene_file, n, J, dims), out);
    if (*smp) return cmd_sample(in, out, sigma2, snr, seed);
    if (*edg) return cmd_edges(in, out);
    if (*sol) {
      RefineOptions opts;
      opts.variant = parse_variant(variant);
      opts.variant2d = parse_variant_2d(variant2d);
      opts.vartheta = vartheta;
      opts.max_iters = max_iters;
      opts.tol = tol;
      return cmd_solve(in, out, algorithm, opts, beta);
    }
    if (*rec) return cmd_recon(in, edges_dir, out, admm, lambda);
    if (*exp) {
      nlohmann::json base = config.is_object() ? config : nlohmann::json::object();
      base["preset"] = preset;
      ExperimentConfig cfg = ExperimentConfig::from_json(base);
      if (!seeds.empty()) cfg.seeds = seeds;
      if (exp->count("--vartheta")) cfg.vartheta = vartheta;
      cfg.threads = threads;
      if (out.empty()) {
        const char* env = std::getenv("EDGESTREAM_OUT");
        out = env ? env : "out";
      }
      cfg.out_dir = out;
      const auto report = run_experiment(cfg);
      std::cout << report.at("summary").dump(2) << '\n' << "report written to " << out << "/report.json\n";
      return 0;
    }
    if (*ver) return cmd_verify();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const SolverDivergence& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
