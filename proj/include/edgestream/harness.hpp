#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "edgestream/recon.hpp"
#include "edgestream/refine.hpp"
#include "edgestream/scene.hpp"
#include "edgestream/spectral.hpp"

namespace edgestream {

double snr_db(const Eigen::MatrixXd& frame, double sigma2);

struct FrameMetrics {
  int detected = 0;
  int true_count = 0;
  int false_positives = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;

  nlohmann::json to_json() const;
};

// 1D: a true jump counts as found when a local maximum of |est| within r
// points reaches level * |jump|; spurious maxima above level * max|jump|
// farther than r from every jump are false positives.
FrameMetrics support_metrics(const Eigen::VectorXd& est, const Eigen::VectorXd& truth, int r = 1,
                             double level = 0.5);
// 2D: a true edge pixel counts as found when some pixel within Chebyshev
// radius r reaches level times its value. Precision is the share of pixels
// above level * max(truth) lying within r of a true edge.
FrameMetrics support_metrics_2d(const Eigen::MatrixXd& est, const Eigen::MatrixXd& truth, int r = 1,
                                double level = 0.25);

// Grid indices of jumps that do not sit at the same place in every frame.
std::vector<std::vector<int>> moving_jump_indices(const SceneSequence& seq);

struct ExperimentConfig {
  std::string preset = "custom";
  int dims = 1;
  int n = 128;
  int J = 6;
  std::optional<double> sigma2;
  std::optional<double> snr_db;
  std::vector<std::uint64_t> seeds{1};
  double vartheta = 0.05;
  UpdateVariant variant = UpdateVariant::Reciprocal;
  Diag2DVariant variant2d = Diag2DVariant::Restored;
  int max_iters = 1000;
  double tol = 1e-4;
  bool recon = false;
  std::optional<double> cs_lambda;
  AdmmOptions admm;
  int radius = 1;
  double level = 0.5;
  nlohmann::json scene;
  std::string out_dir;
  int threads = 0;

  static ExperimentConfig preset_named(const std::string& name);
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  SceneSequence build_scene() const;
};

struct SimulatedData {
  std::vector<SpectralMeasurement> meas;
  std::vector<Eigen::MatrixXd> edges;
  Eigen::VectorXd Y;
  std::vector<double> sigma2;
};

// 1D frames use exact continuous coefficients; 2D frames use the DFT of the pixels.
SimulatedData simulate(const SceneSequence& seq, const ExperimentConfig& cfg, std::uint64_t seed);

nlohmann::json run_replicate(const ExperimentConfig& cfg, const SceneSequence& seq, std::uint64_t seed,
                             const std::string& dir);
nlohmann::json run_experiment(const ExperimentConfig& cfg);

}  // namespace edgestream
