#pragma once

#include "jeo/metrics.hpp"
#include "jeo/pipeline.hpp"

namespace jeo {

/// Everything cmd_generate needs to build one dataset.
struct DataSpec {
  int n_samples = 40;
  int height = 64;
  int width = 64;
  int coils = 4;
  MaskScheme scheme = MaskScheme::RandomPointwise;
  double acceleration = 4.0;
  int acs_lines = -1;  // -1: default width/16
  double noise_std = 0.01;
  uint64_t seed = 1;
};

/// Randomized phantoms + per-sample masks + synthesized acquisitions,
/// deterministic in spec.seed.
Dataset generate_dataset(const DataSpec& spec);

struct PlanSpec {
  int stages = 5;
  ParamStrategy strategy = ParamStrategy::NonShared;
  ProxKind ern_kind = ProxKind::TinyCnn;
  ProxKind idn_kind = ProxKind::TinyCnn;
  uint64_t seed = 1;
};

struct ExperimentBudget {
  int epochs = 150;
  int batch_size = 2;
  double lr0 = 0.01;
  double gamma1 = 1.0;
  double gamma2 = 0.1;
  int threads = 1;  // threads inside one training run
  int workers = 1;  // concurrent training runs in a study
};

struct EvalResult {
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  double mean_mse = 0.0;
  double zf_psnr = 0.0;  // zero-filled baseline on the same samples
  double zf_ssim = 0.0;
  double zf_mse = 0.0;
};

/// Mean magnitude-image metrics of the (joint-edge or no-edge) pipeline
/// over a test set, plus the zero-filled baseline.
EvalResult evaluate(const Dataset& test_ds, const StagePlan& plan, bool edge, int threads = 1);

struct TrainedEval {
  StagePlan plan;
  EvalResult eval;
  TrainResult log;
};

TrainedEval train_and_eval(const Dataset& train_ds, const Dataset& test_ds, const PlanSpec& ps,
                           bool edge, const ExperimentBudget& budget);

// ----- ablation studies ------------------------------------------------

struct EdgeAblationRow {
  double acceleration = 0.0;
  bool edge = false;
  double psnr = 0.0, ssim = 0.0, zf_psnr = 0.0;
};

/// One cell of the edge study: generate train/test sets at the given
/// acceleration (seeds derived from base.seed), train, evaluate.
EdgeAblationRow run_edge_cell(const DataSpec& base, const PlanSpec& ps,
                              const ExperimentBudget& budget, double acceleration, bool edge);

/// Joint-edge vs no-edge under one budget across acceleration factors.
std::vector<EdgeAblationRow> run_edge_ablation(const DataSpec& base, const PlanSpec& ps,
                                               const ExperimentBudget& budget,
                                               const std::vector<double>& accelerations);

struct ModuleAblationRow {
  bool idn_on = false, ern_on = false;
  double psnr = 0.0, ssim = 0.0;
};

/// The 2x2 {IDN on/off} x {ERN on/off} grid; "off" swaps in the identity
/// module, keeping the update structure intact.
std::vector<ModuleAblationRow> run_module_ablation(const DataSpec& data, const PlanSpec& ps,
                                                   const ExperimentBudget& budget);

struct StrategyRow {
  int stages = 0;
  ParamStrategy strategy = ParamStrategy::NonShared;
  double psnr = 0.0, ssim = 0.0;
};

/// Shared vs non-shared parameter sets across stage counts.
std::vector<StrategyRow> run_strategy_study(const DataSpec& data, const PlanSpec& ps,
                                            const ExperimentBudget& budget,
                                            const std::vector<int>& stage_counts);

}  // namespace jeo
