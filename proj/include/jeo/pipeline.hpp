#pragma once

#include <functional>
#include <string>
#include <vector>

#include "jeo/image_solver.hpp"

namespace jeo {

enum class ParamStrategy : uint8_t { Shared = 0, NonShared = 1 };

const char* strategy_name(ParamStrategy s);
ParamStrategy strategy_from_name(const std::string& name);

/// One set of stage trainables: raw (unconstrained) scalars mapped through
/// positive_param, plus the two proximal modules.
struct StageParams {
  double raw_rho = 0.0;
  double raw_alpha = 0.0;
  double raw_beta = 0.0;
  double raw_s = 0.0;
  ProximalModule ern;  // 3 channels
  ProximalModule idn;  // 2 channels
};

/// K-stage plan. Shared strategy keeps exactly one StageParams referenced
/// by every stage; non-shared keeps K independent sets.
struct StagePlan {
  int stages = 1;
  ParamStrategy strategy = ParamStrategy::NonShared;
  std::vector<StageParams> params;

  int param_sets() const { return static_cast<int>(params.size()); }
  StageParams& stage(int k) { return params[strategy == ParamStrategy::Shared ? 0 : k]; }
  const StageParams& stage(int k) const {
    return params[strategy == ParamStrategy::Shared ? 0 : k];
  }

  void validate() const;

  /// Fresh plan with default scalar values (s = 1, alpha = 1,
  /// rho = beta = 0.05) and seeded module weights.
  static StagePlan make(int stages, ParamStrategy strategy, ProxKind ern_kind, ProxKind idn_kind,
                        uint64_t seed, double shrink_threshold = 0.05);
};

struct PipelineState {
  ComplexImage x;
  NonEdgeMap pne;
  int stage_index = 0;
};

/// Runs Algorithm 1: x0 = zero-filled init, P0 = init_nonedge_map(x0),
/// then per stage ERN -> EO -> IDN -> IO. The optional trace records the
/// state after every stage (index 0 holds the initialization).
PipelineState run_pipeline(const CoilSystem& cs, const StagePlan& plan,
                           std::vector<PipelineState>* trace = nullptr);

/// No-edge ablation: per stage IDN -> no-edge IO; P_ne stays at its init.
PipelineState run_pipeline_noedge(const CoilSystem& cs, const StagePlan& plan,
                                  std::vector<PipelineState>* trace = nullptr);

/// gamma1 * mean |x - gt|^2 + gamma2 * mean |P - gt_pne| over channels.
double total_loss(const PipelineState& final_state, const ComplexImage& gt_x,
                  const NonEdgeMap& gt_pne, double gamma1, double gamma2);

/// lr0 * 0.5 * (1 + cos(pi * epoch / epochs))
double cosine_lr(double lr0, int epoch, int epochs);

struct TrainOptions {
  int epochs = 180;
  int batch_size = 2;
  double lr0 = 0.01;
  double gamma1 = 1.0;
  double gamma2 = 0.1;
  uint64_t seed = 0;
  bool edge = true;  // false trains the no-edge ablation pipeline
  int threads = 1;
  std::function<void(int epoch, double lr, double loss)> on_epoch;
};

struct TrainResult {
  std::vector<double> loss_history;  // mean training loss per epoch
  std::vector<double> lr_history;
};

/// Thrown when the training loss stops being finite.
struct TrainingDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Adam (beta1 0.9, beta2 0.999, eps 1e-8) over every trainable in the
/// plan, cosine-decayed learning rate, deterministic in opt.seed.
TrainResult train(const Dataset& ds, StagePlan& plan, const TrainOptions& opt);

/// Pointers to every trainable scalar in deterministic order (raw scalars,
/// then ERN arrays, then IDN arrays, per param set).
std::vector<double*> trainable_refs(StagePlan& plan);

/// Total loss of one acquisition under the plan; when grads is non-null it
/// receives d(loss)/d(trainable) in trainable_refs order. The building
/// block behind train().
double sample_loss_grad(const CoilSystem& cs, const ComplexImage& gt, const NonEdgeMap& gt_pne,
                        const StagePlan& plan, bool edge, double gamma1, double gamma2,
                        std::vector<double>* grads);

void save_checkpoint(const std::string& path, const StagePlan& plan);
StagePlan load_checkpoint(const std::string& path);

}  // namespace jeo
