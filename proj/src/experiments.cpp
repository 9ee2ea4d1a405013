#include "jeo/experiments.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "jeo/rng.hpp"

namespace jeo {

namespace {

int default_acs(const DataSpec& spec) {
  return spec.acs_lines >= 0 ? spec.acs_lines : spec.width / 16;
}

void run_jobs(int n, int workers, const std::function<void(int)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < std::min(workers, n); ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

Dataset generate_dataset(const DataSpec& spec) {
  if (spec.n_samples < 1) throw std::invalid_argument("generate_dataset: need >= 1 samples");
  Dataset ds;
  ds.samples.reserve(spec.n_samples);
  const int acs = default_acs(spec);
  for (int i = 0; i < spec.n_samples; ++i) {
    Sample s;
    s.gt = make_phantom(spec.height, spec.width, derive_seed(spec.seed, i, 1));
    const SamplingMask mask = make_mask(spec.scheme, spec.height, spec.width, spec.acceleration,
                                        acs, derive_seed(spec.seed, i, 2));
    s.cs = synthesize_acquisition(s.gt, spec.coils, mask, spec.noise_std,
                                  derive_seed(spec.seed, i, 3));
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

EvalResult evaluate(const Dataset& test_ds, const StagePlan& plan, bool edge, int threads) {
  const int n = static_cast<int>(test_ds.samples.size());
  if (n == 0) throw std::invalid_argument("evaluate: empty test set");
  struct Row {
    double psnr, ssim, mse, zfp, zfs, zfm;
  };
  std::vector<Row> rows(n);
  run_jobs(n, threads, [&](int i) {
    const Sample& s = test_ds.samples[i];
    const PipelineState st =
        edge ? run_pipeline(s.cs, plan) : run_pipeline_noedge(s.cs, plan);
    const RealImage gt_mag = magnitude(s.gt);
    const RealImage rec_mag = magnitude(st.x);
    const RealImage zf_mag = magnitude(zero_filled_init(s.cs));
    const RealImage err = error_map(rec_mag, gt_mag);
    double mse = 0.0;
    for (double v : err.data) mse += v * v;
    mse /= static_cast<double>(err.data.size());
    double zfm = 0.0;
    for (size_t k = 0; k < zf_mag.data.size(); ++k) {
      const double d = zf_mag.data[k] - gt_mag.data[k];
      zfm += d * d;
    }
    zfm /= static_cast<double>(zf_mag.data.size());
    rows[i] = {psnr(rec_mag, gt_mag), ssim(rec_mag, gt_mag), mse,
               psnr(zf_mag, gt_mag),  ssim(zf_mag, gt_mag),  zfm};
  });
  EvalResult out;
  for (const Row& r : rows) {
    out.mean_psnr += r.psnr;
    out.mean_ssim += r.ssim;
    out.mean_mse += r.mse;
    out.zf_psnr += r.zfp;
    out.zf_ssim += r.zfs;
    out.zf_mse += r.zfm;
  }
  out.mean_psnr /= n;
  out.mean_ssim /= n;
  out.mean_mse /= n;
  out.zf_psnr /= n;
  out.zf_ssim /= n;
  out.zf_mse /= n;
  return out;
}

TrainedEval train_and_eval(const Dataset& train_ds, const Dataset& test_ds, const PlanSpec& ps,
                           bool edge, const ExperimentBudget& budget) {
  TrainedEval out;
  out.plan = StagePlan::make(ps.stages, ps.strategy, ps.ern_kind, ps.idn_kind, ps.seed);
  TrainOptions opt;
  opt.epochs = budget.epochs;
  opt.batch_size = budget.batch_size;
  opt.lr0 = budget.lr0;
  opt.gamma1 = budget.gamma1;
  opt.gamma2 = budget.gamma2;
  opt.seed = ps.seed;
  opt.edge = edge;
  opt.threads = budget.threads;
  out.log = train(train_ds, out.plan, opt);
  out.eval = evaluate(test_ds, out.plan, edge, budget.threads);
  return out;
}

EdgeAblationRow run_edge_cell(const DataSpec& base, const PlanSpec& ps,
                              const ExperimentBudget& budget, double acceleration, bool edge) {
  DataSpec spec = base;
  spec.acceleration = acceleration;
  const Dataset train_ds = generate_dataset(spec);
  DataSpec test_spec = spec;
  test_spec.seed = derive_seed(spec.seed, 0, 0x74657374ULL);
  test_spec.n_samples = std::max(8, spec.n_samples / 4);
  const Dataset test_ds = generate_dataset(test_spec);
  ExperimentBudget run_budget = budget;
  run_budget.workers = 1;
  const TrainedEval te = train_and_eval(train_ds, test_ds, ps, edge, run_budget);
  return {acceleration, edge, te.eval.mean_psnr, te.eval.mean_ssim, te.eval.zf_psnr};
}

std::vector<EdgeAblationRow> run_edge_ablation(const DataSpec& base, const PlanSpec& ps,
                                               const ExperimentBudget& budget,
                                               const std::vector<double>& accelerations) {
  struct Job {
    double R;
    bool edge;
  };
  std::vector<Job> jobs;
  for (double R : accelerations)
    for (bool edge : {true, false}) jobs.push_back({R, edge});

  std::vector<EdgeAblationRow> rows(jobs.size());
  run_jobs(static_cast<int>(jobs.size()), budget.workers, [&](int j) {
    rows[j] = run_edge_cell(base, ps, budget, jobs[j].R, jobs[j].edge);
  });
  return rows;
}

std::vector<ModuleAblationRow> run_module_ablation(const DataSpec& data, const PlanSpec& ps,
                                                   const ExperimentBudget& budget) {
  const Dataset train_ds = generate_dataset(data);
  DataSpec test_spec = data;
  test_spec.seed = derive_seed(data.seed, 0, 0x74657374ULL);
  test_spec.n_samples = std::max(8, data.n_samples / 4);
  const Dataset test_ds = generate_dataset(test_spec);

  struct Job {
    bool idn_on, ern_on;
  };
  const std::vector<Job> jobs = {{false, false}, {false, true}, {true, false}, {true, true}};
  std::vector<ModuleAblationRow> rows(jobs.size());
  ExperimentBudget run_budget = budget;
  run_budget.workers = 1;
  run_jobs(static_cast<int>(jobs.size()), budget.workers, [&](int j) {
    PlanSpec cfg = ps;
    cfg.ern_kind = jobs[j].ern_on ? ps.ern_kind : ProxKind::Identity;
    cfg.idn_kind = jobs[j].idn_on ? ps.idn_kind : ProxKind::Identity;
    const TrainedEval te = train_and_eval(train_ds, test_ds, cfg, true, run_budget);
    rows[j] = {jobs[j].idn_on, jobs[j].ern_on, te.eval.mean_psnr, te.eval.mean_ssim};
  });
  return rows;
}

std::vector<StrategyRow> run_strategy_study(const DataSpec& data, const PlanSpec& ps,
                                            const ExperimentBudget& budget,
                                            const std::vector<int>& stage_counts) {
  const Dataset train_ds = generate_dataset(data);
  DataSpec test_spec = data;
  test_spec.seed = derive_seed(data.seed, 0, 0x74657374ULL);
  test_spec.n_samples = std::max(8, data.n_samples / 4);
  const Dataset test_ds = generate_dataset(test_spec);

  struct Job {
    int stages;
    ParamStrategy strategy;
  };
  std::vector<Job> jobs;
  for (int k : stage_counts)
    for (ParamStrategy st : {ParamStrategy::Shared, ParamStrategy::NonShared})
      jobs.push_back({k, st});
  std::vector<StrategyRow> rows(jobs.size());
  ExperimentBudget run_budget = budget;
  run_budget.workers = 1;
  run_jobs(static_cast<int>(jobs.size()), budget.workers, [&](int j) {
    PlanSpec cfg = ps;
    cfg.stages = jobs[j].stages;
    cfg.strategy = jobs[j].strategy;
    const TrainedEval te = train_and_eval(train_ds, test_ds, cfg, true, run_budget);
    rows[j] = {jobs[j].stages, jobs[j].strategy, te.eval.mean_psnr, te.eval.mean_ssim};
  });
  return rows;
}

}  // namespace jeo
