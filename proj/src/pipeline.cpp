#include "jeo/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>
#include <thread>

#include "jeo/io_util.hpp"
#include "jeo/rng.hpp"

namespace jeo {

const char* strategy_name(ParamStrategy s) {
  return s == ParamStrategy::Shared ? "shared" : "non-shared";
}

ParamStrategy strategy_from_name(const std::string& name) {
  if (name == "shared") return ParamStrategy::Shared;
  if (name == "non-shared") return ParamStrategy::NonShared;
  throw std::invalid_argument("unknown parameter strategy: " + name);
}

void StagePlan::validate() const {
  if (stages < 0) throw std::invalid_argument("StagePlan: negative stage count");
  if (strategy == ParamStrategy::Shared) {
    if (params.size() != 1)
      throw std::invalid_argument("StagePlan: shared strategy needs exactly one parameter set");
  } else if (stages >= 1 && static_cast<int>(params.size()) != stages) {
    throw std::invalid_argument("StagePlan: non-shared strategy needs one parameter set per stage");
  }
  for (const auto& p : params) {
    if (p.ern.channels != 3) throw std::invalid_argument("StagePlan: ERN must have 3 channels");
    if (p.idn.channels != 2) throw std::invalid_argument("StagePlan: IDN must have 2 channels");
  }
}

StagePlan StagePlan::make(int stages, ParamStrategy strategy, ProxKind ern_kind, ProxKind idn_kind,
                          uint64_t seed, double shrink_threshold) {
  StagePlan plan;
  plan.stages = stages;
  plan.strategy = strategy;
  const int sets = strategy == ParamStrategy::Shared ? 1 : std::max(1, stages);
  const auto module = [&](ProxKind kind, int channels, uint64_t s) {
    switch (kind) {
      case ProxKind::Identity: return ProximalModule::identity(channels);
      case ProxKind::ClassicalShrinkage: return ProximalModule::shrinkage(channels, shrink_threshold);
      case ProxKind::TinyCnn: return ProximalModule::tiny_cnn(channels, s);
    }
    throw std::logic_error("bad prox kind");
  };
  for (int i = 0; i < sets; ++i) {
    StageParams p;
    p.raw_rho = inverse_positive_param(0.05);
    p.raw_alpha = inverse_positive_param(1.0);
    p.raw_beta = inverse_positive_param(0.05);
    p.raw_s = inverse_positive_param(1.0);
    p.ern = module(ern_kind, 3, seed + 0x1000ULL * i + 1);
    p.idn = module(idn_kind, 2, seed + 0x1000ULL * i + 2);
    plan.params.push_back(std::move(p));
  }
  if (stages == 0 && strategy == ParamStrategy::NonShared) plan.params.resize(1);
  return plan;
}

namespace {

struct SetLeaves {
  int raw_rho = -1, raw_alpha = -1, raw_beta = -1, raw_s = -1;
  int rho = -1, alpha = -1, beta = -1, s = -1;  // softplus-mapped nodes
  std::vector<int> ern, idn;
};

struct PlanLeaves {
  std::vector<SetLeaves> sets;
};

PlanLeaves register_plan(Tape& t, const StagePlan& plan) {
  PlanLeaves out;
  for (const auto& p : plan.params) {
    SetLeaves sl;
    sl.raw_rho = t.leaf(Tensor::scalar(p.raw_rho));
    sl.raw_alpha = t.leaf(Tensor::scalar(p.raw_alpha));
    sl.raw_beta = t.leaf(Tensor::scalar(p.raw_beta));
    sl.raw_s = t.leaf(Tensor::scalar(p.raw_s));
    sl.rho = t.softplus(sl.raw_rho);
    sl.alpha = t.softplus(sl.raw_alpha);
    sl.beta = t.softplus(sl.raw_beta);
    sl.s = t.softplus(sl.raw_s);
    sl.ern = register_params(p.ern, t);
    sl.idn = register_params(p.idn, t);
    out.sets.push_back(std::move(sl));
  }
  return out;
}

struct PipelineGraph {
  int x0 = -1, p0 = -1;
  std::vector<int> x_nodes, p_nodes;  // after each stage
};

PipelineGraph build_pipeline_graph(Tape& t, const CoilSystem& cs, const StagePlan& plan,
                                   const PlanLeaves& leaves, bool edge) {
  PipelineGraph g;
  const ComplexImage x0 = zero_filled_init(cs);
  g.x0 = t.leaf(tensor_from(x0));
  g.p0 = t.leaf(tensor_from(init_nonedge_map(x0)));
  int x = g.x0;
  int p = g.p0;
  for (int k = 0; k < plan.stages; ++k) {
    const StageParams& sp = plan.stage(k);
    const SetLeaves& sl = leaves.sets[plan.strategy == ParamStrategy::Shared ? 0 : k];
    int z;
    if (edge) {
      const int v = edge_prox_node(t, p, sp.ern, sl.ern);
      const int wx = t.swt(x);
      p = eo_update_node(t, v, wx, sl.alpha, sl.rho);
      z = image_prox_node(t, x, sp.idn, sl.idn);
      x = image_step_node(t, x, z, p, cs, sl.rho, sl.beta, sl.s, wx);
    } else {
      z = image_prox_node(t, x, sp.idn, sl.idn);
      x = image_step_node(t, x, z, -1, cs, -1, sl.beta, sl.s);
    }
    g.x_nodes.push_back(x);
    g.p_nodes.push_back(p);
  }
  return g;
}

PipelineState run_impl(const CoilSystem& cs, const StagePlan& plan,
                       std::vector<PipelineState>* trace, bool edge) {
  plan.validate();
  cs.validate();
  Tape t;
  const PlanLeaves leaves = register_plan(t, plan);
  const PipelineGraph g = build_pipeline_graph(t, cs, plan, leaves, edge);
  const auto state_at = [&](int k) {
    PipelineState st;
    st.x = image_from(t.val(k == 0 ? g.x0 : g.x_nodes[k - 1]));
    st.pne = nonedge_from(t.val(k == 0 ? g.p0 : g.p_nodes[k - 1]));
    st.stage_index = k;
    return st;
  };
  if (trace) {
    trace->clear();
    for (int k = 0; k <= plan.stages; ++k) trace->push_back(state_at(k));
  }
  return state_at(plan.stages);
}

}  // namespace

PipelineState run_pipeline(const CoilSystem& cs, const StagePlan& plan,
                           std::vector<PipelineState>* trace) {
  return run_impl(cs, plan, trace, true);
}

PipelineState run_pipeline_noedge(const CoilSystem& cs, const StagePlan& plan,
                                  std::vector<PipelineState>* trace) {
  return run_impl(cs, plan, trace, false);
}

double total_loss(const PipelineState& final_state, const ComplexImage& gt_x,
                  const NonEdgeMap& gt_pne, double gamma1, double gamma2) {
  if (!final_state.x.same_shape(gt_x)) throw std::invalid_argument("total_loss: shape mismatch");
  if (gamma1 < 0.0 || gamma2 < 0.0) throw std::invalid_argument("total_loss: gammas must be >= 0");
  double mse = 0.0;
  for (size_t k = 0; k < gt_x.data.size(); ++k)
    mse += std::norm(final_state.x.data[k] - gt_x.data[k]);
  mse /= static_cast<double>(gt_x.data.size());
  double mae = 0.0;
  for (int b = 0; b < 3; ++b) {
    if (!final_state.pne.channels[b].same_shape(gt_pne.channels[b]))
      throw std::invalid_argument("total_loss: P_ne shape mismatch");
    for (size_t k = 0; k < gt_pne.channels[b].data.size(); ++k)
      mae += std::abs(final_state.pne.channels[b].data[k] - gt_pne.channels[b].data[k]);
  }
  mae /= static_cast<double>(3 * gt_x.data.size());
  return gamma1 * mse + gamma2 * mae;
}

double cosine_lr(double lr0, int epoch, int epochs) {
  return lr0 * 0.5 * (1.0 + std::cos(std::numbers::pi * epoch / epochs));
}

std::vector<double*> trainable_refs(StagePlan& plan) {
  std::vector<double*> refs;
  for (auto& p : plan.params) {
    refs.push_back(&p.raw_rho);
    refs.push_back(&p.raw_alpha);
    refs.push_back(&p.raw_beta);
    refs.push_back(&p.raw_s);
    for (auto* m : {&p.ern, &p.idn})
      for (auto& e : m->weights.entries)
        for (double& v : e.value.r) refs.push_back(&v);
  }
  return refs;
}

namespace {

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int used = std::min(threads, n);
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int w = 0; w < used; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

double sample_loss_grad(const CoilSystem& cs, const ComplexImage& gt, const NonEdgeMap& gt_pne,
                        const StagePlan& plan, bool edge, double gamma1, double gamma2,
                        std::vector<double>* grads) {
  Tape t;
  const PlanLeaves leaves = register_plan(t, plan);
  const PipelineGraph g = build_pipeline_graph(t, cs, plan, leaves, edge);
  const int xk = plan.stages == 0 ? g.x0 : g.x_nodes.back();
  const int pk = plan.stages == 0 ? g.p0 : g.p_nodes.back();
  const int mse = t.mse_loss(xk, tensor_from(gt));
  const int mae = t.mae_loss(pk, tensor_from(gt_pne));
  const int loss = t.add(t.scale(mse, gamma1), t.scale(mae, gamma2));
  if (grads) {
    t.backward(loss);
    grads->clear();
    for (const auto& sl : leaves.sets) {
      grads->push_back(t.grad(sl.raw_rho).r[0]);
      grads->push_back(t.grad(sl.raw_alpha).r[0]);
      grads->push_back(t.grad(sl.raw_beta).r[0]);
      grads->push_back(t.grad(sl.raw_s).r[0]);
      for (const auto* ids : {&sl.ern, &sl.idn})
        for (int id : *ids)
          for (double v : t.grad(id).r) grads->push_back(v);
    }
  }
  return t.val(loss).scalar_value();
}

TrainResult train(const Dataset& ds, StagePlan& plan, const TrainOptions& opt) {
  if (ds.samples.empty()) throw std::invalid_argument("train: empty dataset");
  if (opt.epochs < 0 || opt.batch_size < 1) throw std::invalid_argument("train: bad options");
  plan.validate();

  std::vector<NonEdgeMap> gt_pne;
  gt_pne.reserve(ds.samples.size());
  for (const auto& s : ds.samples) gt_pne.push_back(init_nonedge_map(s.gt));

  auto refs = trainable_refs(plan);
  const size_t np = refs.size();
  std::vector<double> m(np, 0.0), v(np, 0.0);
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;

  const int n = static_cast<int>(ds.samples.size());
  TrainResult res;
  uint64_t step = 0;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    const double lr = cosine_lr(opt.lr0, epoch, opt.epochs);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(opt.seed, 0x65706f63ULL + epoch);
    for (int i = n - 1; i > 0; --i) std::swap(order[i], order[shuffle_rng.uniform_int(0, i)]);

    double epoch_loss = 0.0;
    for (int start = 0; start < n; start += opt.batch_size) {
      const int bn = std::min(opt.batch_size, n - start);
      std::vector<std::vector<double>> grads(bn);
      std::vector<double> losses(bn, 0.0);
      parallel_for(bn, opt.threads, [&](int bi) {
        const int si = order[start + bi];
        losses[bi] = sample_loss_grad(ds.samples[si].cs, ds.samples[si].gt, gt_pne[si], plan,
                                      opt.edge, opt.gamma1, opt.gamma2, &grads[bi]);
      });
      double batch_loss = 0.0;
      for (int bi = 0; bi < bn; ++bi) batch_loss += losses[bi];
      batch_loss /= bn;
      if (!std::isfinite(batch_loss))
        throw TrainingDiverged("training loss became non-finite at epoch " +
                               std::to_string(epoch) + ", batch " +
                               std::to_string(start / opt.batch_size));
      epoch_loss += batch_loss * bn;

      ++step;
      const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      for (size_t p = 0; p < np; ++p) {
        double gp = 0.0;
        for (int bi = 0; bi < bn; ++bi) gp += grads[bi][p];
        gp /= bn;
        m[p] = kBeta1 * m[p] + (1.0 - kBeta1) * gp;
        v[p] = kBeta2 * v[p] + (1.0 - kBeta2) * gp * gp;
        *refs[p] -= lr * (m[p] / bc1) / (std::sqrt(v[p] / bc2) + kEps);
      }
    }
    res.loss_history.push_back(epoch_loss / n);
    res.lr_history.push_back(lr);
    if (opt.on_epoch) opt.on_epoch(epoch, lr, res.loss_history.back());
  }
  return res;
}

namespace {
constexpr char kCkptMagic[8] = {'J', 'E', 'O', 'W', '0', '0', '0', '1'};
}

void save_checkpoint(const std::string& path, const StagePlan& plan) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.write(kCkptMagic, sizeof(kCkptMagic));
  write_u32(os, static_cast<uint32_t>(plan.stages));
  write_u8(os, static_cast<uint8_t>(plan.strategy));
  const auto& p0 = plan.params.at(0);
  write_u8(os, static_cast<uint8_t>(p0.ern.kind));
  write_u8(os, static_cast<uint8_t>(p0.idn.kind));
  write_f64(os, p0.ern.threshold);
  write_f64(os, p0.idn.threshold);
  write_u32(os, static_cast<uint32_t>(plan.params.size()));
  for (const auto& p : plan.params) {
    write_f64(os, p.raw_rho);
    write_f64(os, p.raw_alpha);
    write_f64(os, p.raw_beta);
    write_f64(os, p.raw_s);
  }
  uint32_t n_arrays = 0;
  for (const auto& p : plan.params)
    n_arrays += static_cast<uint32_t>(p.ern.weights.entries.size() + p.idn.weights.entries.size());
  write_u32(os, n_arrays);
  for (size_t i = 0; i < plan.params.size(); ++i) {
    write_tensor_set(os, plan.params[i].ern.weights, "set" + std::to_string(i) + ".ern.");
    write_tensor_set(os, plan.params[i].idn.weights, "set" + std::to_string(i) + ".idn.");
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

StagePlan load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kCkptMagic, sizeof(kCkptMagic)) != 0)
    throw std::runtime_error("not a JEOW0001 checkpoint: " + path);
  const int stages = static_cast<int>(read_u32(is));
  const auto strategy = static_cast<ParamStrategy>(read_u8(is));
  const auto ern_kind = static_cast<ProxKind>(read_u8(is));
  const auto idn_kind = static_cast<ProxKind>(read_u8(is));
  const double ern_thresh = read_f64(is);
  const double idn_thresh = read_f64(is);
  const uint32_t n_sets = read_u32(is);

  StagePlan plan;
  plan.stages = stages;
  plan.strategy = strategy;
  for (uint32_t i = 0; i < n_sets; ++i) {
    StageParams p;
    p.ern = ern_kind == ProxKind::TinyCnn ? ProximalModule::tiny_cnn(3, 0)
            : ern_kind == ProxKind::ClassicalShrinkage ? ProximalModule::shrinkage(3, ern_thresh)
                                                       : ProximalModule::identity(3);
    p.idn = idn_kind == ProxKind::TinyCnn ? ProximalModule::tiny_cnn(2, 0)
            : idn_kind == ProxKind::ClassicalShrinkage ? ProximalModule::shrinkage(2, idn_thresh)
                                                       : ProximalModule::identity(2);
    plan.params.push_back(std::move(p));
  }
  for (auto& p : plan.params) {
    p.raw_rho = read_f64(is);
    p.raw_alpha = read_f64(is);
    p.raw_beta = read_f64(is);
    p.raw_s = read_f64(is);
  }
  read_u32(is);  // n_arrays, implied by the header
  for (size_t i = 0; i < plan.params.size(); ++i) {
    read_tensor_set(is, plan.params[i].ern.weights, "set" + std::to_string(i) + ".ern.");
    read_tensor_set(is, plan.params[i].idn.weights, "set" + std::to_string(i) + ".idn.");
  }
  plan.validate();
  return plan;
}

}  // namespace jeo
