// jeo-mri: dataset generation, training, reconstruction, and ablation
// studies for the joint edge optimization unrolled reconstructor.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "jeo/experiments.hpp"
#include "jeo/io_util.hpp"
#include "jeo/rng.hpp"
#include "jeo/version.hpp"

namespace fs = std::filesystem;
using namespace jeo;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

int worker_cap() {
  int cap = static_cast<int>(std::thread::hardware_concurrency());
  if (cap < 1) cap = 1;
  if (const char* env = std::getenv("JEO_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1 && v < cap) cap = v;
  }
  return cap;
}

// Resolved key = value echo; deterministic order, written into every
// output location so a run can be reproduced from its artifacts alone.
struct ConfigEcho {
  std::map<std::string, std::string> kv;

  void set(const std::string& k, const std::string& v) { kv[k] = v; }
  void set(const std::string& k, double v) { kv[k] = fmt_g9(v); }
  void set(const std::string& k, int v) { kv[k] = std::to_string(v); }
  void set(const std::string& k, uint64_t v) { kv[k] = std::to_string(v); }

  void write(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "# jeo-mri " << kVersion << "\n";
    for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
    if (!os) throw std::runtime_error("write failed: " + path);
  }
};

struct DataArgs {
  std::string shape = "64x64";
  int samples = 40;
  int coils = 4;
  std::string scheme = "random";
  double R = 4.0;
  int acs = -1;
  double noise_std = 0.01;
  uint64_t seed = 1;
};

void add_data_options(CLI::App* cmd, DataArgs& d) {
  cmd->add_option("--shape", d.shape, "image shape HxW")->capture_default_str();
  cmd->add_option("--samples", d.samples, "sample count")->capture_default_str();
  cmd->add_option("--coils", d.coils, "coil count")->capture_default_str();
  cmd->add_option("--scheme", d.scheme, "sampling scheme: random|cartesian|equidistant")
      ->capture_default_str();
  cmd->add_option("--R", d.R, "acceleration factor")->capture_default_str();
  cmd->add_option("--acs", d.acs, "fully sampled center lines (-1: width/16)")
      ->capture_default_str();
  cmd->add_option("--noise_std", d.noise_std, "k-space noise std per component")
      ->capture_default_str();
}

DataSpec to_spec(const DataArgs& d) {
  DataSpec spec;
  int h = 0, w = 0;
  if (std::sscanf(d.shape.c_str(), "%dx%d", &h, &w) != 2 || h < 2 || w < 2)
    throw std::invalid_argument("--shape expects HxW with H,W >= 2");
  spec.height = h;
  spec.width = w;
  spec.n_samples = d.samples;
  spec.coils = d.coils;
  spec.scheme = mask_scheme_from_name(d.scheme);
  spec.acceleration = d.R;
  spec.acs_lines = d.acs;
  spec.noise_std = d.noise_std;
  spec.seed = d.seed;
  return spec;
}

void echo_data(ConfigEcho& echo, const DataArgs& d) {
  echo.set("shape", d.shape);
  echo.set("samples", d.samples);
  echo.set("coils", d.coils);
  echo.set("scheme", d.scheme);
  echo.set("R", d.R);
  echo.set("acs", d.acs);
  echo.set("noise_std", d.noise_std);
  echo.set("seed", d.seed);
}

struct TrainArgs {
  int stages = 5;
  std::string strategy = "non-shared";
  std::string prox = "tiny-cnn";
  double threshold = 0.05;
  int epochs = 150;
  int batch = 2;
  double lr0 = 0.01;
  double gamma1 = 1.0;
  double gamma2 = 0.1;
  uint64_t seed = 1;
};

void add_train_options(CLI::App* cmd, TrainArgs& t) {
  cmd->add_option("--K", t.stages, "unrolled stage count")->capture_default_str();
  cmd->add_option("--strategy", t.strategy, "shared|non-shared")->capture_default_str();
  cmd->add_option("--prox", t.prox, "proximal modules: tiny-cnn|identity|shrinkage")
      ->capture_default_str();
  cmd->add_option("--threshold", t.threshold, "shrinkage threshold")->capture_default_str();
  cmd->add_option("--epochs", t.epochs, "training epochs")->capture_default_str();
  cmd->add_option("--batch", t.batch, "batch size")->capture_default_str();
  cmd->add_option("--lr0", t.lr0, "initial learning rate")->capture_default_str();
  cmd->add_option("--gamma1", t.gamma1, "image loss weight")->capture_default_str();
  cmd->add_option("--gamma2", t.gamma2, "edge map loss weight")->capture_default_str();
}

void echo_train(ConfigEcho& echo, const TrainArgs& t) {
  echo.set("K", t.stages);
  echo.set("strategy", t.strategy);
  echo.set("prox", t.prox);
  echo.set("threshold", t.threshold);
  echo.set("epochs", t.epochs);
  echo.set("batch", t.batch);
  echo.set("lr0", t.lr0);
  echo.set("gamma1", t.gamma1);
  echo.set("gamma2", t.gamma2);
  echo.set("seed", t.seed);
}

std::string sample_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "sample%03d", i);
  return buf;
}

// ---- commands ---------------------------------------------------------

int cmd_generate(const DataArgs& d, const std::string& out) {
  const Dataset ds = generate_dataset(to_spec(d));
  save_dataset(out, ds);
  ConfigEcho echo;
  echo.set("command", std::string("generate"));
  echo_data(echo, d);
  echo.set("out", out);
  echo.write(out + ".config");
  std::cerr << "wrote " << ds.samples.size() << " samples to " << out << "\n";
  return 0;
}

int cmd_train(const TrainArgs& t, const std::string& data, const std::string& out) {
  const Dataset ds = load_dataset(data);
  fs::create_directories(out);

  StagePlan plan = StagePlan::make(t.stages, strategy_from_name(t.strategy),
                                   prox_kind_from_name(t.prox), prox_kind_from_name(t.prox),
                                   t.seed, t.threshold);
  TrainOptions opt;
  opt.epochs = t.epochs;
  opt.batch_size = t.batch;
  opt.lr0 = t.lr0;
  opt.gamma1 = t.gamma1;
  opt.gamma2 = t.gamma2;
  opt.seed = t.seed;
  opt.threads = worker_cap();

  std::ofstream loss_csv(out + "/loss.csv", std::ios::binary);
  if (!loss_csv) throw std::runtime_error("cannot write " + out + "/loss.csv");
  loss_csv << "epoch,lr,loss\n";
  opt.on_epoch = [&](int epoch, double lr, double loss) {
    loss_csv << epoch << "," << fmt_g9(lr) << "," << fmt_g9(loss) << "\n";
    if (epoch % 10 == 0 || epoch == t.epochs - 1)
      std::cerr << "epoch " << epoch << " lr " << fmt_g9(lr) << " loss " << fmt_g9(loss) << "\n";
  };
  (void)train(ds, plan, opt);
  loss_csv.close();
  if (!loss_csv) throw std::runtime_error("write failed: " + out + "/loss.csv");

  save_checkpoint(out + "/checkpoint.jeow", plan);
  ConfigEcho echo;
  echo.set("command", std::string("train"));
  echo_train(echo, t);
  echo.set("data", data);
  echo.set("out", out);
  echo.write(out + "/config.resolved");
  return 0;
}

int cmd_reconstruct(const std::string& data, const std::string& checkpoint,
                    const std::string& out, uint64_t seed) {
  const Dataset ds = load_dataset(data);
  const StagePlan plan = load_checkpoint(checkpoint);
  fs::create_directories(out);
  if (ds.samples.empty()) throw std::runtime_error("empty dataset: " + data);

  // mask descriptor for the report, inferred from the first sample
  const SamplingMask& m0 = ds.samples[0].cs.mask;
  const double r_eff = static_cast<double>(m0.pattern.size()) /
                       static_cast<double>(std::max<size_t>(1, m0.sampled_count()));
  bool columns_uniform = true;
  for (int j = 0; j < m0.width && columns_uniform; ++j)
    for (int i = 1; i < m0.height; ++i)
      if (m0.at(i, j) != m0.at(0, j)) {
        columns_uniform = false;
        break;
      }
  const std::string scheme = columns_uniform ? "cartesian" : "random";

  const int n = static_cast<int>(ds.samples.size());
  double rec_psnr = 0, rec_ssim = 0, rec_mse = 0, zf_psnr = 0, zf_ssim = 0, zf_mse = 0;
  for (int i = 0; i < n; ++i) {
    const Sample& s = ds.samples[i];
    const PipelineState st = run_pipeline(s.cs, plan);
    const RealImage gt_mag = magnitude(s.gt);
    const RealImage rec_mag = magnitude(st.x);
    const RealImage zf_mag = magnitude(zero_filled_init(s.cs));
    double peak = 0.0;
    for (double v : gt_mag.data) peak = std::max(peak, v);
    if (peak <= 0.0) peak = 1.0;

    const std::string base = out + "/" + sample_name(i);
    write_pgm16(base + "_recon.pgm", rec_mag, peak);
    // error maps are shown at a 5x gain (full scale = 0.2 * ground-truth peak)
    write_pgm16(base + "_error.pgm", error_map(rec_mag, gt_mag), 0.2 * peak);
    write_pgm16(base + "_pne.pgm", st.pne.min_channel(), 1.0);

    const RealImage err = error_map(rec_mag, gt_mag);
    double mse = 0;
    for (double v : err.data) mse += v * v;
    mse /= static_cast<double>(err.data.size());
    rec_psnr += psnr(rec_mag, gt_mag);
    rec_ssim += ssim(rec_mag, gt_mag);
    rec_mse += mse;
    const RealImage zerr = error_map(zf_mag, gt_mag);
    double zm = 0;
    for (double v : zerr.data) zm += v * v;
    zm /= static_cast<double>(zerr.data.size());
    zf_psnr += psnr(zf_mag, gt_mag);
    zf_ssim += ssim(zf_mag, gt_mag);
    zf_mse += zm;
  }

  std::ofstream csv(out + "/metrics.csv", std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write " + out + "/metrics.csv");
  csv << MetricReport::csv_header() << "\n";
  MetricReport rep;
  rep.method = "joint-edge";
  rep.scheme = scheme;
  rep.acceleration = r_eff;
  rep.seed = seed;
  rep.psnr_db = rec_psnr / n;
  rep.ssim_val = rec_ssim / n;
  rep.mse = rec_mse / n;
  csv << rep.csv_row() << "\n";
  rep.method = "zero-filled";
  rep.psnr_db = zf_psnr / n;
  rep.ssim_val = zf_ssim / n;
  rep.mse = zf_mse / n;
  csv << rep.csv_row() << "\n";
  csv.close();
  if (!csv) throw std::runtime_error("write failed: " + out + "/metrics.csv");

  ConfigEcho echo;
  echo.set("command", std::string("reconstruct"));
  echo.set("data", data);
  echo.set("checkpoint", checkpoint);
  echo.set("out", out);
  echo.set("seed", seed);
  echo.write(out + "/config.resolved");
  std::cerr << "reconstructed " << n << " samples, mean PSNR " << fmt_g9(rec_psnr / n) << " dB\n";
  return 0;
}

int cmd_ablate(const DataArgs& d, const TrainArgs& t, const std::string& study,
               const std::string& rs_list, const std::string& ks_list, const std::string& out) {
  fs::create_directories(out);
  const DataSpec spec = to_spec(d);
  PlanSpec ps;
  ps.stages = t.stages;
  ps.strategy = strategy_from_name(t.strategy);
  ps.ern_kind = prox_kind_from_name(t.prox);
  ps.idn_kind = ps.ern_kind;
  ps.seed = t.seed;
  ExperimentBudget budget;
  budget.epochs = t.epochs;
  budget.batch_size = t.batch;
  budget.lr0 = t.lr0;
  budget.gamma1 = t.gamma1;
  budget.gamma2 = t.gamma2;
  budget.threads = 1;
  budget.workers = worker_cap();

  const auto parse_list = [](const std::string& csv) {
    std::vector<double> vals;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) vals.push_back(std::stod(item));
    if (vals.empty()) throw std::invalid_argument("empty list option");
    return vals;
  };

  if (study != "edge" && study != "modules" && study != "strategy" && study != "all")
    throw std::invalid_argument("--study must be edge|modules|strategy|all");

  if (study == "edge" || study == "all") {
    const auto rows = run_edge_ablation(spec, ps, budget, parse_list(rs_list));
    std::ofstream csv(out + "/edge_ablation.csv", std::ios::binary);
    csv << "R,method,psnr_db,ssim,zf_psnr_db\n";
    for (const auto& r : rows)
      csv << fmt_g9(r.acceleration) << "," << (r.edge ? "joint-edge" : "no-edge") << ","
          << fmt_g9(r.psnr) << "," << fmt_g9(r.ssim) << "," << fmt_g9(r.zf_psnr) << "\n";
    if (!csv) throw std::runtime_error("write failed: edge_ablation.csv");
    std::cerr << "edge ablation: " << rows.size() << " rows\n";
  }
  if (study == "modules" || study == "all") {
    const auto rows = run_module_ablation(spec, ps, budget);
    std::ofstream csv(out + "/module_ablation.csv", std::ios::binary);
    csv << "idn,ern,psnr_db,ssim\n";
    for (const auto& r : rows)
      csv << (r.idn_on ? 1 : 0) << "," << (r.ern_on ? 1 : 0) << "," << fmt_g9(r.psnr) << ","
          << fmt_g9(r.ssim) << "\n";
    if (!csv) throw std::runtime_error("write failed: module_ablation.csv");
    std::cerr << "module ablation: " << rows.size() << " rows\n";
  }
  if (study == "strategy" || study == "all") {
    std::vector<int> ks;
    for (double v : parse_list(ks_list)) ks.push_back(static_cast<int>(v));
    const auto rows = run_strategy_study(spec, ps, budget, ks);
    std::ofstream csv(out + "/strategy_study.csv", std::ios::binary);
    csv << "K,strategy,psnr_db,ssim\n";
    for (const auto& r : rows)
      csv << r.stages << "," << strategy_name(r.strategy) << "," << fmt_g9(r.psnr) << ","
          << fmt_g9(r.ssim) << "\n";
    if (!csv) throw std::runtime_error("write failed: strategy_study.csv");
    std::cerr << "strategy study: " << rows.size() << " rows\n";
  }

  ConfigEcho echo;
  echo.set("command", std::string("ablate"));
  echo_data(echo, d);
  echo_train(echo, t);
  echo.set("study", study);
  echo.set("Rs", rs_list);
  echo.set("Ks", ks_list);
  echo.set("out", out);
  echo.write(out + "/config.resolved");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"joint edge optimization MRI reconstruction benchmark"};
  app.set_config("--config", "", "key = value configuration file");
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "synthesize a phantom dataset");
  DataArgs gen_data;
  std::string gen_out = "dataset.jeomri";
  add_data_options(gen, gen_data);
  gen->add_option("--seed", gen_data.seed, "RNG seed")->capture_default_str();
  gen->add_option("--out", gen_out, "output container path")->capture_default_str();

  auto* tr = app.add_subcommand("train", "train an unrolled reconstructor");
  TrainArgs tr_args;
  std::string tr_data, tr_out = "train_out";
  add_train_options(tr, tr_args);
  tr->add_option("--seed", tr_args.seed, "RNG seed")->capture_default_str();
  tr->add_option("--data", tr_data, "training dataset")->required();
  tr->add_option("--out", tr_out, "output directory")->capture_default_str();

  auto* rec = app.add_subcommand("reconstruct", "run a checkpoint over a dataset");
  std::string rec_data, rec_ckpt, rec_out = "recon_out";
  uint64_t rec_seed = 0;
  rec->add_option("--data", rec_data, "test dataset")->required();
  rec->add_option("--checkpoint", rec_ckpt, "trained checkpoint")->required();
  rec->add_option("--out", rec_out, "output directory")->capture_default_str();
  rec->add_option("--seed", rec_seed, "seed label for the report")->capture_default_str();

  auto* ab = app.add_subcommand("ablate", "run the ablation studies");
  DataArgs ab_data;
  TrainArgs ab_args;
  std::string ab_study = "all";
  std::string ab_rs = "2,4,6,8,10";
  std::string ab_ks = "1,2,3,4,5,6,7";
  std::string ab_out = "ablate_out";
  add_data_options(ab, ab_data);
  add_train_options(ab, ab_args);
  ab->add_option("--seed", ab_data.seed, "RNG seed for data and training")->capture_default_str();
  ab->add_option("--study", ab_study, "edge|modules|strategy|all")->capture_default_str();
  ab->add_option("--Rs", ab_rs, "acceleration list for the edge study")->capture_default_str();
  ab->add_option("--Ks", ab_ks, "stage counts for the strategy study")->capture_default_str();
  ab->add_option("--out", ab_out, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (gen->parsed()) return cmd_generate(gen_data, gen_out);
    if (tr->parsed()) return cmd_train(tr_args, tr_data, tr_out);
    if (rec->parsed()) return cmd_reconstruct(rec_data, rec_ckpt, rec_out, rec_seed);
    if (ab->parsed()) {
      ab_args.seed = ab_data.seed;
      return cmd_ablate(ab_data, ab_args, ab_study, ab_rs, ab_ks, ab_out);
    }
  } catch (const TrainingDiverged& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::runtime_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}
