// Command-line front end: align / normalize / imf / synth / eval.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "hdralign/align.hpp"
#include "hdralign/eval.hpp"
#include "hdralign/io.hpp"
#include "hdralign/report.hpp"

namespace fs = std::filesystem;
using namespace hdralign;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitProcessing = 2;

std::string default_out_dir() {
  const char* env = std::getenv("HDRALIGN_OUT_DIR");
  return env ? env : ".";
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

CoderKind parse_coder(const std::string& name) {
  if (name == "lbp") return CoderKind::LbpGt;
  if (name == "census") return CoderKind::CensusGe;
  if (name == "mtb") return CoderKind::Mtb;
  throw CLI::ValidationError("--coder", "expected one of lbp, census, mtb");
}

std::string coder_name(CoderKind k) {
  switch (k) {
    case CoderKind::LbpGt: return "lbp";
    case CoderKind::CensusGe: return "census";
    case CoderKind::Mtb: return "mtb";
  }
  return "lbp";
}

struct AlignArgs {
  std::string reference;
  std::vector<std::string> slaves;
  std::string out_dir;
  std::string coder = "lbp";
  int levels = 4;
  int max_iters = 10;
  int alpha = 5;
  int beta = 254;
  bool no_init = false;
  bool no_normalize = false;
  bool dump_codes = false;
};

void echo_config(RunReport& rep, const AlignConfig& cfg, bool normalize) {
  rep.config["coder"] = coder_name(cfg.coder);
  rep.config["levels"] = std::to_string(cfg.max_pyramid_levels);
  rep.config["max_iters"] = std::to_string(cfg.max_iters_per_level);
  rep.config["alpha"] = std::to_string(cfg.alpha);
  rep.config["beta"] = std::to_string(cfg.beta);
  rep.config["init"] = cfg.use_histogram_init ? "on" : "off";
  rep.config["normalize"] = normalize ? "on" : "off";
}

int run_align(const AlignArgs& args) {
  AlignConfig cfg;
  cfg.coder = parse_coder(args.coder);
  cfg.max_pyramid_levels = args.levels;
  cfg.max_iters_per_level = args.max_iters;
  cfg.alpha = args.alpha;
  cfg.beta = args.beta;
  cfg.use_histogram_init = !args.no_init;

  fs::create_directories(args.out_dir);
  GrayImage ref = read_image(args.reference);

  RunReport rep;
  rep.reference_path = args.reference;
  echo_config(rep, cfg, !args.no_normalize);

  for (const std::string& slave_path : args.slaves) {
    GrayImage slave = read_image(slave_path);
    FullAlignment fa = args.no_normalize ? align_without_normalization(ref, slave, cfg)
                                         : align(ref, slave, cfg);

    std::string out_path =
        (fs::path(args.out_dir) / (stem_of(slave_path) + "_aligned.png")).string();
    write_image(out_path, quantize8(fa.aligned));

    if (args.dump_codes && cfg.coder != CoderKind::Mtb) {
      std::string code_path =
          (fs::path(args.out_dir) / (stem_of(slave_path) + "_codes.pgm")).string();
      write_image(code_path, to_decimal(encode(gaussian_smooth(slave, 0.5, 1), cfg.coder)));
    }

    SlaveRecord rec;
    rec.slave_path = slave_path;
    rec.output_path = out_path;
    rec.theta_deg = fa.result.motion.theta_deg();
    rec.tx = fa.result.motion.tx;
    rec.ty = fa.result.motion.ty;
    for (const auto& lvl : fa.result.per_level)
      rec.iterations_per_level.push_back(lvl.iterations);
    rec.final_cost = fa.result.per_level.empty() ? 0.0
                                                 : fa.result.per_level.back().final_cost;
    rec.converged = fa.result.converged;
    ValidityMask full(ref.width, ref.height, true);
    rec.mi_before = mutual_information(ref, slave, full);
    rec.mi_after = mutual_information(ref, fa.aligned, fa.aligned_mask);
    rep.records.push_back(rec);

    std::cerr << "aligned " << slave_path << ": theta=" << rec.theta_deg
              << " deg, tx=" << rec.tx << ", ty=" << rec.ty
              << (rec.converged ? "" : " (not converged)") << "\n";
  }

  rep.save((fs::path(args.out_dir) / "report.txt").string());
  return kExitOk;
}

int run_normalize(const std::string& ref_path, const std::string& slave_path,
                  const std::string& out_dir, int alpha, int beta, bool dump_codes) {
  fs::create_directories(out_dir);
  GrayImage a = read_image(ref_path);
  GrayImage b = read_image(slave_path);
  ExposureOrder order = order_by_exposure(a, b);
  NormalizedPair np = normalize_pair(*order.longer, *order.shorter, alpha, beta);

  write_image((fs::path(out_dir) / (stem_of(ref_path) + "_norm.png")).string(),
              order.swapped ? np.z2_hat : np.z1_hat);
  write_image((fs::path(out_dir) / (stem_of(slave_path) + "_norm.png")).string(),
              order.swapped ? np.z1_hat : np.z2_hat);
  if (dump_codes) {
    write_image((fs::path(out_dir) / (stem_of(ref_path) + "_codes.pgm")).string(),
                to_decimal(encode(gaussian_smooth(np.z1_hat, 0.5, 1), CoderKind::LbpGt)));
    write_image((fs::path(out_dir) / (stem_of(slave_path) + "_codes.pgm")).string(),
                to_decimal(encode(gaussian_smooth(np.z2_hat, 0.5, 1), CoderKind::LbpGt)));
  }
  std::cerr << "zeta1=" << np.thresholds.zeta1 << " zeta2=" << np.thresholds.zeta2
            << (order.swapped ? " (inputs swapped by exposure order)" : "") << "\n";
  return kExitOk;
}

int run_imf(const std::string& path1, const std::string& path2,
            const std::string& out_dir, int alpha, int beta) {
  fs::create_directories(out_dir);
  GrayImage z1 = read_image(path1);
  GrayImage z2 = read_image(path2);
  auto [f12, f21] = estimate_imf(z1, z2);
  SaturationThresholds t = compute_thresholds(f12, f21, alpha, beta);

  std::string csv_path = (fs::path(out_dir) / "imf.csv").string();
  std::ofstream csv(csv_path);
  if (!csv) throw IoError("cannot write " + csv_path);
  csv << "z,f12,f21\n";
  for (int z = 0; z < 256; ++z)
    csv << z << "," << int(f12[z]) << "," << int(f21[z]) << "\n";

  std::string th_path = (fs::path(out_dir) / "thresholds.txt").string();
  std::ofstream th(th_path);
  if (!th) throw IoError("cannot write " + th_path);
  th << "alpha=" << t.alpha << "\n"
     << "beta=" << t.beta << "\n"
     << "zeta1=" << t.zeta1 << "\n"
     << "zeta2=" << t.zeta2 << "\n";
  std::cerr << "wrote " << csv_path << " and " << th_path << "\n";
  return kExitOk;
}

int run_synth(const std::string& input, const std::string& out_dir, double theta_deg,
              double tx, double ty, double ev, double noise, uint64_t seed) {
  fs::create_directories(out_dir);
  GrayImage img = read_image(input);
  GrayImage exposed = synth_exposure(img, ev);
  GrayImage warped = synth_warp(exposed, Motion(theta_deg * M_PI / 180.0, tx, ty));
  if (noise > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, noise);
    for (float& v : warped.data)
      v = static_cast<float>(std::clamp(std::lround(v + dist(rng)), 0L, 255L));
  }

  std::string img_path = (fs::path(out_dir) / (stem_of(input) + "_synth.png")).string();
  write_image(img_path, quantize8(warped));
  GroundTruth gt{theta_deg, tx, ty, ev};
  std::string gt_path = (fs::path(out_dir) / (stem_of(input) + "_synth.txt")).string();
  gt.save(gt_path);
  std::cerr << "wrote " << img_path << " and " << gt_path << "\n";
  return kExitOk;
}

std::string sidecar_for(const std::string& slave_path) {
  return (fs::path(slave_path).parent_path() / (stem_of(slave_path) + ".txt")).string();
}

int run_eval(const std::string& report_path) {
  RunReport rep = RunReport::load(report_path);
  std::cout << std::fixed << std::setprecision(2);
  std::cout << std::left << std::setw(28) << "slave" << std::right << std::setw(10)
            << "d_theta" << std::setw(10) << "d_ty" << std::setw(10) << "d_tx"
            << std::setw(12) << "MI before" << std::setw(12) << "MI after" << "\n";

  std::vector<double> dth, dty, dtx;
  for (const SlaveRecord& rec : rep.records) {
    std::string sc = sidecar_for(rec.slave_path);
    std::string label = fs::path(rec.slave_path).filename().string();
    if (fs::exists(sc)) {
      GroundTruth gt = GroundTruth::load(sc);
      MotionError e = motion_error(
          Motion(rec.theta_deg * M_PI / 180.0, rec.tx, rec.ty),
          Motion(gt.theta_deg * M_PI / 180.0, gt.tx, gt.ty));
      dth.push_back(e.d_theta);
      dty.push_back(e.d_ty);
      dtx.push_back(e.d_tx);
      std::cout << std::left << std::setw(28) << label << std::right << std::setw(10)
                << e.d_theta << std::setw(10) << e.d_ty << std::setw(10) << e.d_tx
                << std::setw(12) << rec.mi_before << std::setw(12) << rec.mi_after << "\n";
    } else {
      std::cout << std::left << std::setw(28) << label << std::right << std::setw(10)
                << "-" << std::setw(10) << "-" << std::setw(10) << "-" << std::setw(12)
                << rec.mi_before << std::setw(12) << rec.mi_after << "\n";
    }
  }
  if (!dth.empty()) {
    auto stats = [](const std::vector<double>& v, const char* name) {
      double mean = 0.0, mx = v[0], mn = v[0];
      for (double x : v) {
        mean += x;
        mx = std::max(mx, x);
        mn = std::min(mn, x);
      }
      mean /= static_cast<double>(v.size());
      std::cout << "  " << name << ": mean=" << mean << " max=" << mx << " min=" << mn
                << "\n";
    };
    std::cout << "aggregate over " << dth.size() << " images:\n";
    stats(dth, "d_theta");
    stats(dty, "d_ty");
    stats(dtx, "d_tx");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exposure-robust image stack alignment"};
  app.require_subcommand(1);

  AlignArgs aa;
  aa.out_dir = default_out_dir();
  auto* align_cmd = app.add_subcommand("align", "Align slave images to a reference");
  align_cmd->add_option("reference", aa.reference, "Reference image")->required();
  align_cmd->add_option("slaves", aa.slaves, "Slave image(s)")->required();
  align_cmd->add_option("-o,--out", aa.out_dir, "Output directory");
  align_cmd->add_option("--coder", aa.coder, "Descriptor: lbp, census, mtb")
      ->check(CLI::IsMember({"lbp", "census", "mtb"}));
  align_cmd->add_option("--levels", aa.levels, "Max pyramid levels");
  align_cmd->add_option("--max-iters", aa.max_iters, "Max iterations per level");
  align_cmd->add_option("--alpha", aa.alpha, "Under-exposure threshold");
  align_cmd->add_option("--beta", aa.beta, "Over-exposure threshold");
  align_cmd->add_flag("--no-init", aa.no_init, "Disable histogram initialization");
  align_cmd->add_flag("--no-normalize", aa.no_normalize, "Skip IMF normalization");
  align_cmd->add_flag("--dump-codes", aa.dump_codes, "Dump decimal LBP images as PGM");

  std::string n_ref, n_slave, n_out = default_out_dir();
  int n_alpha = 5, n_beta = 254;
  bool n_dump = false;
  auto* norm_cmd = app.add_subcommand("normalize", "IMF-normalize an exposure pair");
  norm_cmd->add_option("reference", n_ref, "First image")->required();
  norm_cmd->add_option("slave", n_slave, "Second image")->required();
  norm_cmd->add_option("-o,--out", n_out, "Output directory");
  norm_cmd->add_option("--alpha", n_alpha, "Under-exposure threshold");
  norm_cmd->add_option("--beta", n_beta, "Over-exposure threshold");
  norm_cmd->add_flag("--dump-codes", n_dump, "Dump decimal LBP images as PGM");

  std::string i_a, i_b, i_out = default_out_dir();
  int i_alpha = 5, i_beta = 254;
  auto* imf_cmd = app.add_subcommand("imf", "Estimate intensity mapping functions");
  imf_cmd->add_option("image1", i_a, "First image")->required();
  imf_cmd->add_option("image2", i_b, "Second image")->required();
  imf_cmd->add_option("-o,--out", i_out, "Output directory");
  imf_cmd->add_option("--alpha", i_alpha, "Under-exposure threshold");
  imf_cmd->add_option("--beta", i_beta, "Over-exposure threshold");

  std::string s_in, s_out = default_out_dir();
  double s_theta = 0.0, s_tx = 0.0, s_ty = 0.0, s_ev = 0.0, s_noise = 0.0;
  uint64_t s_seed = 0;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a warped/exposed test image");
  synth_cmd->add_option("input", s_in, "Input image")->required();
  synth_cmd->add_option("-o,--out", s_out, "Output directory");
  synth_cmd->add_option("--theta", s_theta, "Rotation, degrees");
  synth_cmd->add_option("--tx", s_tx, "X translation, pixels");
  synth_cmd->add_option("--ty", s_ty, "Y translation, pixels");
  synth_cmd->add_option("--ev", s_ev, "Exposure shift, stops");
  synth_cmd->add_option("--noise", s_noise, "Gaussian noise sigma");
  synth_cmd->add_option("--seed", s_seed, "Noise RNG seed");

  std::string e_report;
  auto* eval_cmd = app.add_subcommand("eval", "Score a run report against sidecars");
  eval_cmd->add_option("report", e_report, "Report file from align")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*align_cmd) return run_align(aa);
    if (*norm_cmd) return run_normalize(n_ref, n_slave, n_out, n_alpha, n_beta, n_dump);
    if (*imf_cmd) return run_imf(i_a, i_b, i_out, i_alpha, i_beta);
    if (*synth_cmd) return run_synth(s_in, s_out, s_theta, s_tx, s_ty, s_ev, s_noise, s_seed);
    if (*eval_cmd) return run_eval(e_report);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitProcessing;
  }
  return kExitUsage;
}
