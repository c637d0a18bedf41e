#include "deepdc/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "deepdc/backbone.hpp"
#include "deepdc/dcor.hpp"
#include "deepdc/error.hpp"
#include "deepdc/evalkit.hpp"
#include "deepdc/geotransform.hpp"
#include "deepdc/metric.hpp"
#include "deepdc/toy.hpp"

namespace deepdc {

namespace {

using ordered_json = nlohmann::ordered_json;

struct CliConfig {
  std::string weights;
  Eigen::Index short_side = 224;
  double epsilon = 1e-6;
  bool json = false;
  std::uint64_t seed = 0;
};

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

void add_shared(CLI::App* cmd, CliConfig& cfg) {
  cmd->add_option("--weights", cfg.weights, "DDCW weight container");
  cmd->add_option("--short-side", cfg.short_side, "resize shorter image side to this many pixels")->capture_default_str();
  cmd->add_option("--eps", cfg.epsilon, "stabilizer added to the correlation ratio")->capture_default_str();
  cmd->add_flag("--json", cfg.json, "machine-readable output");
  cmd->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
}

void check(const CliConfig& cfg, bool needs_weights) {
  if (cfg.short_side < 32) throw UsageError("--short-side must be at least 32");
  if (!(cfg.epsilon >= 0.0)) throw UsageError("--eps must be non-negative");
  if (needs_weights && cfg.weights.empty()) throw UsageError("--weights is required");
}

std::string number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

DcorConfig dcor_config(const CliConfig& cfg) {
  DcorConfig d;
  d.epsilon = cfg.epsilon;
  return d;
}

int cmd_score(const CliConfig& cfg, const std::string& ref, const std::string& dist, std::ostream& out) {
  check(cfg, true);
  const BackboneWeights weights = load_weights(cfg.weights);
  const QualityScore score = deepdc_score(read_image(ref), read_image(dist), weights, cfg.short_side, dcor_config(cfg));
  if (cfg.json) {
    ordered_json j;
    j["deepdc"] = score.value;
    auto& layers = j["layers"] = ordered_json::array();
    for (const auto& l : score.profile) layers.push_back({{"layer", l.layer}, {"r_squared", l.r_squared}});
    j["short_side"] = cfg.short_side;
    j["epsilon"] = cfg.epsilon;
    out << j.dump(2) << '\n';
  } else {
    out << "deepdc " << number(score.value) << '\n';
    for (const auto& l : score.profile) out << "  " << l.layer << " r2=" << number(l.r_squared) << '\n';
  }
  return kExitOk;
}

int cmd_eval(const CliConfig& cfg, const std::string& manifest_path, const std::string& out_path, std::ostream& out) {
  check(cfg, true);
  const BackboneWeights weights = load_weights(cfg.weights);
  const EvalReport report = evaluate_manifest(read_manifest(manifest_path), weights, cfg.short_side, dcor_config(cfg));
  const std::string text = report_json(report);
  if (!out_path.empty()) {
    std::ofstream file(out_path, std::ios::binary);
    if (!file || !(file << text)) throw Error(ErrorCode::IoError, "cannot write " + out_path);
  }
  if (cfg.json) {
    out << text;
  } else {
    out << "records " << report.predictions.size() << " scored, " << report.errors.size() << " failed\n"
        << "srcc " << number(report.srcc) << '\n'
        << "plcc " << number(report.plcc) << (report.params.linear_fallback ? " (linear fallback)" : "") << '\n';
    for (const auto& e : report.errors) out << "error record " << e.index << ": " << e.message << '\n';
  }
  return kExitOk;
}

int cmd_gen_gt(const CliConfig& cfg, const std::string& manifest_path, const std::string& out_dir, GtConfig gt,
               std::ostream& out) {
  check(cfg, false);
  gt.seed = cfg.seed;
  try {
    gt.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const GtDatasetResult result = build_gt_dataset(read_manifest(manifest_path), gt, out_dir);
  const std::string manifest_out = (std::filesystem::path(out_dir) / "manifest.csv").string();
  if (cfg.json) {
    ordered_json j;
    j["manifest"] = manifest_out;
    j["records"] = result.manifest.records.size();
    auto& errs = j["errors"] = ordered_json::array();
    for (const auto& e : result.errors) errs.push_back({{"index", e.index}, {"message", e.message}});
    out << j.dump(2) << '\n';
  } else {
    out << "wrote " << result.manifest.records.size() << " records to " << manifest_out << '\n';
    for (const auto& e : result.errors) out << "error record " << e.index << ": " << e.message << '\n';
  }
  return result.errors.empty() ? kExitOk : kExitRuntime;
}

int cmd_toy(const CliConfig& cfg, Eigen::Index n, std::ostream& out) {
  if (n < 2) throw UsageError("--n must be at least 2");
  if (!(cfg.epsilon >= 0.0)) throw UsageError("--eps must be non-negative");
  const ToySeries s = toy_series(n, cfg.seed);
  const DcorConfig dc = dcor_config(cfg);
  const auto relation = [&](const Eigen::VectorXd& y) {
    const double r2 = sample_dcorr(s.x, y, dc);
    return ordered_json{{"pearson", pearson_corr(s.x, y)}, {"dcorr", std::sqrt(std::max(r2, 0.0))}, {"r_squared", r2}};
  };
  ordered_json j;
  j["n"] = n;
  j["seed"] = cfg.seed;
  j["linear"] = relation(s.linear);
  j["quadratic"] = relation(s.quadratic);
  out << j.dump(2) << '\n';
  return kExitOk;
}

void write_matrix_csv(const Eigen::MatrixXd& m, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::IoError, "cannot write " + path);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) file << (c ? "," : "") << number(m(r, c));
    file << '\n';
  }
  if (!file) throw Error(ErrorCode::IoError, "short write to " + path);
}

int cmd_export_distmat(const CliConfig& cfg, const std::string& ref, const std::string& dist, const std::string& layer,
                       const std::string& prefix, std::ostream& out) {
  check(cfg, true);
  const BackboneWeights weights = load_weights(cfg.weights);
  const auto tap = std::find(weights.taps.begin(), weights.taps.end(), layer);
  if (tap == weights.taps.end()) throw UsageError("--layer must be one of the container taps");
  const auto index = static_cast<std::size_t>(tap - weights.taps.begin());
  const FeatureStack fx = image_features(read_image(ref), weights, cfg.short_side);
  const FeatureStack fy = image_features(read_image(dist), weights, cfg.short_side);
  const auto a = centered_distances(fx[index].tensor.data);
  const auto b = centered_distances(fy[index].tensor.data);
  const std::string ref_path = prefix + ".ref.csv";
  const std::string dist_path = prefix + ".dist.csv";
  write_matrix_csv(a.matrix(), ref_path);
  write_matrix_csv(b.matrix(), dist_path);
  if (cfg.json) {
    out << ordered_json{{"layer", layer}, {"n", a.size()}, {"ref", ref_path}, {"dist", dist_path}}.dump(2) << '\n';
  } else {
    out << "layer " << layer << " n=" << a.size() << "\nwrote " << ref_path << "\nwrote " << dist_path << '\n';
  }
  return kExitOk;
}

int cmd_make_test_weights(const CliConfig& cfg, int scale, const std::string& path, std::ostream& out) {
  if (path.empty()) throw UsageError("--out is required");
  if (scale != 1 && scale != 4 && scale != 8) throw UsageError("--scale must be 1, 4 or 8");
  const BackboneWeights weights = generate_test_backbone(cfg.seed, scale);
  save_weights(weights, path);
  if (cfg.json) {
    out << ordered_json{{"out", path}, {"scale", scale}, {"seed", cfg.seed}, {"layers", weights.layers.size()}}.dump(2)
        << '\n';
  } else {
    out << "wrote " << path << " (" << weights.layers.size() << " layers, scale " << scale << ")\n";
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"DeepDC full-reference image quality metric", "deepdc"};
  app.require_subcommand(1);
  CliConfig cfg;

  std::string ref, dist, manifest, out_path, out_dir, layer;
  Eigen::Index toy_n = 1000;
  int scale = 8;
  GtConfig gt;

  auto* score = app.add_subcommand("score", "score a distorted image against its reference");
  add_shared(score, cfg);
  score->add_option("--ref", ref, "reference image")->required();
  score->add_option("--dist", dist, "distorted image")->required();

  auto* eval = app.add_subcommand("eval", "evaluate against a ref,dist,mos manifest");
  add_shared(eval, cfg);
  eval->add_option("--manifest", manifest, "CSV manifest")->required();
  eval->add_option("--out", out_path, "write the JSON report here");

  auto* gen = app.add_subcommand("gen-gt", "build a geometric-transform dataset");
  add_shared(gen, cfg);
  gen->add_option("--manifest", manifest, "CSV manifest")->required();
  gen->add_option("--out-dir", out_dir, "output directory")->required();
  gen->add_option("--translate", gt.translate_frac, "shift as a fraction of the axis length")->capture_default_str();
  gen->add_option("--rotate", gt.rotate_deg, "rotation magnitude in degrees")->capture_default_str();
  gen->add_option("--scale", gt.scale_factor, "magnification factor")->capture_default_str();

  auto* toy = app.add_subcommand("toy", "Pearson vs distance correlation on synthetic data (JSON)");
  add_shared(toy, cfg);
  toy->add_option("--n", toy_n, "sample size")->capture_default_str();

  auto* exp = app.add_subcommand("export-distmat", "dump one tap's double-centered distance matrices as CSV");
  add_shared(exp, cfg);
  exp->add_option("--ref", ref, "reference image")->required();
  exp->add_option("--dist", dist, "distorted image")->required();
  exp->add_option("--layer", layer, "tap name, e.g. conv3_4")->required();
  exp->add_option("--out", out_path, "output prefix; writes <out>.ref.csv and <out>.dist.csv")->required();

  auto* mk = app.add_subcommand("make-test-weights", "write a seeded random VGG19 container");
  add_shared(mk, cfg);
  mk->add_option("--scale", scale, "channel divisor (1, 4 or 8)")->capture_default_str();
  mk->add_option("--out", out_path, "output container")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    // Subcommand help arrives as CallForHelp from the subcommand itself.
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*score) return cmd_score(cfg, ref, dist, out);
    if (*eval) return cmd_eval(cfg, manifest, out_path, out);
    if (*gen) return cmd_gen_gt(cfg, manifest, out_dir, gt, out);
    if (*toy) return cmd_toy(cfg, toy_n, out);
    if (*exp) return cmd_export_distmat(cfg, ref, dist, layer, out_path, out);
    if (*mk) return cmd_make_test_weights(cfg, scale, out_path, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace deepdc
