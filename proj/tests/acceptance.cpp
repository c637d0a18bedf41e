// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Tolerances and time budgets are fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "deepdc/backbone.hpp"
#include "deepdc/dcor.hpp"
#include "deepdc/dcor_naive.hpp"
#include "deepdc/evalkit.hpp"
#include "deepdc/geotransform.hpp"
#include "deepdc/metric.hpp"
#include "deepdc/toy.hpp"
#include "test_support.hpp"

namespace {

using namespace deepdc;
using testing::random_normal;
namespace fs = std::filesystem;

struct Outcome {
  bool ok = true;
  std::string detail;
};

struct Criterion {
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

Outcome oracle_equivalence() {
  constexpr double kTol = 1e-10;
  SplitMix64 rng(1001);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.next() % 16);
    const Eigen::MatrixXd x = random_normal(n, 1 + static_cast<Eigen::Index>(rng.next() % 8), rng);
    const Eigen::MatrixXd y = random_normal(n, 1 + static_cast<Eigen::Index>(rng.next() % 8), rng);
    worst = std::max(worst, std::abs(sample_dcorr(x, y) - oracle::sample_dcorr_naive(x, y)));
  }
  return {worst <= kTol, fmt("max |closed - naive| = %.3g", worst)};
}

Outcome affine_isometry() {
  constexpr double kAffineTol = 1e-8;
  constexpr double kIsometryTol = 1e-9;
  SplitMix64 rng(1002);
  double worst_affine = 0.0, worst_iso = 0.0;
  for (const double alpha : {0.5, -2.0}) {
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.next() % 8);
      const Eigen::MatrixXd x = random_normal(16, d, rng);
      const Eigen::RowVectorXd c = random_normal(1, d, rng) * 3.0;
      const Eigen::MatrixXd y = (alpha * x).rowwise() + c;
      worst_affine = std::max(worst_affine, std::abs(sample_dcorr(x, y) - 1.0));
    }
  }
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.next() % 8);
    const Eigen::MatrixXd x = random_normal(16, d, rng);
    const Eigen::MatrixXd q = testing::random_orthogonal(d, rng);
    worst_iso = std::max(worst_iso, std::abs(sample_dcorr(x, x * q.transpose()) - 1.0));
  }
  return {worst_affine <= kAffineTol && worst_iso <= kIsometryTol,
          fmt("affine max |R2 - 1| = %.3g", worst_affine) + fmt(", isometry max |R2 - 1| = %.3g", worst_iso)};
}

Outcome independence_trend() {
  std::vector<double> medians;
  for (const Eigen::Index n : {16, 64, 256}) {
    std::vector<double> values;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      SplitMix64 rng(SplitMix64::substream(1003, seed * 1000 + static_cast<std::uint64_t>(n)));
      const Eigen::MatrixXd x = random_normal(n, 2, rng);
      const Eigen::MatrixXd y = random_normal(n, 2, rng);
      values.push_back(sample_dcorr(x, y));
    }
    std::sort(values.begin(), values.end());
    medians.push_back(0.5 * (values[49] + values[50]));
  }
  return {medians[0] > medians[1] && medians[1] > medians[2],
          fmt("medians %.4f", medians[0]) + fmt(" > %.4f", medians[1]) + fmt(" > %.4f", medians[2])};
}

Outcome gradient_check() {
  constexpr double kStep = 1e-5;
  constexpr double kTol = 1e-4;
  // Entries whose derivative is below this are compared absolutely.
  constexpr double kFloor = 1e-8;
  SplitMix64 rng(1004);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(rng.next() % 10);
    const Eigen::MatrixXd x = random_normal(n, 1 + static_cast<Eigen::Index>(rng.next() % 4), rng);
    const Eigen::MatrixXd y = random_normal(n, 1 + static_cast<Eigen::Index>(rng.next() % 4), rng);
    const Eigen::MatrixXd g = grad_sample_dcorr(x, y);
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      for (Eigen::Index j = 0; j < y.cols(); ++j) {
        Eigen::MatrixXd yp = y, ym = y;
        yp(i, j) += kStep;
        ym(i, j) -= kStep;
        const double fd = (sample_dcorr(x, yp) - sample_dcorr(x, ym)) / (2 * kStep);
        worst = std::max(worst, std::abs(g(i, j) - fd) / std::max(std::abs(fd), kFloor));
      }
    }
  }
  return {worst <= kTol, fmt("max relative error %.3g", worst)};
}

Outcome toy_relationships() {
  // Frozen from an oracle run: the quadratic case gives R2 near 0.25,
  // i.e. a distance correlation near 0.5.
  constexpr double kPearsonMax = 0.1;
  constexpr double kDcorrMin = 0.3;
  constexpr double kRSquaredMin = 0.2;
  constexpr double kLinearMin = 0.99;
  const ToySeries s = toy_series(1000, 1);
  const double quad_p = pearson_corr(s.x, s.quadratic);
  const double quad_r2 = sample_dcorr(s.x, s.quadratic);
  const double lin_p = pearson_corr(s.x, s.linear);
  const double lin_r2 = sample_dcorr(s.x, s.linear);
  const bool ok = std::abs(quad_p) < kPearsonMax && std::sqrt(quad_r2) > kDcorrMin && quad_r2 > kRSquaredMin &&
                  lin_p >= kLinearMin && std::sqrt(lin_r2) >= kLinearMin && lin_r2 >= kLinearMin;
  return {ok, fmt("quadratic pearson %.4f", quad_p) + fmt(" R2 %.4f", quad_r2) + fmt(" dcorr %.4f", std::sqrt(quad_r2)) +
                  fmt("; linear pearson %.4f", lin_p) + fmt(" R2 %.4f", lin_r2)};
}

const BackboneWeights& test_backbone() {
  static const BackboneWeights w = generate_test_backbone(0, 8);
  return w;
}

Outcome metric_identities() {
  constexpr double kSelfTol = 1e-6;
  constexpr double kSymTol = 1e-9;
  constexpr Eigen::Index kShortSide = 64;
  SplitMix64 rng(1006);
  double worst_self = 0.0, worst_sym = 0.0, lo = 1.0, hi = 0.0;
  for (std::uint64_t pair = 0; pair < 50; ++pair) {
    const Eigen::Index h = 64 + static_cast<Eigen::Index>(rng.next() % 32);
    const Eigen::Index w = 64 + static_cast<Eigen::Index>(rng.next() % 32);
    const Image x = testing::synthetic_image(h, w, rng.next());
    Image y;
    switch (pair % 3) {
      case 0: y = testing::add_gaussian_noise(x, rng.uniform(0.01, 0.3), rng.next()); break;
      case 1: y = testing::synthetic_image(h, w, rng.next()); break;
      default: y = testing::noise_image(h, w, rng.next()); break;
    }
    const double xy = deepdc_score(x, y, test_backbone(), kShortSide).value;
    const double yx = deepdc_score(y, x, test_backbone(), kShortSide).value;
    worst_self = std::max(worst_self, std::abs(deepdc_score(x, x, test_backbone(), kShortSide).value));
    worst_sym = std::max(worst_sym, std::abs(xy - yx));
    lo = std::min({lo, xy, yx});
    hi = std::max({hi, xy, yx});
  }
  return {worst_self <= kSelfTol && worst_sym <= kSymTol && lo >= 0.0 && hi <= 1.0,
          fmt("max D(x,x) %.3g", worst_self) + fmt(", max asymmetry %.3g", worst_sym) + fmt(", D in [%.4f", lo) +
              fmt(", %.4f]", hi)};
}

Outcome noise_monotonicity() {
  std::ostringstream detail;
  bool ok = true;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Image ref = testing::synthetic_image(64, 64, 2000 + seed);
    double last = -1.0;
    detail << (seed ? "; " : "") << "img" << seed;
    for (const double sigma : {0.02, 0.08, 0.2}) {
      const double d = deepdc_score(ref, testing::add_gaussian_noise(ref, sigma, 3000 + seed), test_backbone(), 64).value;
      ok = ok && d > last;
      last = d;
      detail << ' ' << fmt("%.4f", d);
    }
  }
  return {ok, detail.str()};
}

Outcome evaluation_harness() {
  constexpr double kPlccMin = 0.999;
  SplitMix64 rng(1008);
  double worst_plcc = 1.0;
  for (int trial = 0; trial < 20; ++trial) {
    LogisticParams truth;
    truth.eta1 = rng.uniform(20, 80) * (rng.coin() ? 1 : -1);
    truth.eta2 = rng.uniform(4, 15);
    truth.eta3 = rng.uniform(0.3, 0.7);
    truth.eta4 = rng.uniform(-5, 5);
    truth.eta5 = rng.uniform(30, 70);
    Eigen::VectorXd d(200);
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = rng.uniform();
    Eigen::VectorXd mos = truth(d);
    const double range = mos.maxCoeff() - mos.minCoeff();
    for (Eigen::Index i = 0; i < mos.size(); ++i) mos(i) += 1e-3 * range * rng.normal();
    worst_plcc = std::min(worst_plcc, plcc_fitted(d, mos).plcc);
  }

  bool srcc_exact = true;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd d(50), mos(50);
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      d(i) = rng.uniform(0.0, 2.0);
      mos(i) = d(i) + 0.5 * rng.normal();
    }
    const double base = srcc(d, mos);
    srcc_exact = srcc_exact && srcc(d.array().cube().matrix(), mos) == base && srcc(d.array().exp().matrix(), mos) == base;
  }

  bool twoafc_ok = twoafc_score(0.3, 0.3, 0.8) == 0.5;
  for (int trial = 0; trial < 1000; ++trial) {
    const double a = rng.uniform(), b = rng.uniform(), p = rng.uniform();
    const double s = twoafc_score(a, b, p);
    twoafc_ok = twoafc_ok && s >= 0.0 && s <= 1.0 && std::abs(s + twoafc_score(b, a, p) - 1.0) <= 1e-15 &&
                s == (a < b ? p : 1.0 - p);
  }
  return {worst_plcc >= kPlccMin && srcc_exact && twoafc_ok,
          fmt("min PLCC %.6f", worst_plcc) + ", SRCC invariance " + (srcc_exact ? "exact" : "BROKEN") +
              ", 2AFC identities " + (twoafc_ok ? "hold" : "BROKEN")};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome gt_generator() {
  const fs::path dir = testing::scratch_dir("acceptance_gt");
  DatasetManifest src{dir / "src", {}};
  fs::create_directories(src.base_dir);
  write_png(testing::synthetic_image(96, 128, 77), src.base_dir / "ref.png");
  for (int i = 0; i < 10; ++i) {
    const std::string name = "img" + std::to_string(i) + ".png";
    write_png(testing::add_gaussian_noise(testing::synthetic_image(96, 128, 77), 0.02 * (i + 1), i), src.base_dir / name);
    src.records.push_back({"ref.png", name, 10.0 * i + 0.25});
  }
  GtConfig cfg;
  cfg.seed = 42;
  const GtDatasetResult a = build_gt_dataset(src, cfg, dir / "a");
  const GtDatasetResult b = build_gt_dataset(src, cfg, dir / "b");

  bool multiplicity = a.errors.empty() && a.manifest.records.size() == 5 * src.records.size();
  bool mos_kept = multiplicity;
  bool dims_kept = multiplicity;
  for (std::size_t i = 0; multiplicity && i < a.manifest.records.size(); ++i) {
    const auto& rec = a.manifest.records[i];
    mos_kept = mos_kept && rec.mos == src.records[i / 5].mos;
    const Image out = read_image(a.manifest.resolve(rec.dist));
    dims_kept = dims_kept && out.height() == 96 && out.width() == 128;
  }
  bool deterministic = slurp(dir / "a" / "manifest.csv") == slurp(dir / "b" / "manifest.csv");
  for (std::size_t i = 0; i < a.manifest.records.size(); ++i) {
    if (i % 5 == 0) continue;
    const std::string& name = a.manifest.records[i].dist;
    deterministic = deterministic && slurp(dir / "a" / name) == slurp(dir / "b" / name);
  }

  // Count identity on a mocked full-size manifest of tiny placeholder images.
  DatasetManifest mock{dir / "mock", {}};
  fs::create_directories(mock.base_dir);
  const Image placeholder(8, 8, 0.5f);
  for (int i = 0; i < 866; ++i) {
    const std::string name = "p" + std::to_string(i) + ".png";
    write_png(placeholder, mock.base_dir / name);
    mock.records.push_back({name, name, 0.0});
  }
  const GtDatasetResult full = build_gt_dataset(mock, cfg, dir / "mock_out");
  const bool count = full.errors.empty() && full.manifest.records.size() == 4330;

  std::ostringstream detail;
  detail << a.manifest.records.size() << " rows from 10, MOS " << (mos_kept ? "kept" : "CHANGED") << ", dims "
         << (dims_kept ? "kept" : "CHANGED") << ", rerun " << (deterministic ? "byte-identical" : "DIFFERS") << ", 866 -> "
         << full.manifest.records.size();
  return {multiplicity && mos_kept && dims_kept && deterministic && count, detail.str()};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"oracle equivalence", 5, oracle_equivalence},
      {"affine and isometry invariance", 5, affine_isometry},
      {"independence trend", 30, independence_trend},
      {"gradient vs finite differences", 10, gradient_check},
      {"linear vs nonlinear toy", 1, toy_relationships},
      {"metric identities", 60, metric_identities},
      {"noise monotonicity", 60, noise_monotonicity},
      {"evaluation harness", 5, evaluation_harness},
      {"geometric-transform dataset", 30, gt_generator},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = outcome.ok && in_time;
    failures += !pass;
    std::printf("%s  %-32s %s [%.2f s of %.0f s%s]\n", pass ? "PASS" : "FAIL", c.name, outcome.detail.c_str(), secs,
                c.budget_s, in_time ? "" : ", over budget");
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failures), criteria.size());
  return failures == 0 ? 0 : 1;
}
