#include "deepdc/evalkit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "deepdc/error.hpp"
#include "deepdc/image.hpp"
#include "deepdc/metric.hpp"

namespace deepdc {

namespace {

void require_series(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                    Eigen::Index min_n) {
  if (a.size() != b.size()) throw Error(ErrorCode::ShapeMismatch, "series differ in length");
  if (a.size() < min_n)
    throw Error(ErrorCode::InsufficientData, "need at least " + std::to_string(min_n) + " observations");
  if (!a.allFinite() || !b.allFinite()) throw Error(ErrorCode::NonFiniteInput, "series has non-finite values");
}

double population_std(const Eigen::VectorXd& v) {
  return std::sqrt((v.array() - v.mean()).square().mean());
}

double median(Eigen::VectorXd v) {
  std::sort(v.data(), v.data() + v.size());
  const Eigen::Index n = v.size();
  return n % 2 ? v(n / 2) : 0.5 * (v(n / 2 - 1) + v(n / 2));
}

using Point = Eigen::Matrix<double, 5, 1>;

struct SimplexResult {
  Point x;
  double f = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Nelder-Mead with the standard reflection/expansion/contraction/shrink
// coefficients (1, 2, 1/2, 1/2).
SimplexResult nelder_mead(const std::function<double(const Point&)>& f, const Point& start, double step,
                          int max_iterations, double tolerance) {
  std::array<Point, 6> simplex;
  std::array<double, 6> values;
  simplex[0] = start;
  for (int i = 0; i < 5; ++i) {
    simplex[i + 1] = start;
    simplex[i + 1](i) += std::abs(start(i)) > 1e-8 ? step * std::abs(start(i)) : step;
  }
  for (int i = 0; i < 6; ++i) values[i] = f(simplex[i]);

  std::array<int, 6> order;
  SimplexResult result;
  for (result.iterations = 0; result.iterations < max_iterations; ++result.iterations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
    const int best = order[0], worst = order[5], second = order[4];
    const double spread = values[worst] - values[best];
    double diameter = 0.0;
    for (int i = 1; i < 6; ++i) diameter = std::max(diameter, (simplex[order[i]] - simplex[best]).cwiseAbs().maxCoeff());
    if (spread <= tolerance * (std::abs(values[best]) + 1e-300) || diameter <= 1e-14) {
      result.converged = true;
      break;
    }

    Point centroid = Point::Zero();
    for (int i = 0; i < 5; ++i) centroid += simplex[order[i]];
    centroid /= 5.0;

    const Point reflected = centroid + (centroid - simplex[worst]);
    const double f_reflected = f(reflected);
    if (f_reflected < values[best]) {
      const Point expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double f_expanded = f(expanded);
      if (f_expanded < f_reflected) {
        simplex[worst] = expanded;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < values[second]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
      continue;
    }
    const bool outside = f_reflected < values[worst];
    const Point contracted =
        outside ? Point(centroid + 0.5 * (reflected - centroid)) : Point(centroid + 0.5 * (simplex[worst] - centroid));
    const double f_contracted = f(contracted);
    if (f_contracted < std::min(f_reflected, values[worst])) {
      simplex[worst] = contracted;
      values[worst] = f_contracted;
      continue;
    }
    for (int i = 1; i < 6; ++i) {
      const int k = order[i];
      simplex[k] = simplex[best] + 0.5 * (simplex[k] - simplex[best]);
      values[k] = f(simplex[k]);
    }
  }
  const auto best = std::min_element(values.begin(), values.end()) - values.begin();
  result.x = simplex[best];
  result.f = values[best];
  return result;
}

double logistic(const Point& p, double z) {
  return p(0) * (0.5 - 1.0 / (1.0 + std::exp(p(1) * (z - p(2))))) + p(3) * z + p(4);
}

}  // namespace

Eigen::VectorXd average_ranks(const Eigen::Ref<const Eigen::VectorXd>& values) {
  const Eigen::Index n = values.size();
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return values(a) < values(b); });
  Eigen::VectorXd ranks(n);
  for (Eigen::Index i = 0; i < n;) {
    Eigen::Index j = i;
    while (j + 1 < n && values(idx[j + 1]) == values(idx[i])) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Eigen::Index k = i; k <= j; ++k) ranks(idx[k]) = rank;
    i = j + 1;
  }
  return ranks;
}

double srcc(const Eigen::Ref<const Eigen::VectorXd>& pred, const Eigen::Ref<const Eigen::VectorXd>& mos) {
  require_series(pred, mos, 2);
  return pearson_corr(average_ranks(pred), average_ranks(mos));
}

double LogisticParams::operator()(double d) const {
  return eta1 * (0.5 - 1.0 / (1.0 + std::exp(eta2 * (d - eta3)))) + eta4 * d + eta5;
}

Eigen::VectorXd LogisticParams::operator()(const Eigen::Ref<const Eigen::VectorXd>& d) const {
  return d.unaryExpr([this](double v) { return (*this)(v); });
}

LogisticParams fit_logistic(const Eigen::Ref<const Eigen::VectorXd>& pred, const Eigen::Ref<const Eigen::VectorXd>& mos) {
  constexpr int kMaxIterations = 10000;
  constexpr double kTolerance = 1e-10;
  constexpr int kRestarts = 4;
  require_series(pred, mos, 5);

  const Eigen::VectorXd d = pred;
  const Eigen::VectorXd m = mos;
  const double mu_d = d.mean();
  const double sd_d = population_std(d);
  if (!(sd_d > 0.0)) throw Error(ErrorCode::FitFailed, "predictions are constant");
  const double mu_m = m.mean();
  double sd_m = population_std(m);
  if (!(sd_m > 0.0)) sd_m = 1.0;

  // Fit in standardized coordinates; parameters are mapped back at the end.
  const Eigen::VectorXd z = (d.array() - mu_d) / sd_d;
  const Eigen::VectorXd y = (m.array() - mu_m) / sd_m;
  const auto sse = [&](const Point& p) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double r = logistic(p, z(i)) - y(i);
      acc += r * r;
    }
    return std::isfinite(acc) ? acc / static_cast<double>(z.size()) : std::numeric_limits<double>::infinity();
  };

  // eta3 = median(D), eta1 = range(mos), eta2 = +-1/std(D), eta4 = 0, eta5 = mean(mos).
  const double range = (m.maxCoeff() - m.minCoeff()) / sd_m;
  const double center = (median(d) - mu_d) / sd_d;
  SimplexResult best;
  best.f = std::numeric_limits<double>::infinity();
  for (const double sign : {1.0, -1.0}) {
    Point start;
    start << range, sign, center, 0.0, 0.0;
    SimplexResult run = nelder_mead(sse, start, 0.2, kMaxIterations, kTolerance);
    for (int r = 0; r < kRestarts && run.converged; ++r) {
      SimplexResult again = nelder_mead(sse, run.x, 0.05, kMaxIterations, kTolerance);
      const bool stalled = !(again.f < run.f * (1.0 - 1e-6));
      if (again.f <= run.f) run = again;
      if (stalled) break;
    }
    if (run.f < best.f) best = run;
  }

  // Straight line in standardized coordinates: slope = corr, intercept = 0.
  const double slope = (z.array() * y.array()).mean();
  Point line;
  line << 0.0, 1.0, 0.0, slope, 0.0;
  const double line_f = sse(line);

  Point p = best.x;
  LogisticParams out;
  out.converged = best.converged;
  if (!std::isfinite(best.f) || !p.allFinite() || line_f < best.f) {
    if (!std::isfinite(line_f)) throw Error(ErrorCode::FitFailed, "logistic and linear fits both failed");
    p = line;
    out.linear_fallback = true;
  }
  out.eta1 = sd_m * p(0);
  out.eta2 = p(1) / sd_d;
  out.eta3 = mu_d + sd_d * p(2);
  out.eta4 = sd_m * p(3) / sd_d;
  out.eta5 = sd_m * (p(4) - p(3) * mu_d / sd_d) + mu_m;
  return out;
}

PlccResult plcc_fitted(const Eigen::Ref<const Eigen::VectorXd>& pred, const Eigen::Ref<const Eigen::VectorXd>& mos) {
  require_series(pred, mos, 2);
  if (population_std(pred) == 0.0 || population_std(mos) == 0.0)
    throw Error(ErrorCode::ConstantInput, "series has zero variance");
  PlccResult result;
  bool fitted = false;
  if (pred.size() >= 5) {
    try {
      result.params = fit_logistic(pred, mos);
      fitted = true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::FitFailed) throw;
    }
  }
  if (!fitted) {
    const double slope = pearson_corr(pred, mos) * population_std(mos) / population_std(pred);
    result.params = LogisticParams{};
    result.params.eta4 = slope;
    result.params.eta5 = mos.mean() - slope * pred.mean();
    result.params.linear_fallback = true;
  }
  const Eigen::VectorXd mapped = result.params(pred);
  if (population_std(mapped) == 0.0) {
    result.plcc = 0.0;
    return result;
  }
  result.plcc = pearson_corr(mapped, mos);
  return result;
}

double twoafc_score(double d_a, double d_b, double human_pref_a) {
  if (!std::isfinite(d_a) || !std::isfinite(d_b) || !std::isfinite(human_pref_a))
    throw Error(ErrorCode::NonFiniteInput, "2AFC inputs must be finite");
  if (d_a < d_b) return human_pref_a;
  if (d_a > d_b) return 1.0 - human_pref_a;
  return 0.5;
}

EvalReport evaluate_predictions(std::vector<Prediction> predictions, std::vector<RecordError> errors) {
  if (predictions.size() < 2)
    throw Error(ErrorCode::InsufficientData, "need at least two scored records, have " +
                                                 std::to_string(predictions.size()));
  const auto n = static_cast<Eigen::Index>(predictions.size());
  Eigen::VectorXd d(n), mos(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i) = predictions[i].score;
    mos(i) = predictions[i].mos;
  }
  EvalReport report;
  // Correlations are reported in quality orientation: lower D, higher MOS.
  report.srcc = srcc(-d, mos);
  const PlccResult plcc = plcc_fitted(d, mos);
  report.plcc = plcc.plcc;
  report.params = plcc.params;
  report.predictions = std::move(predictions);
  report.errors = std::move(errors);
  return report;
}

EvalReport evaluate_manifest(const DatasetManifest& manifest, const BackboneWeights& weights, Eigen::Index short_side,
                             const DcorConfig& cfg) {
  std::vector<Prediction> predictions;
  std::vector<RecordError> errors;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const auto& rec = manifest.records[i];
    try {
      const Image ref = read_image(manifest.resolve(rec.ref));
      const Image dist = read_image(manifest.resolve(rec.dist));
      const QualityScore score = deepdc_score(ref, dist, weights, short_side, cfg);
      predictions.push_back({rec.ref, rec.dist, rec.mos, score.value});
    } catch (const Error& e) {
      errors.push_back({i, e.what()});
    }
  }
  return evaluate_predictions(std::move(predictions), std::move(errors));
}

std::string report_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["srcc"] = report.srcc;
  j["plcc"] = report.plcc;
  j["logistic"] = {{"eta1", report.params.eta1},
                   {"eta2", report.params.eta2},
                   {"eta3", report.params.eta3},
                   {"eta4", report.params.eta4},
                   {"eta5", report.params.eta5},
                   {"converged", report.params.converged},
                   {"linear_fallback", report.params.linear_fallback}};
  auto& preds = j["predictions"] = nlohmann::ordered_json::array();
  for (const auto& p : report.predictions)
    preds.push_back({{"ref", p.ref}, {"dist", p.dist}, {"mos", p.mos}, {"deepdc", p.score}});
  auto& errs = j["errors"] = nlohmann::ordered_json::array();
  for (const auto& e : report.errors) errs.push_back({{"index", e.index}, {"message", e.message}});
  return j.dump(2) + "\n";
}

}  // namespace deepdc
