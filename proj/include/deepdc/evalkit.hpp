#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "deepdc/backbone.hpp"
#include "deepdc/dcor.hpp"

namespace deepdc {

struct ManifestRecord {
  std::string ref;
  std::string dist;
  double mos = 0.0;
};

/// Rows of a `ref,dist,mos` CSV. Paths stay as written; resolve them
/// against `base_dir`.
struct DatasetManifest {
  std::filesystem::path base_dir;
  std::vector<ManifestRecord> records;

  std::filesystem::path resolve(const std::string& relative) const { return base_dir / relative; }
};

DatasetManifest read_manifest(const std::filesystem::path& csv_path);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& csv_path);
std::string format_manifest(const std::vector<ManifestRecord>& records);

/// Average ranks (1-based); tied values share the mean of their positions.
Eigen::VectorXd average_ranks(const Eigen::Ref<const Eigen::VectorXd>& values);

double srcc(const Eigen::Ref<const Eigen::VectorXd>& pred, const Eigen::Ref<const Eigen::VectorXd>& mos);

struct LogisticParams {
  double eta1 = 0.0;
  double eta2 = 1.0;
  double eta3 = 0.0;
  double eta4 = 0.0;
  double eta5 = 0.0;
  bool converged = false;
  /// True when the values come from the straight-line fallback.
  bool linear_fallback = false;

  /// eta1 * (1/2 - 1/(1 + exp(eta2 (d - eta3)))) + eta4 d + eta5
  double operator()(double d) const;
  Eigen::VectorXd operator()(const Eigen::Ref<const Eigen::VectorXd>& d) const;
};

/// Least-squares fit of the five-parameter logistic mapping by Nelder-Mead.
LogisticParams fit_logistic(const Eigen::Ref<const Eigen::VectorXd>& pred, const Eigen::Ref<const Eigen::VectorXd>& mos);

struct PlccResult {
  double plcc = 0.0;
  LogisticParams params;
};

/// Pearson correlation between logistic-mapped predictions and MOS.
PlccResult plcc_fitted(const Eigen::Ref<const Eigen::VectorXd>& pred, const Eigen::Ref<const Eigen::VectorXd>& mos);

/// Agreement of the model's choice with the human vote share for A.
/// Lower distance is the model's preference; exact ties score 0.5.
double twoafc_score(double d_a, double d_b, double human_pref_a);

struct Prediction {
  std::string ref;
  std::string dist;
  double mos = 0.0;
  double score = 0.0;
};

struct RecordError {
  std::size_t index = 0;
  std::string message;
};

struct EvalReport {
  double srcc = 0.0;
  double plcc = 0.0;
  LogisticParams params;
  std::vector<Prediction> predictions;
  std::vector<RecordError> errors;
};

/// Scores every pair, then correlates scores with MOS. Records that fail to
/// decode or score are listed in `errors` and skipped.
EvalReport evaluate_manifest(const DatasetManifest& manifest, const BackboneWeights& weights,
                             Eigen::Index short_side = 224, const DcorConfig& cfg = {});

/// Correlations over already computed predictions.
EvalReport evaluate_predictions(std::vector<Prediction> predictions, std::vector<RecordError> errors = {});

std::string report_json(const EvalReport& report);

}  // namespace deepdc
