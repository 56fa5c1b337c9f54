#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "core/features.hpp"
#include "core/ingest.hpp"
#include "core/model.hpp"

namespace gaitscreen::eval {

// Counts are real-valued so that averaged columns (e.g. mean of the H and L
// orientations, 3.5 cows) go through the same formulas.
struct ConfusionCounts {
  double tp = 0.0;
  double fp = 0.0;
  double fn = 0.0;
  double tn = 0.0;

  double total() const { return tp + fp + fn + tn; }
  // Same predictions read with the other class as positive.
  ConfusionCounts swapped() const { return {tn, fn, fp, tp}; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

ConfusionCounts mean_counts(const ConfusionCounts& a, const ConfusionCounts& b);

// predicted/actual in {+1, -1}; `positive` selects the orientation.
ConfusionCounts confusion(std::span<const int> predicted, std::span<const int> actual, int positive);

// Percentages at full precision.
struct Metrics {
  double sensitivity = 0.0;
  double specificity = 0.0;
  double precision = 0.0;
  double accuracy = 0.0;
  bool degenerate_rate = false;  // some ratio was 0/0 and reported as 0

  struct Rounded {
    long precision, sensitivity, specificity, accuracy;
    friend bool operator==(const Rounded&, const Rounded&) = default;
  };
  // Integer percentages, half away from zero.
  Rounded rounded() const;
};

Metrics metrics(const ConfusionCounts& c);

struct RocPoint {
  double fpr;
  double tpr;
  double threshold;  // score >= threshold counts as positive; +inf for the origin
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

// Sweep over unique scores (descending), trapezoidal area. Ties are one
// step, so the area equals the Mann-Whitney statistic with half-credit ties.
RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels, int positive = 1);

// ---------------------------------------------------------------------------
// Benchmark protocols

struct ProtocolConfig {
  features::FeatureConfig features;
  model::SvmOptions svm;
  std::size_t folds = 10;
  std::uint64_t seed = 1;
  double test_fraction = 0.3;
  features::ChannelGroup group = features::ChannelGroup::All;
  features::FeatureFamily family = features::FeatureFamily::All;
  ingest::ParseOptions parse;
  unsigned jobs = 1;
};

// Per-cow 12-channel (4440-wide) features, computed once and shared by arms.
struct FeatureTable {
  std::vector<std::string> cow_ids;
  std::vector<int> scores;
  model::Matrix rows;
};

FeatureTable extract_features(const ingest::DatasetManifest& manifest, const ProtocolConfig& config);

struct OrientationResult {
  std::string name;  // "H", "L", "Avg" or "S<k>", "Macro"
  ConfusionCounts counts;
  Metrics metrics;
};

struct FoldResult {
  std::size_t fold = 0;
  std::size_t n_test = 0;
  std::vector<OrientationResult> orientations;
  double auc = 0.0;
  RocCurve roc;  // healthy as positive; empty for multi-class
  bool degenerate = false;  // test set lacks a class; excluded from summaries
  std::vector<std::string> test_cows;
  std::vector<double> test_scores;
};

struct Scenario {
  std::string name;  // worst / average / best
  std::size_t fold = 0;  // source fold (worst/best); folds.size() for the average
  std::vector<OrientationResult> orientations;
  double auc = 0.0;
};

struct ProtocolReport {
  std::string protocol;
  std::string arm;
  std::size_t n_features = 0;
  std::vector<FoldResult> folds;
  std::array<Scenario, 3> scenarios;  // worst, average, best

  // Accuracy of the Avg (binary) or Macro (multi-class) orientation.
  double scenario_accuracy(std::size_t s) const;
  double mean_auc() const { return scenarios[1].auc; }
};

ProtocolReport run_protocol1(const FeatureTable& table, const ProtocolConfig& config);
ProtocolReport run_protocol1(const ingest::DatasetManifest& manifest, const ProtocolConfig& config);

struct AblationReport {
  std::vector<ProtocolReport> group_arms;   // accel, gravity, gyro, attitude
  std::vector<ProtocolReport> family_arms;  // czt, cdf
  std::vector<std::string> group_ranking;   // by average accuracy, best first
  std::vector<std::string> family_ranking;
};

AblationReport run_protocol2(const FeatureTable& table, const ProtocolConfig& config);
AblationReport run_protocol2(const ingest::DatasetManifest& manifest, const ProtocolConfig& config);

ProtocolReport run_multiclass(const FeatureTable& table, const ProtocolConfig& config);
ProtocolReport run_multiclass(const ingest::DatasetManifest& manifest, const ProtocolConfig& config);

// Key/value echo of the fully resolved configuration.
using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

// Long format: protocol,arm,fold,orientation,metric,value
std::string report_csv(std::span<const ProtocolReport> reports, const ConfigEcho& config);
// Table laid out as worst | average | best, each with H, L, Avg columns.
std::string report_text(const ProtocolReport& report);
std::string roc_csv(const RocCurve& roc);

}  // namespace gaitscreen::eval
