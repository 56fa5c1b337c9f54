#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gaitscreen::model {

using Matrix = std::vector<std::vector<double>>;  // row per example

// (gamma <u, v> + coef0)^degree. gamma <= 0 means 1/dim.
struct KernelParams {
  int degree = 3;
  double gamma = 0.0;
  double coef0 = 1.0;
};

double kernel(std::span<const double> u, std::span<const double> v, const KernelParams& params);

struct SvmOptions {
  double C = 1.0;
  double tol = 1e-3;              // stop when the maximal KKT violation drops below tol
  std::size_t max_iter = 100000;  // pair updates
  bool standardize = true;        // per-dimension z-score from the training rows
  KernelParams kernel;
};

struct TrainedModel {
  KernelParams kernel;  // gamma resolved
  double C = 1.0;
  double bias = 0.0;
  std::size_t dim = 0;
  bool standardize = true;
  std::vector<double> feature_mean;
  std::vector<double> feature_scale;
  Matrix support_vectors;            // standardized
  std::vector<double> dual_coef;     // alpha_i * y_i
  std::vector<std::size_t> support_indices;  // rows of the training matrix
  double dual_objective = 0.0;       // sum(alpha) - 1/2 alpha' Q alpha
  std::size_t iterations = 0;
  bool converged = true;

  std::vector<double> transform(std::span<const double> x) const;
};

// y in {+1, -1}. Deterministic; negating y negates every decision value.
TrainedModel train_svm(const Matrix& x, std::span<const int> y, const SvmOptions& options = {});

// sum_i alpha_i y_i K(s_i, x) + b
double decision_value(const TrainedModel& m, std::span<const double> x);
// +1 when decision_value >= 0.
int predict(const TrainedModel& m, std::span<const double> x);

std::string serialize_model(const TrainedModel& m);
TrainedModel parse_model(std::string_view text);

// One-vs-rest over the distinct labels, sorted ascending.
struct MulticlassModel {
  std::vector<int> classes;
  std::vector<TrainedModel> models;
};

MulticlassModel train_multiclass(const Matrix& x, std::span<const int> labels, const SvmOptions& options = {},
                                 unsigned jobs = 1);
std::vector<double> decision_values(const MulticlassModel& m, std::span<const double> x);
// argmax of the decision values; ties go to the lower class.
int predict(const MulticlassModel& m, std::span<const double> x);

struct Fold {
  std::vector<std::size_t> train;  // indices into the cow list, ascending
  std::vector<std::size_t> test;
};

struct FoldPlan {
  std::size_t k = 10;
  std::uint64_t seed = 0;
  double test_fraction = 0.3;
  std::vector<Fold> folds;
};

// k cow-level folds. Each fold holds out round(test_fraction * n_c) cows of
// every stratum c; hold-out windows rotate through one seeded shuffle per
// stratum, so every cow is tested at least once whenever k * test_fraction >= 1.
FoldPlan make_folds(std::size_t n_cows, std::span<const int> strata, std::size_t k, std::uint64_t seed,
                    double test_fraction = 0.3);

}  // namespace gaitscreen::model
