#include "core/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/text.hpp"

namespace gaitscreen::model {

namespace {

constexpr double kTau = 1e-12;
constexpr double kAlphaEps = 1e-12;

double resolve_gamma(const KernelParams& p, std::size_t dim) {
  return p.gamma > 0.0 ? p.gamma : 1.0 / static_cast<double>(std::max<std::size_t>(dim, 1));
}

double eval_kernel(std::span<const double> u, std::span<const double> v, const KernelParams& p, double gamma) {
  double dot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
  const double base = gamma * dot + p.coef0;
  double out = 1.0;
  for (int d = 0; d < p.degree; ++d) out *= base;
  return out;
}

// Sequential minimal optimization on
//   min 1/2 a'Qa - e'a,  0 <= a_i <= C,  y'a = 0,  Q_ij = y_i y_j K_ij
// with second-order working-pair selection.
struct SmoResult {
  std::vector<double> alpha;
  double rho = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

SmoResult solve_dual(const std::vector<double>& kmat, std::span<const int> y, double c, double tol,
                     std::size_t max_iter) {
  const std::size_t n = y.size();
  auto q = [&](std::size_t i, std::size_t j) { return y[i] * y[j] * kmat[i * n + j]; };
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);
  auto is_upper = [&](std::size_t t) { return alpha[t] >= c; };
  auto is_lower = [&](std::size_t t) { return alpha[t] <= 0.0; };
  auto in_up = [&](std::size_t t) { return y[t] == 1 ? !is_upper(t) : !is_lower(t); };
  auto in_low = [&](std::size_t t) { return y[t] == 1 ? !is_lower(t) : !is_upper(t); };

  SmoResult r;
  std::size_t iter = 0;
  for (; iter < max_iter; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (in_up(t) && -y[t] * grad[t] > gmax) {
        gmax = -y[t] * grad[t];
        i = t;
      }
    }
    double gmin = std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double v = -y[t] * grad[t];
      gmin = std::min(gmin, v);
      if (i == n) continue;
      const double b = gmax - v;
      if (b > 0.0) {
        double a = q(i, i) + q(t, t) - 2.0 * y[i] * y[t] * q(i, t);
        if (a <= 0.0) a = kTau;
        const double obj = -(b * b) / a;
        if (obj < best) {
          best = obj;
          j = t;
        }
      }
    }
    if (i == n || j == n || gmax - gmin < tol) {
      r.converged = true;
      break;
    }

    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    if (y[i] != y[j]) {
      double quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double dai = alpha[i] - old_ai;
    const double daj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) grad[t] += q(t, i) * dai + q(t, j) * daj;
  }
  r.iterations = iter;

  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (is_upper(t)) {
      if (y[t] == -1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (is_lower(t)) {
      if (y[t] == 1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  r.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
  r.alpha = std::move(alpha);
  return r;
}

void check_matrix(const Matrix& x, std::size_t expected_rows) {
  if (x.empty()) fail(ErrorCode::InvalidArgument, "empty training matrix");
  if (x.size() != expected_rows)
    fail(ErrorCode::DimensionMismatch, std::to_string(x.size()) + " rows but " + std::to_string(expected_rows) + " labels");
  const std::size_t dim = x.front().size();
  for (const auto& row : x) {
    if (row.size() != dim) fail(ErrorCode::DimensionMismatch, "ragged feature matrix");
    for (double v : row)
      if (!std::isfinite(v)) fail(ErrorCode::NonFiniteFeature, "training matrix contains a non-finite value");
  }
}

}  // namespace

double kernel(std::span<const double> u, std::span<const double> v, const KernelParams& params) {
  if (u.size() != v.size())
    fail(ErrorCode::DimensionMismatch, "kernel operands of size " + std::to_string(u.size()) + " and " + std::to_string(v.size()));
  return eval_kernel(u, v, params, resolve_gamma(params, u.size()));
}

std::vector<double> TrainedModel::transform(std::span<const double> x) const {
  if (x.size() != dim)
    fail(ErrorCode::DimensionMismatch, "model expects " + std::to_string(dim) + " features, got " + std::to_string(x.size()));
  std::vector<double> out(x.begin(), x.end());
  if (standardize)
    for (std::size_t i = 0; i < dim; ++i) out[i] = (out[i] - feature_mean[i]) / feature_scale[i];
  return out;
}

TrainedModel train_svm(const Matrix& x, std::span<const int> y, const SvmOptions& options) {
  check_matrix(x, y.size());
  bool has_pos = false, has_neg = false;
  for (int label : y) {
    if (label == 1) has_pos = true;
    else if (label == -1) has_neg = true;
    else fail(ErrorCode::InvalidArgument, "labels must be +1 or -1");
  }
  if (!has_pos || !has_neg) fail(ErrorCode::SingleClass, "training labels contain a single class");
  if (!(options.C > 0.0)) fail(ErrorCode::InvalidArgument, "box constraint C must be positive");
  if (options.kernel.degree < 1) fail(ErrorCode::InvalidArgument, "kernel degree must be >= 1");

  const std::size_t n = x.size();
  const std::size_t dim = x.front().size();
  TrainedModel m;
  m.C = options.C;
  m.dim = dim;
  m.standardize = options.standardize;
  m.kernel = options.kernel;
  m.kernel.gamma = resolve_gamma(options.kernel, dim);
  m.feature_mean.assign(dim, 0.0);
  m.feature_scale.assign(dim, 1.0);
  if (options.standardize) {
    for (const auto& row : x)
      for (std::size_t d = 0; d < dim; ++d) m.feature_mean[d] += row[d];
    for (double& v : m.feature_mean) v /= static_cast<double>(n);
    std::vector<double> var(dim, 0.0);
    for (const auto& row : x)
      for (std::size_t d = 0; d < dim; ++d) var[d] += (row[d] - m.feature_mean[d]) * (row[d] - m.feature_mean[d]);
    for (std::size_t d = 0; d < dim; ++d) {
      const double sd = std::sqrt(var[d] / static_cast<double>(n));
      // Constant columns stay centered at zero instead of amplifying rounding.
      m.feature_scale[d] = sd > 1e-12 * std::max(1.0, std::abs(m.feature_mean[d])) ? sd : 1.0;
    }
  }
  Matrix z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = m.transform(x[i]);

  std::vector<double> kmat(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      kmat[i * n + j] = kmat[j * n + i] = eval_kernel(z[i], z[j], m.kernel, m.kernel.gamma);

  // Solve in a canonical orientation (first label +1) so that flipping every
  // label yields the identical problem and exactly negated outputs.
  const int orient = y[0];
  std::vector<int> yc(y.begin(), y.end());
  for (int& v : yc) v *= orient;

  SmoResult r = solve_dual(kmat, yc, options.C, options.tol, options.max_iter);
  m.iterations = r.iterations;
  m.converged = r.converged;
  m.bias = -r.rho * orient;

  double sum_alpha = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (r.alpha[i] <= kAlphaEps) continue;
    sum_alpha += r.alpha[i];
    m.support_indices.push_back(i);
    m.support_vectors.push_back(z[i]);
    m.dual_coef.push_back(r.alpha[i] * yc[i] * orient);
  }
  double quad = 0.0;
  for (std::size_t a = 0; a < m.support_indices.size(); ++a)
    for (std::size_t b = 0; b < m.support_indices.size(); ++b)
      quad += m.dual_coef[a] * m.dual_coef[b] * kmat[m.support_indices[a] * n + m.support_indices[b]];
  m.dual_objective = sum_alpha - 0.5 * quad;
  return m;
}

double decision_value(const TrainedModel& m, std::span<const double> x) {
  const auto z = m.transform(x);
  double sum = 0.0;
  for (std::size_t i = 0; i < m.support_vectors.size(); ++i)
    sum += m.dual_coef[i] * eval_kernel(m.support_vectors[i], z, m.kernel, m.kernel.gamma);
  return sum + m.bias;
}

int predict(const TrainedModel& m, std::span<const double> x) { return decision_value(m, x) >= 0.0 ? 1 : -1; }

std::string serialize_model(const TrainedModel& m) {
  std::ostringstream out;
  auto hex_row = [&](std::span<const double> v) {
    for (double d : v) out << ' ' << text::format_hex(d);
  };
  out << "gaitscreen-svm 1\n";
  out << "degree " << m.kernel.degree << "\n";
  out << "gamma " << text::format_hex(m.kernel.gamma) << "\n";
  out << "coef0 " << text::format_hex(m.kernel.coef0) << "\n";
  out << "C " << text::format_hex(m.C) << "\n";
  out << "bias " << text::format_hex(m.bias) << "\n";
  out << "standardize " << (m.standardize ? 1 : 0) << "\n";
  out << "dim " << m.dim << "\n";
  out << "mean";
  hex_row(m.feature_mean);
  out << "\nscale";
  hex_row(m.feature_scale);
  out << "\nsv " << m.support_vectors.size() << "\n";
  for (std::size_t i = 0; i < m.support_vectors.size(); ++i) {
    out << text::format_hex(m.dual_coef[i]);
    hex_row(m.support_vectors[i]);
    out << "\n";
  }
  return out.str();
}

TrainedModel parse_model(std::string_view content) {
  std::vector<std::string_view> lines;
  for (auto line : text::split(content, '\n')) {
    line = text::trim(line);
    if (!line.empty()) lines.push_back(line);
  }
  std::size_t cursor = 0;
  auto next_fields = [&](std::string_view key) {
    if (cursor >= lines.size()) fail(ErrorCode::Format, "model truncated before '" + std::string(key) + "'");
    auto fields = text::split(lines[cursor++], ' ');
    if (fields.empty() || fields[0] != key)
      fail(ErrorCode::Format, "expected '" + std::string(key) + "' in model file");
    return fields;
  };
  auto num = [](std::string_view tok) {
    double v;
    if (!text::parse_double(tok, v)) fail(ErrorCode::Format, "bad number '" + std::string(tok) + "' in model file");
    return v;
  };
  auto integer = [](std::string_view tok) {
    long long v;
    if (!text::parse_int(tok, v) || v < 0) fail(ErrorCode::Format, "bad integer '" + std::string(tok) + "' in model file");
    return static_cast<std::size_t>(v);
  };

  auto header = next_fields("gaitscreen-svm");
  if (header.size() != 2 || header[1] != "1") fail(ErrorCode::Format, "unsupported model version");
  TrainedModel m;
  m.kernel.degree = static_cast<int>(integer(next_fields("degree").at(1)));
  m.kernel.gamma = num(next_fields("gamma").at(1));
  m.kernel.coef0 = num(next_fields("coef0").at(1));
  m.C = num(next_fields("C").at(1));
  m.bias = num(next_fields("bias").at(1));
  m.standardize = integer(next_fields("standardize").at(1)) != 0;
  m.dim = integer(next_fields("dim").at(1));
  auto mean = next_fields("mean");
  auto scale = next_fields("scale");
  if (mean.size() != m.dim + 1 || scale.size() != m.dim + 1) fail(ErrorCode::Format, "standardization width mismatch");
  for (std::size_t i = 1; i <= m.dim; ++i) {
    m.feature_mean.push_back(num(mean[i]));
    m.feature_scale.push_back(num(scale[i]));
  }
  const std::size_t n_sv = integer(next_fields("sv").at(1));
  for (std::size_t s = 0; s < n_sv; ++s) {
    if (cursor >= lines.size()) fail(ErrorCode::Format, "model truncated in support vectors");
    auto fields = text::split(lines[cursor++], ' ');
    if (fields.size() != m.dim + 1) fail(ErrorCode::Format, "support vector width mismatch");
    m.dual_coef.push_back(num(fields[0]));
    std::vector<double> sv;
    sv.reserve(m.dim);
    for (std::size_t i = 1; i <= m.dim; ++i) sv.push_back(num(fields[i]));
    m.support_vectors.push_back(std::move(sv));
    m.support_indices.push_back(s);
  }
  return m;
}

MulticlassModel train_multiclass(const Matrix& x, std::span<const int> labels, const SvmOptions& options,
                                 unsigned jobs) {
  check_matrix(x, labels.size());
  MulticlassModel mc;
  mc.classes.assign(labels.begin(), labels.end());
  std::sort(mc.classes.begin(), mc.classes.end());
  mc.classes.erase(std::unique(mc.classes.begin(), mc.classes.end()), mc.classes.end());
  if (mc.classes.size() < 2) fail(ErrorCode::SingleClass, "multi-class training needs at least two classes");
  mc.models.resize(mc.classes.size());
  parallel_for(mc.classes.size(), jobs, [&](std::size_t k) {
    std::vector<int> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == mc.classes[k] ? 1 : -1;
    mc.models[k] = train_svm(x, y, options);
  });
  return mc;
}

std::vector<double> decision_values(const MulticlassModel& m, std::span<const double> x) {
  std::vector<double> out;
  out.reserve(m.models.size());
  for (const auto& sub : m.models) out.push_back(decision_value(sub, x));
  return out;
}

int predict(const MulticlassModel& m, std::span<const double> x) {
  const auto scores = decision_values(m, x);
  std::size_t best = 0;
  for (std::size_t k = 1; k < scores.size(); ++k)
    if (scores[k] > scores[best]) best = k;
  return m.classes.at(best);
}

namespace {

// Unbiased draw in [0, bound) from the raw 64-bit engine output, so the
// shuffle is identical on every standard library.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % bound;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

FoldPlan make_folds(std::size_t n_cows, std::span<const int> strata, std::size_t k, std::uint64_t seed,
                    double test_fraction) {
  if (strata.size() != n_cows) fail(ErrorCode::DimensionMismatch, "one stratum label per cow required");
  if (k < 1) fail(ErrorCode::InvalidArgument, "fold count must be >= 1");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) fail(ErrorCode::InvalidArgument, "test fraction must lie in (0, 1)");
  if (n_cows < k) fail(ErrorCode::TooFewCows, std::to_string(n_cows) + " cows for " + std::to_string(k) + " folds");

  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < n_cows; ++i) members[strata[i]].push_back(i);
  if (members.size() < 2) fail(ErrorCode::SingleClass, "fold plan needs at least two classes");
  for (const auto& [label, idx] : members)
    if (idx.size() < 2)
      fail(ErrorCode::TooFewCows, "class " + std::to_string(label) + " has " + std::to_string(idx.size()) + " cow(s), need 2");

  // Each stratum is shuffled by its own stream keyed on its first member, so
  // the plan depends on the partition of cows, not on the label values.
  for (auto& [label, idx] : members) {
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(idx.front())));
    for (std::size_t i = idx.size() - 1; i > 0; --i) std::swap(idx[i], idx[bounded(rng, i + 1)]);
  }

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.test_fraction = test_fraction;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<bool> is_test(n_cows, false);
    for (const auto& [label, idx] : members) {
      const std::size_t nc = idx.size();
      const auto held = static_cast<std::size_t>(
          std::clamp<long>(std::lround(test_fraction * static_cast<double>(nc)), 1, static_cast<long>(nc) - 1));
      const std::size_t offset = f * nc / k;
      for (std::size_t j = 0; j < held; ++j) is_test[idx[(offset + j) % nc]] = true;
    }
    Fold fold;
    for (std::size_t i = 0; i < n_cows; ++i) (is_test[i] ? fold.test : fold.train).push_back(i);
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

}  // namespace gaitscreen::model
