#include "core/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/text.hpp"

namespace gaitscreen::eval {

ConfusionCounts mean_counts(const ConfusionCounts& a, const ConfusionCounts& b) {
  return {(a.tp + b.tp) / 2.0, (a.fp + b.fp) / 2.0, (a.fn + b.fn) / 2.0, (a.tn + b.tn) / 2.0};
}

ConfusionCounts confusion(std::span<const int> predicted, std::span<const int> actual, int positive) {
  if (predicted.size() != actual.size()) fail(ErrorCode::DimensionMismatch, "prediction/label length mismatch");
  ConfusionCounts c;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const bool p = predicted[i] == positive;
    const bool a = actual[i] == positive;
    if (p && a) c.tp += 1;
    else if (p && !a) c.fp += 1;
    else if (!p && a) c.fn += 1;
    else c.tn += 1;
  }
  return c;
}

Metrics::Rounded Metrics::rounded() const {
  return {std::lround(precision), std::lround(sensitivity), std::lround(specificity), std::lround(accuracy)};
}

Metrics metrics(const ConfusionCounts& c) {
  if (!(c.total() > 0.0)) fail(ErrorCode::EmptyConfusion, "confusion matrix is empty");
  Metrics m;
  auto rate = [&](double num, double den) {
    if (den > 0.0) return 100.0 * num / den;
    m.degenerate_rate = true;
    return 0.0;
  };
  m.sensitivity = rate(c.tp, c.tp + c.fn);
  m.specificity = rate(c.tn, c.tn + c.fp);
  m.precision = rate(c.tp, c.tp + c.fp);
  m.accuracy = rate(c.tp + c.tn, c.total());
  return m;
}

RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels, int positive) {
  if (scores.size() != labels.size()) fail(ErrorCode::DimensionMismatch, "score/label length mismatch");
  double n_pos = 0, n_neg = 0;
  for (int l : labels) (l == positive ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0) fail(ErrorCode::SingleClass, "ROC needs both classes");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve roc;
  roc.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  double tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] == positive ? tp : fp) += 1;
      ++i;
    }
    roc.points.push_back({fp / n_neg, tp / n_pos, s});
  }
  for (std::size_t i = 1; i < roc.points.size(); ++i) {
    const auto& a = roc.points[i - 1];
    const auto& b = roc.points[i];
    roc.auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  return roc;
}

// ---------------------------------------------------------------------------

FeatureTable extract_features(const ingest::DatasetManifest& manifest, const ProtocolConfig& config) {
  FeatureTable table;
  for (const auto& [id, cow] : manifest.cows) {
    table.cow_ids.push_back(id);
    table.scores.push_back(cow.lameness_score);
  }
  table.rows.resize(table.cow_ids.size());
  parallel_for(table.cow_ids.size(), config.jobs, [&](std::size_t i) {
    const auto rec = ingest::load_cow(manifest, table.cow_ids[i], config.parse);
    table.rows[i] = features::assemble_cow_features(rec, features::ChannelGroup::All, config.features, 1);
  });
  return table;
}

namespace {

model::Matrix take(const model::Matrix& rows, std::span<const std::size_t> which,
                   std::span<const std::size_t> columns) {
  model::Matrix out;
  out.reserve(which.size());
  for (std::size_t r : which) {
    std::vector<double> row;
    row.reserve(columns.size());
    for (std::size_t c : columns) row.push_back(rows[r].at(c));
    out.push_back(std::move(row));
  }
  return out;
}

OrientationResult orient(std::string name, const ConfusionCounts& c) {
  return {std::move(name), c, metrics(c)};
}

double orientation_accuracy(const std::vector<OrientationResult>& o) {
  for (const auto& r : o)
    if (r.name == "Avg" || r.name == "Macro") return r.metrics.accuracy;
  return o.empty() ? 0.0 : o.back().metrics.accuracy;
}

// Worst and best folds by summary accuracy (ties: AUC, then fold order).
void pick_extremes(ProtocolReport& report, const std::vector<std::size_t>& valid) {
  auto key = [&](std::size_t f) {
    return std::make_pair(orientation_accuracy(report.folds[f].orientations), report.folds[f].auc);
  };
  std::size_t worst = valid.front(), best = valid.front();
  for (std::size_t f : valid) {
    if (key(f) < key(worst)) worst = f;
    if (key(best) < key(f)) best = f;
  }
  report.scenarios[0] = {"worst", worst, report.folds[worst].orientations, report.folds[worst].auc};
  report.scenarios[2] = {"best", best, report.folds[best].orientations, report.folds[best].auc};
}

std::vector<std::size_t> valid_folds(const ProtocolReport& report) {
  std::vector<std::size_t> valid;
  for (std::size_t f = 0; f < report.folds.size(); ++f)
    if (!report.folds[f].degenerate) valid.push_back(f);
  if (valid.empty()) fail(ErrorCode::SingleClass, "every fold of " + report.arm + " is degenerate");
  return valid;
}

std::vector<int> binary_labels(std::span<const int> scores) {
  std::vector<int> y;
  for (int s : scores) y.push_back(static_cast<int>(ingest::label_for_score(s)));
  return y;
}

ProtocolReport run_binary_arm(const FeatureTable& table, std::span<const std::size_t> columns,
                              const ProtocolConfig& config, std::string protocol, std::string arm) {
  const auto y = binary_labels(table.scores);
  const auto plan = model::make_folds(table.cow_ids.size(), y, config.folds, config.seed, config.test_fraction);

  ProtocolReport report;
  report.protocol = std::move(protocol);
  report.arm = std::move(arm);
  report.n_features = columns.size();
  report.folds.resize(plan.folds.size());
  parallel_for(plan.folds.size(), config.jobs, [&](std::size_t f) {
    const auto& fold = plan.folds[f];
    std::vector<int> y_train;
    for (std::size_t i : fold.train) y_train.push_back(y[i]);
    const auto trained = model::train_svm(take(table.rows, fold.train, columns), y_train, config.svm);
    const auto x_test = take(table.rows, fold.test, columns);

    FoldResult r;
    r.fold = f + 1;
    r.n_test = fold.test.size();
    std::vector<int> actual, predicted;
    for (std::size_t t = 0; t < fold.test.size(); ++t) {
      const double score = model::decision_value(trained, x_test[t]);
      r.test_cows.push_back(table.cow_ids[fold.test[t]]);
      r.test_scores.push_back(score);
      actual.push_back(y[fold.test[t]]);
      predicted.push_back(score >= 0.0 ? 1 : -1);
    }
    const auto h = confusion(predicted, actual, 1);
    const auto l = confusion(predicted, actual, -1);
    r.orientations = {orient("H", h), orient("L", l), orient("Avg", mean_counts(h, l))};
    r.degenerate = std::count(actual.begin(), actual.end(), 1) == 0 || std::count(actual.begin(), actual.end(), -1) == 0;
    if (!r.degenerate) {
      r.roc = roc_auc(r.test_scores, actual, 1);
      r.auc = r.roc.auc;
    }
    report.folds[f] = std::move(r);
  });

  const auto valid = valid_folds(report);
  pick_extremes(report, valid);
  ConfusionCounts h_sum, l_sum;
  double auc_sum = 0.0;
  for (std::size_t f : valid) {
    const auto& o = report.folds[f].orientations;
    h_sum = {h_sum.tp + o[0].counts.tp, h_sum.fp + o[0].counts.fp, h_sum.fn + o[0].counts.fn, h_sum.tn + o[0].counts.tn};
    l_sum = {l_sum.tp + o[1].counts.tp, l_sum.fp + o[1].counts.fp, l_sum.fn + o[1].counts.fn, l_sum.tn + o[1].counts.tn};
    auc_sum += report.folds[f].auc;
  }
  const double nv = static_cast<double>(valid.size());
  const ConfusionCounts h_mean{h_sum.tp / nv, h_sum.fp / nv, h_sum.fn / nv, h_sum.tn / nv};
  const ConfusionCounts l_mean{l_sum.tp / nv, l_sum.fp / nv, l_sum.fn / nv, l_sum.tn / nv};
  report.scenarios[1] = {"average", report.folds.size(),
                         {orient("H", h_mean), orient("L", l_mean), orient("Avg", mean_counts(h_mean, l_mean))},
                         auc_sum / nv};
  return report;
}

std::string arm_name(const ProtocolConfig& config) {
  std::string name(features::group_name(config.group));
  if (config.family != features::FeatureFamily::All) name += "+" + std::string(features::family_name(config.family));
  return name;
}

std::vector<std::string> rank_arms(const std::vector<ProtocolReport>& arms) {
  std::vector<std::size_t> order(arms.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ka = std::make_pair(arms[a].scenario_accuracy(1), arms[a].mean_auc());
    const auto kb = std::make_pair(arms[b].scenario_accuracy(1), arms[b].mean_auc());
    return kb < ka;
  });
  std::vector<std::string> names;
  for (std::size_t i : order) names.push_back(arms[i].arm);
  return names;
}

}  // namespace

double ProtocolReport::scenario_accuracy(std::size_t s) const { return orientation_accuracy(scenarios.at(s).orientations); }

ProtocolReport run_protocol1(const FeatureTable& table, const ProtocolConfig& config) {
  const auto columns = features::select_columns(config.group, config.family);
  return run_binary_arm(table, columns, config, "protocol1", arm_name(config));
}

ProtocolReport run_protocol1(const ingest::DatasetManifest& manifest, const ProtocolConfig& config) {
  return run_protocol1(extract_features(manifest, config), config);
}

AblationReport run_protocol2(const FeatureTable& table, const ProtocolConfig& config) {
  using features::ChannelGroup;
  using features::FeatureFamily;
  AblationReport report;
  for (auto g : {ChannelGroup::Accel, ChannelGroup::Gravity, ChannelGroup::Gyro, ChannelGroup::Attitude}) {
    const auto cols = features::select_columns(g, FeatureFamily::All);
    report.group_arms.push_back(run_binary_arm(table, cols, config, "protocol2", std::string(features::group_name(g))));
  }
  for (auto f : {FeatureFamily::Czt, FeatureFamily::Cdf}) {
    const auto cols = features::select_columns(ChannelGroup::All, f);
    report.family_arms.push_back(run_binary_arm(table, cols, config, "protocol2", std::string(features::family_name(f))));
  }
  report.group_ranking = rank_arms(report.group_arms);
  report.family_ranking = rank_arms(report.family_arms);
  return report;
}

AblationReport run_protocol2(const ingest::DatasetManifest& manifest, const ProtocolConfig& config) {
  return run_protocol2(extract_features(manifest, config), config);
}

ProtocolReport run_multiclass(const FeatureTable& table, const ProtocolConfig& config) {
  const auto columns = features::select_columns(config.group, config.family);
  const auto plan = model::make_folds(table.cow_ids.size(), table.scores, config.folds, config.seed, config.test_fraction);
  std::vector<int> classes(table.scores.begin(), table.scores.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

  ProtocolReport report;
  report.protocol = "multiclass";
  report.arm = arm_name(config);
  report.n_features = columns.size();
  report.folds.resize(plan.folds.size());
  parallel_for(plan.folds.size(), config.jobs, [&](std::size_t f) {
    const auto& fold = plan.folds[f];
    std::vector<int> y_train;
    for (std::size_t i : fold.train) y_train.push_back(table.scores[i]);
    const auto trained = model::train_multiclass(take(table.rows, fold.train, columns), y_train, config.svm, 1);
    const auto x_test = take(table.rows, fold.test, columns);

    FoldResult r;
    r.fold = f + 1;
    r.n_test = fold.test.size();
    std::vector<int> actual, predicted;
    std::vector<std::vector<double>> decisions;
    for (std::size_t t = 0; t < fold.test.size(); ++t) {
      decisions.push_back(model::decision_values(trained, x_test[t]));
      predicted.push_back(model::predict(trained, x_test[t]));
      actual.push_back(table.scores[fold.test[t]]);
      r.test_cows.push_back(table.cow_ids[fold.test[t]]);
      r.test_scores.push_back(static_cast<double>(predicted.back()));
    }
    std::vector<int> present(actual.begin(), actual.end());
    std::sort(present.begin(), present.end());
    present.erase(std::unique(present.begin(), present.end()), present.end());
    r.degenerate = present.size() < 2;

    ConfusionCounts sum;
    double pre = 0, sen = 0, spe = 0, auc = 0;
    std::size_t auc_classes = 0;
    for (int c : classes) {
      const auto counts = confusion(predicted, actual, c);
      r.orientations.push_back(orient("S" + std::to_string(c), counts));
      const auto& m = r.orientations.back().metrics;
      pre += m.precision;
      sen += m.sensitivity;
      spe += m.specificity;
      sum = {sum.tp + counts.tp, sum.fp + counts.fp, sum.fn + counts.fn, sum.tn + counts.tn};
      const auto k = static_cast<std::size_t>(std::find(trained.classes.begin(), trained.classes.end(), c) - trained.classes.begin());
      if (k < trained.classes.size() && counts.tp + counts.fn > 0 && counts.fp + counts.tn > 0) {
        std::vector<double> s;
        for (const auto& d : decisions) s.push_back(d[k]);
        auc += roc_auc(s, actual, c).auc;
        ++auc_classes;
      }
    }
    const double nc = static_cast<double>(classes.size());
    OrientationResult macro;
    macro.name = "Macro";
    macro.counts = {sum.tp / nc, sum.fp / nc, sum.fn / nc, sum.tn / nc};
    macro.metrics.precision = pre / nc;
    macro.metrics.sensitivity = sen / nc;
    macro.metrics.specificity = spe / nc;
    std::size_t correct = 0;
    for (std::size_t t = 0; t < actual.size(); ++t) correct += actual[t] == predicted[t];
    macro.metrics.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(actual.size());
    r.orientations.push_back(macro);
    r.auc = auc_classes ? auc / static_cast<double>(auc_classes) : 0.0;
    report.folds[f] = std::move(r);
  });

  const auto valid = valid_folds(report);
  pick_extremes(report, valid);
  const std::size_t width = report.folds[valid.front()].orientations.size();
  Scenario avg{"average", report.folds.size(), report.folds[valid.front()].orientations, 0.0};
  for (std::size_t o = 0; o < width; ++o) {
    ConfusionCounts c;
    Metrics m;
    for (std::size_t f : valid) {
      const auto& src = report.folds[f].orientations[o];
      c = {c.tp + src.counts.tp, c.fp + src.counts.fp, c.fn + src.counts.fn, c.tn + src.counts.tn};
      m.precision += src.metrics.precision;
      m.sensitivity += src.metrics.sensitivity;
      m.specificity += src.metrics.specificity;
      m.accuracy += src.metrics.accuracy;
    }
    const double nv = static_cast<double>(valid.size());
    auto& dst = avg.orientations[o];
    dst.counts = {c.tp / nv, c.fp / nv, c.fn / nv, c.tn / nv};
    if (dst.name == "Macro") {
      dst.metrics = {m.sensitivity / nv, m.specificity / nv, m.precision / nv, m.accuracy / nv, false};
    } else {
      dst.metrics = metrics(dst.counts);
    }
  }
  for (std::size_t f : valid) avg.auc += report.folds[f].auc;
  avg.auc /= static_cast<double>(valid.size());
  report.scenarios[1] = std::move(avg);
  return report;
}

ProtocolReport run_multiclass(const ingest::DatasetManifest& manifest, const ProtocolConfig& config) {
  return run_multiclass(extract_features(manifest, config), config);
}

// ---------------------------------------------------------------------------

namespace {

void csv_orientations(std::string& out, const ProtocolReport& r, const std::string& fold,
                      const std::vector<OrientationResult>& orientations, double auc) {
  auto row = [&](const std::string& orientation, const char* metric, double v) {
    out += r.protocol + ',' + r.arm + ',' + fold + ',' + orientation + ',' + metric + ',' + text::format_double(v) + '\n';
  };
  for (const auto& o : orientations) {
    row(o.name, "tp", o.counts.tp);
    row(o.name, "fp", o.counts.fp);
    row(o.name, "fn", o.counts.fn);
    row(o.name, "tn", o.counts.tn);
    row(o.name, "precision", o.metrics.precision);
    row(o.name, "sensitivity", o.metrics.sensitivity);
    row(o.name, "specificity", o.metrics.specificity);
    row(o.name, "accuracy", o.metrics.accuracy);
  }
  row("all", "auc", auc);
}

std::string cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

std::string report_csv(std::span<const ProtocolReport> reports, const ConfigEcho& config) {
  std::string out;
  for (const auto& [k, v] : config) out += "# " + k + " = " + v + '\n';
  out += "protocol,arm,fold,orientation,metric,value\n";
  for (const auto& r : reports) {
    for (const auto& f : r.folds) {
      csv_orientations(out, r, std::to_string(f.fold), f.orientations, f.auc);
      if (f.degenerate) out += r.protocol + ',' + r.arm + ',' + std::to_string(f.fold) + ",all,degenerate,1\n";
    }
    for (const auto& s : r.scenarios) csv_orientations(out, r, s.name, s.orientations, s.auc);
  }
  return out;
}

std::string report_text(const ProtocolReport& r) {
  std::ostringstream out;
  out << r.protocol << "  arm=" << r.arm << "  features=" << r.n_features << "  folds=" << r.folds.size() << "\n";
  const std::size_t width = r.scenarios[0].orientations.size();
  char buf[64];
  out << "      ";
  for (const auto& s : r.scenarios) {
    std::string title = s.name;
    if (s.fold < r.folds.size()) title += " (fold " + std::to_string(r.folds[s.fold].fold) + ")";
    std::snprintf(buf, sizeof(buf), "| %-*s", static_cast<int>(width * 7), title.c_str());
    out << buf;
  }
  out << "\n      ";
  for (const auto& s : r.scenarios) {
    out << "| ";
    for (const auto& o : s.orientations) {
      std::snprintf(buf, sizeof(buf), "%-7s", o.name.c_str());
      out << buf;
    }
  }
  out << "\n";
  auto line = [&](const char* label, auto get) {
    std::snprintf(buf, sizeof(buf), "%-6s", label);
    out << buf;
    for (const auto& s : r.scenarios) {
      out << "| ";
      for (const auto& o : s.orientations) {
        std::snprintf(buf, sizeof(buf), "%-7s", get(o).c_str());
        out << buf;
      }
    }
    out << "\n";
  };
  auto pct = [](double v) { return std::to_string(std::lround(v)); };
  line("TP", [](const OrientationResult& o) { return cell(o.counts.tp); });
  line("FP", [](const OrientationResult& o) { return cell(o.counts.fp); });
  line("FN", [](const OrientationResult& o) { return cell(o.counts.fn); });
  line("TN", [](const OrientationResult& o) { return cell(o.counts.tn); });
  line("Pre.", [&](const OrientationResult& o) { return pct(o.metrics.precision); });
  line("Sen.", [&](const OrientationResult& o) { return pct(o.metrics.sensitivity); });
  line("Spe.", [&](const OrientationResult& o) { return pct(o.metrics.specificity); });
  line("Acc.", [&](const OrientationResult& o) { return pct(o.metrics.accuracy); });
  out << "AUC   ";
  for (const auto& s : r.scenarios) {
    std::snprintf(buf, sizeof(buf), "| %-*.2f", static_cast<int>(width * 7), s.auc);
    out << buf;
  }
  out << "\n";
  return out.str();
}

std::string roc_csv(const RocCurve& roc) {
  std::string out = "fpr,tpr,threshold\n";
  for (const auto& p : roc.points)
    out += text::format_double(p.fpr) + ',' + text::format_double(p.tpr) + ',' +
           (std::isinf(p.threshold) ? std::string("inf") : text::format_double(p.threshold)) + '\n';
  return out;
}

}  // namespace gaitscreen::eval
