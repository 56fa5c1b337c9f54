#include "gaitscreen/gaitscreen.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/error.hpp"
#include "core/eval.hpp"
#include "core/features.hpp"
#include "core/ingest.hpp"
#include "core/model.hpp"
#include "core/report.hpp"
#include "core/synth.hpp"
#include "core/text.hpp"

using namespace gaitscreen;

struct gs_config {
  config::RunConfig run;
  std::string rendered;
};

struct gs_manifest {
  ingest::DatasetManifest manifest;
  ingest::ParseOptions parse;
  std::vector<std::string> cow_ids;
  std::vector<int> cow_scores;
  std::string stats;
};

struct gs_features {
  eval::FeatureTable table;
};

struct gs_model {
  model::TrainedModel trained;
  features::ChannelGroup group = features::ChannelGroup::All;
  features::FeatureFamily family = features::FeatureFamily::All;
  std::vector<std::size_t> columns;
};

struct gs_report {
  std::vector<eval::ProtocolReport> arms;
  std::vector<std::string> rankings;  // ablation only
  eval::ConfigEcho echo;
  std::string text;
};

namespace {

thread_local std::string g_last_error;

gs_status set_error(gs_status s, const std::string& message) {
  g_last_error = message;
  return s;
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
gs_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return GS_OK;
  } catch (const Error& e) {
    return set_error(static_cast<gs_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(GS_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(GS_INTERNAL, e.what());
  } catch (...) {
    return set_error(GS_INTERNAL, "unknown failure");
  }
}

void require(bool ok, const char* what) {
  if (!ok) fail(ErrorCode::InvalidArgument, what);
}

const config::RunConfig& run_config(const gs_config* cfg) {
  static const config::RunConfig defaults;
  return cfg ? cfg->run : defaults;
}

const char* status_names[] = {
    "ok",
    "invalid_argument",
    "io",
    "wrong_column_count",
    "non_monotonic_time",
    "empty_file",
    "malformed_name",
    "score_out_of_range",
    "bad_timestamp",
    "conflicting_score",
    "empty_dataset",
    "unknown_cow",
    "even_order",
    "order_exceeds_length",
    "too_short",
    "cutoff_out_of_range",
    "empty_signal",
    "bad_dimensions",
    "dimension_mismatch",
    "single_class",
    "non_finite_feature",
    "too_few_cows",
    "empty_confusion",
    "bad_spec",
    "config",
    "format",
};

static_assert(sizeof(status_names) / sizeof(status_names[0]) == static_cast<int>(ErrorCode::Format) + 1);

void check_width(const eval::FeatureTable& t) {
  const std::size_t want = ingest::kSignalChannels * features::kBlockLength;
  for (const auto& r : t.rows)
    if (r.size() != want)
      fail(ErrorCode::BadDimensions, "feature rows must have " + std::to_string(want) + " columns");
}

constexpr std::string_view kModelHeader = "gaitscreen-columns";

}  // namespace

extern "C" {

const char* gs_version(void) { return config::kVersion.data(); }

const char* gs_status_name(gs_status status) {
  const int s = static_cast<int>(status);
  if (s >= 0 && s < static_cast<int>(sizeof(status_names) / sizeof(status_names[0]))) return status_names[s];
  if (status == GS_INTERNAL) return "internal";
  return "unknown";
}

const char* gs_last_error(void) { return g_last_error.c_str(); }

// ---- configuration

gs_status gs_config_create(gs_config** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = new gs_config;
  });
}

void gs_config_destroy(gs_config* cfg) { delete cfg; }

gs_status gs_config_set(gs_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg && key && value, "null argument");
    cfg->run.set(key, value);
  });
}

gs_status gs_config_get(const gs_config* cfg, const char* key, char* buf, size_t cap) {
  return guarded([&] {
    require(cfg && key && buf && cap > 0, "null argument");
    const std::string v = cfg->run.get(key);
    const std::size_t n = std::min(v.size(), cap - 1);
    std::memcpy(buf, v.data(), n);
    buf[n] = '\0';
  });
}

gs_status gs_config_load_file(gs_config* cfg, const char* path) {
  return guarded([&] {
    require(cfg && path, "null argument");
    cfg->run.load_file(path);
  });
}

gs_status gs_config_validate(const gs_config* cfg) {
  return guarded([&] { run_config(cfg).validate(); });
}

const char* gs_config_render(gs_config* cfg) {
  if (!cfg) return "";
  cfg->rendered = cfg->run.render();
  return cfg->rendered.c_str();
}

size_t gs_config_key_count(void) { return config::keys().size(); }

const char* gs_config_key_name(size_t i) { return i < config::keys().size() ? config::keys()[i].name.c_str() : nullptr; }

const char* gs_config_key_default(size_t i) {
  return i < config::keys().size() ? config::keys()[i].default_value.c_str() : nullptr;
}

const char* gs_config_key_help(size_t i) { return i < config::keys().size() ? config::keys()[i].help.c_str() : nullptr; }

// ---- synthetic data

void gs_synth_options_init(gs_synth_options* opts) {
  if (!opts) return;
  std::memset(opts, 0, sizeof(*opts));
  opts->preset = GS_SYNTH_DEFAULT;
  opts->seed = 1;
  opts->files_per_cow = 2;
  opts->jobs = 1;
}

gs_status gs_synth_generate(const gs_synth_options* opts, const char* out_dir) {
  return guarded([&] {
    require(opts && out_dir, "null argument");
    synth::GaitSpec spec;
    synth::ScoreCounts counts = synth::paper_shape_counts();
    switch (opts->preset) {
      case GS_SYNTH_DEFAULT: spec = synth::default_spec(); break;
      case GS_SYNTH_EASY:
        spec = synth::easy_spec();
        counts = synth::easy_counts();
        break;
      case GS_SYNTH_NULL:
        spec = synth::null_spec();
        counts = synth::easy_counts();
        break;
      case GS_SYNTH_GYRO_ONLY:
        spec = synth::gyro_only_spec();
        counts = synth::easy_counts();
        break;
      default: fail(ErrorCode::InvalidArgument, "unknown preset");
    }
    spec.seed = opts->seed;
    if (opts->samples_per_file) spec.samples_per_file = opts->samples_per_file;
    bool any = false;
    for (std::size_t s = 0; s < 5; ++s) any = any || opts->cows_per_score[s] != 0;
    if (any)
      for (std::size_t s = 0; s < 5; ++s) counts[s] = opts->cows_per_score[s];
    synth::DatasetRequest req;
    req.cows_per_score = counts;
    req.files_per_cow = opts->files_per_cow;
    req.out_dir = out_dir;
    if (opts->significant_digits > 0) req.significant_digits = opts->significant_digits;
    req.jobs = opts->jobs;
    synth::gen_dataset(spec, req);
  });
}

// ---- manifest

gs_status gs_manifest_build(const char* root, const gs_config* cfg, gs_manifest** out) {
  return guarded([&] {
    require(root && out, "null argument");
    const auto& rc = run_config(cfg);
    ingest::ManifestOptions opts;
    opts.parse = rc.protocol.parse;
    opts.jobs = rc.protocol.jobs;
    auto m = std::make_unique<gs_manifest>();
    m->manifest = ingest::build_manifest(root, opts);
    m->parse = opts.parse;
    for (const auto& [id, cow] : m->manifest.cows) {
      m->cow_ids.push_back(id);
      m->cow_scores.push_back(cow.lameness_score);
    }
    *out = m.release();
  });
}

void gs_manifest_destroy(gs_manifest* m) { delete m; }

size_t gs_manifest_file_count(const gs_manifest* m) { return m ? m->manifest.entries.size() : 0; }
size_t gs_manifest_skipped_count(const gs_manifest* m) { return m ? m->manifest.skipped.size() : 0; }
size_t gs_manifest_cow_count(const gs_manifest* m) { return m ? m->cow_ids.size() : 0; }

const char* gs_manifest_cow_id(const gs_manifest* m, size_t i) {
  return m && i < m->cow_ids.size() ? m->cow_ids[i].c_str() : nullptr;
}

int gs_manifest_cow_score(const gs_manifest* m, size_t i) { return m && i < m->cow_scores.size() ? m->cow_scores[i] : 0; }

gs_status gs_manifest_score_histogram(const gs_manifest* m, size_t out[5]) {
  return guarded([&] {
    require(m && out, "null argument");
    for (std::size_t s = 0; s < 5; ++s) out[s] = 0;
    for (int s : m->cow_scores) ++out[s - ingest::kMinScore];
  });
}

gs_status gs_manifest_write_csv(const gs_manifest* m, const char* path) {
  return guarded([&] {
    require(m && path, "null argument");
    text::write_file_atomic(path, ingest::manifest_csv(m->manifest));
  });
}

const char* gs_manifest_stats_text(gs_manifest* m) {
  if (!m) return "";
  m->stats = ingest::stats_text(ingest::dataset_stats(m->manifest));
  return m->stats.c_str();
}

gs_status gs_manifest_write_stats_csv(const gs_manifest* m, const char* path) {
  return guarded([&] {
    require(m && path, "null argument");
    text::write_file_atomic(path, ingest::stats_csv(ingest::dataset_stats(m->manifest)));
  });
}

gs_status gs_manifest_cow_channel(const gs_manifest* m, const char* cow_id, size_t channel, const gs_config* cfg,
                                  double* out, size_t cap, size_t* len) {
  return guarded([&] {
    require(m && cow_id && len, "null argument");
    require(channel < ingest::kSignalChannels, "channel out of range");
    auto parse = m->parse;
    if (cfg) parse = cfg->run.protocol.parse;
    const auto rec = ingest::load_cow(m->manifest, cow_id, parse);
    const auto& s = rec.signals[channel];
    *len = s.size();
    if (out) {
      require(cap >= s.size(), "buffer too small");
      std::copy(s.begin(), s.end(), out);
    }
  });
}

// ---- features

gs_status gs_features_extract(const gs_manifest* m, const gs_config* cfg, gs_features** out) {
  return guarded([&] {
    require(m && out, "null argument");
    const auto& rc = run_config(cfg);
    rc.validate();
    auto f = std::make_unique<gs_features>();
    f->table = eval::extract_features(m->manifest, rc.protocol);
    *out = f.release();
  });
}

gs_status gs_features_load_csv(const char* path, gs_features** out) {
  return guarded([&] {
    require(path && out, "null argument");
    auto rows = features::parse_feature_matrix_csv(text::read_file(path));
    auto f = std::make_unique<gs_features>();
    for (auto& r : rows) {
      f->table.cow_ids.push_back(std::move(r.cow_id));
      f->table.scores.push_back(r.score);
      f->table.rows.push_back(std::move(r.values));
    }
    *out = f.release();
  });
}

void gs_features_destroy(gs_features* f) { delete f; }

gs_status gs_features_write_csv(const gs_features* f, const char* path) {
  return guarded([&] {
    require(f && path, "null argument");
    std::vector<features::FeatureRow> rows;
    for (std::size_t i = 0; i < f->table.rows.size(); ++i)
      rows.push_back({f->table.cow_ids[i], f->table.scores[i], f->table.rows[i]});
    text::write_file_atomic(path, features::feature_matrix_csv(rows));
  });
}

size_t gs_features_rows(const gs_features* f) { return f ? f->table.rows.size() : 0; }
size_t gs_features_cols(const gs_features* f) { return f && !f->table.rows.empty() ? f->table.rows[0].size() : 0; }

const double* gs_features_row(const gs_features* f, size_t i) {
  return f && i < f->table.rows.size() ? f->table.rows[i].data() : nullptr;
}

const char* gs_features_cow_id(const gs_features* f, size_t i) {
  return f && i < f->table.cow_ids.size() ? f->table.cow_ids[i].c_str() : nullptr;
}

int gs_features_score(const gs_features* f, size_t i) { return f && i < f->table.scores.size() ? f->table.scores[i] : 0; }

// ---- model

gs_status gs_model_train(const gs_features* f, const gs_config* cfg, gs_model** out) {
  return guarded([&] {
    require(f && out, "null argument");
    check_width(f->table);
    const auto& p = run_config(cfg).protocol;
    auto m = std::make_unique<gs_model>();
    m->group = p.group;
    m->family = p.family;
    m->columns = features::select_columns(p.group, p.family);
    model::Matrix x;
    std::vector<int> y;
    for (std::size_t i = 0; i < f->table.rows.size(); ++i) {
      std::vector<double> row;
      for (std::size_t c : m->columns) row.push_back(f->table.rows[i][c]);
      x.push_back(std::move(row));
      y.push_back(static_cast<int>(ingest::label_for_score(f->table.scores[i])));
    }
    m->trained = model::train_svm(x, y, p.svm);
    *out = m.release();
  });
}

gs_status gs_model_save(const gs_model* model, const char* path) {
  return guarded([&] {
    require(model && path, "null argument");
    std::string content = std::string(kModelHeader) + ' ' + std::string(features::group_name(model->group)) + ' ' +
                          std::string(features::family_name(model->family)) + '\n';
    content += model::serialize_model(model->trained);
    text::write_file_atomic(path, content);
  });
}

gs_status gs_model_load(const char* path, gs_model** out) {
  return guarded([&] {
    require(path && out, "null argument");
    const std::string content = text::read_file(path);
    const auto nl = content.find('\n');
    const auto head = text::split(std::string_view(content).substr(0, nl), ' ');
    if (nl == std::string::npos || head.size() != 3 || head[0] != kModelHeader)
      fail(ErrorCode::Format, std::string(path) + ": not a gaitscreen model");
    auto group = features::parse_group(head[1]);
    auto family = features::parse_family(head[2]);
    if (!group || !family) fail(ErrorCode::Format, std::string(path) + ": bad column selection");
    auto m = std::make_unique<gs_model>();
    m->group = *group;
    m->family = *family;
    m->columns = features::select_columns(*group, *family);
    m->trained = model::parse_model(std::string_view(content).substr(nl + 1));
    if (m->trained.dim != m->columns.size()) fail(ErrorCode::Format, std::string(path) + ": dimension disagrees");
    *out = m.release();
  });
}

void gs_model_destroy(gs_model* model) { delete model; }

gs_status gs_model_decision(const gs_model* model, const double* row, size_t n, double* out) {
  return guarded([&] {
    require(model && row && out, "null argument");
    if (n != ingest::kSignalChannels * features::kBlockLength)
      fail(ErrorCode::DimensionMismatch, "expected a full feature row");
    std::vector<double> x;
    for (std::size_t c : model->columns) x.push_back(row[c]);
    *out = model::decision_value(model->trained, x);
  });
}

gs_status gs_model_predict_csv(const gs_model* model, const gs_features* f, const char* path) {
  return guarded([&] {
    require(model && f && path, "null argument");
    check_width(f->table);
    std::string content = "cow_id,score,decision,predicted\n";
    for (std::size_t i = 0; i < f->table.rows.size(); ++i) {
      std::vector<double> x;
      for (std::size_t c : model->columns) x.push_back(f->table.rows[i][c]);
      const double d = model::decision_value(model->trained, x);
      content += f->table.cow_ids[i] + ',' + std::to_string(f->table.scores[i]) + ',' + text::format_double(d) + ',' +
                 (d >= 0.0 ? "1" : "-1") + '\n';
    }
    text::write_file_atomic(path, content);
  });
}

// ---- evaluation

gs_status gs_evaluate(const gs_features* f, const gs_config* cfg, gs_protocol protocol, gs_report** out) {
  return guarded([&] {
    require(f && out, "null argument");
    check_width(f->table);
    const auto& rc = run_config(cfg);
    rc.validate();
    auto r = std::make_unique<gs_report>();
    r->echo = rc.echo();
    switch (protocol) {
      case GS_PROTOCOL_SPLITS: r->arms.push_back(eval::run_protocol1(f->table, rc.protocol)); break;
      case GS_PROTOCOL_ABLATION: {
        auto ab = eval::run_protocol2(f->table, rc.protocol);
        for (auto& a : ab.group_arms) r->arms.push_back(std::move(a));
        for (auto& a : ab.family_arms) r->arms.push_back(std::move(a));
        std::string g = "group ranking:", fam = "family ranking:";
        for (const auto& n : ab.group_ranking) g += ' ' + n;
        for (const auto& n : ab.family_ranking) fam += ' ' + n;
        r->rankings = {g, fam};
        break;
      }
      case GS_PROTOCOL_MULTICLASS: r->arms.push_back(eval::run_multiclass(f->table, rc.protocol)); break;
      default: fail(ErrorCode::InvalidArgument, "unknown protocol");
    }
    *out = r.release();
  });
}

void gs_report_destroy(gs_report* r) { delete r; }

const char* gs_report_text(gs_report* r) {
  if (!r) return "";
  r->text.clear();
  for (const auto& a : r->arms) r->text += eval::report_text(a) + '\n';
  for (const auto& line : r->rankings) r->text += line + '\n';
  return r->text.c_str();
}

gs_status gs_report_write(const gs_report* r, const char* out_dir) {
  return guarded([&] {
    require(r && out_dir, "null argument");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) fail(ErrorCode::Io, std::string("cannot create '") + out_dir + "': " + ec.message());
    report::write_bundle(out_dir, r->arms, r->echo);
    if (!r->rankings.empty()) {
      std::string content;
      for (const auto& line : r->rankings) content += line + '\n';
      text::write_file_atomic((std::filesystem::path(out_dir) / "ranking.txt").string(), content);
    }
  });
}

size_t gs_report_arm_count(const gs_report* r) { return r ? r->arms.size() : 0; }

const char* gs_report_arm_name(const gs_report* r, size_t arm) {
  return r && arm < r->arms.size() ? r->arms[arm].arm.c_str() : nullptr;
}

size_t gs_report_fold_count(const gs_report* r, size_t arm) {
  return r && arm < r->arms.size() ? r->arms[arm].folds.size() : 0;
}

gs_status gs_report_scenario_metric(const gs_report* r, size_t arm, gs_scenario scenario, const char* orientation,
                                    gs_metric metric, double* out) {
  return guarded([&] {
    require(r && orientation && out, "null argument");
    require(arm < r->arms.size(), "arm out of range");
    require(scenario >= GS_WORST && scenario <= GS_BEST, "scenario out of range");
    for (const auto& o : r->arms[arm].scenarios[scenario].orientations) {
      if (o.name != orientation) continue;
      switch (metric) {
        case GS_METRIC_TP: *out = o.counts.tp; return;
        case GS_METRIC_FP: *out = o.counts.fp; return;
        case GS_METRIC_FN: *out = o.counts.fn; return;
        case GS_METRIC_TN: *out = o.counts.tn; return;
        case GS_METRIC_PRECISION: *out = o.metrics.precision; return;
        case GS_METRIC_SENSITIVITY: *out = o.metrics.sensitivity; return;
        case GS_METRIC_SPECIFICITY: *out = o.metrics.specificity; return;
        case GS_METRIC_ACCURACY: *out = o.metrics.accuracy; return;
      }
      fail(ErrorCode::InvalidArgument, "unknown metric");
    }
    fail(ErrorCode::InvalidArgument, std::string("no orientation '") + orientation + "'");
  });
}

gs_status gs_report_scenario_auc(const gs_report* r, size_t arm, gs_scenario scenario, double* out) {
  return guarded([&] {
    require(r && out, "null argument");
    require(arm < r->arms.size(), "arm out of range");
    require(scenario >= GS_WORST && scenario <= GS_BEST, "scenario out of range");
    *out = r->arms[arm].scenarios[scenario].auc;
  });
}

// ---- signal processing

gs_status gs_dsp_segment(const double* x, size_t n, double sample_rate_hz, const gs_config* cfg,
                         unsigned char* motion, double* normalized) {
  return guarded([&] {
    require(x != nullptr || n == 0, "null signal");
    const auto& spec = run_config(cfg).protocol.features.filter;
    spec.validate(sample_rate_hz);
    const dsp::Signal s{std::vector<double>(x, x + n), sample_rate_hz};
    const auto trace = dsp::segment_signal(s, spec);
    for (std::size_t i = 0; i < n; ++i) {
      if (motion) motion[i] = trace.mask.motion[i] ? 1 : 0;
      if (normalized) normalized[i] = trace.normalized.signal.samples[i];
    }
  });
}

gs_status gs_dsp_trace_write(const double* x, size_t n, double sample_rate_hz, const gs_config* cfg,
                             const char* path) {
  return guarded([&] {
    require((x != nullptr || n == 0) && path, "null argument");
    const auto& spec = run_config(cfg).protocol.features.filter;
    spec.validate(sample_rate_hz);
    const dsp::Signal s{std::vector<double>(x, x + n), sample_rate_hz};
    text::write_file_atomic(path, report::trace_csv(s, dsp::segment_signal(s, spec)));
  });
}

// ---- metrics

gs_status gs_metrics_compute(double tp, double fp, double fn, double tn, gs_metrics* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    const auto m = eval::metrics({tp, fp, fn, tn});
    *out = {m.precision, m.sensitivity, m.specificity, m.accuracy};
  });
}

}  // extern "C"
