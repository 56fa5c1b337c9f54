// gaitscreen command-line front end. Talks to the library only through the
// C API in gaitscreen/gaitscreen.h.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gaitscreen/gaitscreen.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

// A failed library call, carried to main() for reporting.
struct Failure {
  gs_status status;
  std::string message;
};

void check(gs_status s) {
  if (s != GS_OK) throw Failure{s, gs_last_error()};
}

template <typename T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};
using ConfigPtr = std::unique_ptr<gs_config, Deleter<gs_config, gs_config_destroy>>;
using ManifestPtr = std::unique_ptr<gs_manifest, Deleter<gs_manifest, gs_manifest_destroy>>;
using FeaturesPtr = std::unique_ptr<gs_features, Deleter<gs_features, gs_features_destroy>>;
using ModelPtr = std::unique_ptr<gs_model, Deleter<gs_model, gs_model_destroy>>;
using ReportPtr = std::unique_ptr<gs_report, Deleter<gs_report, gs_report_destroy>>;

struct Common {
  std::string config_file;
  std::vector<std::string> overrides;
  int jobs = -1;
};

ConfigPtr make_config(const Common& c) {
  gs_config* raw = nullptr;
  check(gs_config_create(&raw));
  ConfigPtr cfg(raw);
  if (!c.config_file.empty()) check(gs_config_load_file(cfg.get(), c.config_file.c_str()));
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected key=value, got '" + kv + "'");
    check(gs_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
  }
  std::string jobs;
  if (c.jobs >= 0) {
    jobs = std::to_string(c.jobs);
  } else if (const char* env = std::getenv("GAITSCREEN_JOBS"); env && *env) {
    jobs = env;
  }
  if (!jobs.empty()) check(gs_config_set(cfg.get(), "run.jobs", jobs.c_str()));
  check(gs_config_validate(cfg.get()));
  return cfg;
}

unsigned config_jobs(const gs_config* cfg) {
  char buf[32];
  check(gs_config_get(cfg, "run.jobs", buf, sizeof(buf)));
  return static_cast<unsigned>(std::strtoul(buf, nullptr, 10));
}

std::string out_path(const std::string& dir, const char* name) { return (fs::path(dir) / name).string(); }

ManifestPtr load_manifest(const std::string& data, const gs_config* cfg) {
  gs_manifest* raw = nullptr;
  check(gs_manifest_build(data.c_str(), cfg, &raw));
  return ManifestPtr(raw);
}

// Features either from a saved matrix or extracted from a data directory.
FeaturesPtr load_features(const std::string& features_csv, const std::string& data, const gs_config* cfg) {
  gs_features* raw = nullptr;
  if (!features_csv.empty()) {
    check(gs_features_load_csv(features_csv.c_str(), &raw));
  } else {
    auto m = load_manifest(data, cfg);
    check(gs_features_extract(m.get(), cfg, &raw));
  }
  return FeaturesPtr(raw);
}

std::string config_help() {
  std::string out = "Configuration keys (--config FILE with 'key = value' lines, or --set key=value):\n";
  char line[512];
  for (size_t i = 0; i < gs_config_key_count(); ++i) {
    std::snprintf(line, sizeof(line), "  %-28s default %-8s %s\n", gs_config_key_name(i), gs_config_key_default(i),
                  gs_config_key_help(i));
    out += line;
  }
  out += "\nExit codes: 0 success, 1 data or processing error, 2 usage error.\n"
         "GAITSCREEN_JOBS sets the worker count when --jobs is absent.\n";
  return out;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_file, "Configuration file")->check(CLI::ExistingFile);
  sub->add_option("--set", c.overrides, "Override one configuration key (key=value)");
  sub->add_option("--jobs", c.jobs, "Worker threads; 0 uses every core")->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lameness screening from leg-mounted IMU recordings"};
  app.set_version_flag("--version", std::string(gs_version()));
  app.footer(config_help());
  app.require_subcommand(1);

  Common common;

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a labelled synthetic dataset");
  std::string synth_out;
  std::uint64_t seed = 1;
  size_t files_per_cow = 2;
  size_t samples_per_file = 0;
  std::vector<size_t> cows;
  bool paper_shape = false, easy = false, null_data = false, gyro_only = false;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", seed, "Generator seed");
  synth->add_option("--files-per-cow", files_per_cow, "Recordings per cow")->check(CLI::PositiveNumber);
  synth->add_option("--samples-per-file", samples_per_file, "Samples per recording (default 9000)");
  synth->add_option("--cows", cows, "Cows per score 1..5, e.g. 19,7,6,6,5")->delimiter(',')->expected(5);
  auto* g_paper = synth->add_flag("--paper-shape", paper_shape, "43 cows, 19/7/6/6/5 over scores 1..5 (default)");
  auto* g_easy = synth->add_flag("--easy", easy, "Well separated classes, 10 healthy and 10 lame");
  auto* g_null = synth->add_flag("--null", null_data, "Labels independent of the signals, 10 healthy and 10 lame");
  auto* g_gyro = synth->add_flag("--gyro-only", gyro_only, "Class signal confined to the gyroscope, 10 healthy and 10 lame");
  g_paper->excludes(g_easy, g_null, g_gyro);
  g_easy->excludes(g_null, g_gyro);
  g_null->excludes(g_gyro);
  add_common(synth, common);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Scan a data directory and write manifest.csv");
  std::string data_dir, out_dir;
  ingest->add_option("--data", data_dir, "Directory of recordings")->required()->check(CLI::ExistingDirectory);
  ingest->add_option("--out", out_dir, "Output directory")->required();
  add_common(ingest, common);

  // stats
  auto* stats = app.add_subcommand("stats", "Dataset size and score histogram");
  stats->add_option("--data", data_dir, "Directory of recordings")->required()->check(CLI::ExistingDirectory);
  stats->add_option("--out", out_dir, "Also write stats.csv here");
  add_common(stats, common);

  // features
  auto* feats = app.add_subcommand("features", "Extract per-cow feature vectors to features.csv");
  feats->add_option("--data", data_dir, "Directory of recordings")->required()->check(CLI::ExistingDirectory);
  feats->add_option("--out", out_dir, "Output directory")->required();
  add_common(feats, common);

  // train
  std::string features_csv;
  auto* train = app.add_subcommand("train", "Train the healthy/lame classifier and write model.txt");
  auto* t_data = train->add_option("--data", data_dir, "Directory of recordings")->check(CLI::ExistingDirectory);
  auto* t_feat = train->add_option("--features", features_csv, "features.csv from 'features'")->check(CLI::ExistingFile);
  t_data->excludes(t_feat);
  train->add_option("--out", out_dir, "Output directory")->required();
  add_common(train, common);

  // predict
  std::string model_file;
  auto* predict = app.add_subcommand("predict", "Score cows with a trained model into predictions.csv");
  auto* p_data = predict->add_option("--data", data_dir, "Directory of recordings")->check(CLI::ExistingDirectory);
  auto* p_feat = predict->add_option("--features", features_csv, "features.csv")->check(CLI::ExistingFile);
  p_data->excludes(p_feat);
  predict->add_option("--model", model_file, "model.txt from 'train'")->required()->check(CLI::ExistingFile);
  predict->add_option("--out", out_dir, "Output directory")->required();
  add_common(predict, common);

  // evaluate
  std::string protocol;
  auto* evaluate = app.add_subcommand("evaluate", "Run an evaluation protocol and write its report");
  evaluate->add_option("protocol", protocol, "protocol1 | protocol2 | multiclass")
      ->required()
      ->check(CLI::IsMember({"protocol1", "protocol2", "multiclass"}));
  auto* e_data = evaluate->add_option("--data", data_dir, "Directory of recordings")->check(CLI::ExistingDirectory);
  auto* e_feat = evaluate->add_option("--features", features_csv, "features.csv")->check(CLI::ExistingFile);
  e_data->excludes(e_feat);
  evaluate->add_option("--out", out_dir, "Output directory")->required();
  add_common(evaluate, common);

  // dsp-trace
  std::string cow_id;
  size_t channel = 0;
  auto* trace = app.add_subcommand("dsp-trace", "Write every segmentation stage of one cow channel");
  trace->add_option("--data", data_dir, "Directory of recordings")->required()->check(CLI::ExistingDirectory);
  trace->add_option("--cow", cow_id, "Cow identifier")->required();
  trace->add_option("--channel", channel, "Signal channel 0..11")->check(CLI::Range(0, 11));
  trace->add_option("--out", out_dir, "Output directory")->required();
  add_common(trace, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    auto cfg = make_config(common);
    auto ensure_out = [](const std::string& dir) {
      std::error_code ec;
      fs::create_directories(dir, ec);
      if (ec) throw Failure{GS_IO, "cannot create '" + dir + "': " + ec.message()};
    };
    auto need_input = [&](CLI::App* sub) {
      if (data_dir.empty() && features_csv.empty())
        throw CLI::RequiredError(sub->get_name() + ": one of --data or --features");
    };

    if (synth->parsed()) {
      gs_synth_options opts;
      gs_synth_options_init(&opts);
      opts.preset = easy ? GS_SYNTH_EASY : null_data ? GS_SYNTH_NULL : gyro_only ? GS_SYNTH_GYRO_ONLY : GS_SYNTH_DEFAULT;
      opts.seed = seed;
      opts.files_per_cow = files_per_cow;
      opts.samples_per_file = samples_per_file;
      opts.jobs = config_jobs(cfg.get());
      for (size_t s = 0; s < cows.size() && s < 5; ++s) opts.cows_per_score[s] = cows[s];
      check(gs_synth_generate(&opts, synth_out.c_str()));
      std::printf("wrote dataset to %s\n", synth_out.c_str());
    } else if (ingest->parsed()) {
      auto m = load_manifest(data_dir, cfg.get());
      ensure_out(out_dir);
      const std::string path = out_path(out_dir, "manifest.csv");
      check(gs_manifest_write_csv(m.get(), path.c_str()));
      std::printf("%zu files, %zu cows, %zu skipped -> %s\n", gs_manifest_file_count(m.get()),
                  gs_manifest_cow_count(m.get()), gs_manifest_skipped_count(m.get()), path.c_str());
    } else if (stats->parsed()) {
      auto m = load_manifest(data_dir, cfg.get());
      std::fputs(gs_manifest_stats_text(m.get()), stdout);
      if (!out_dir.empty()) {
        ensure_out(out_dir);
        check(gs_manifest_write_stats_csv(m.get(), out_path(out_dir, "stats.csv").c_str()));
      }
    } else if (feats->parsed()) {
      auto f = load_features("", data_dir, cfg.get());
      ensure_out(out_dir);
      const std::string path = out_path(out_dir, "features.csv");
      check(gs_features_write_csv(f.get(), path.c_str()));
      std::printf("%zu cows x %zu features -> %s\n", gs_features_rows(f.get()), gs_features_cols(f.get()), path.c_str());
    } else if (train->parsed()) {
      need_input(train);
      auto f = load_features(features_csv, data_dir, cfg.get());
      gs_model* raw = nullptr;
      check(gs_model_train(f.get(), cfg.get(), &raw));
      ModelPtr model(raw);
      ensure_out(out_dir);
      const std::string path = out_path(out_dir, "model.txt");
      check(gs_model_save(model.get(), path.c_str()));
      std::printf("model -> %s\n", path.c_str());
    } else if (predict->parsed()) {
      need_input(predict);
      gs_model* raw = nullptr;
      check(gs_model_load(model_file.c_str(), &raw));
      ModelPtr model(raw);
      auto f = load_features(features_csv, data_dir, cfg.get());
      ensure_out(out_dir);
      const std::string path = out_path(out_dir, "predictions.csv");
      check(gs_model_predict_csv(model.get(), f.get(), path.c_str()));
      std::printf("predictions -> %s\n", path.c_str());
    } else if (evaluate->parsed()) {
      need_input(evaluate);
      auto f = load_features(features_csv, data_dir, cfg.get());
      const gs_protocol p = protocol == "protocol1"   ? GS_PROTOCOL_SPLITS
                            : protocol == "protocol2" ? GS_PROTOCOL_ABLATION
                                                      : GS_PROTOCOL_MULTICLASS;
      gs_report* raw = nullptr;
      check(gs_evaluate(f.get(), cfg.get(), p, &raw));
      ReportPtr report(raw);
      ensure_out(out_dir);
      check(gs_report_write(report.get(), out_dir.c_str()));
      std::fputs(gs_report_text(report.get()), stdout);
    } else if (trace->parsed()) {
      auto m = load_manifest(data_dir, cfg.get());
      size_t len = 0;
      check(gs_manifest_cow_channel(m.get(), cow_id.c_str(), channel, cfg.get(), nullptr, 0, &len));
      std::vector<double> x(len);
      check(gs_manifest_cow_channel(m.get(), cow_id.c_str(), channel, cfg.get(), x.data(), x.size(), &len));
      char rate[64];
      check(gs_config_get(cfg.get(), "ingest.nominal_rate_hz", rate, sizeof(rate)));
      ensure_out(out_dir);
      const std::string path = out_path(out_dir, "trace.csv");
      check(gs_dsp_trace_write(x.data(), x.size(), std::strtod(rate, nullptr), cfg.get(), path.c_str()));
      std::printf("%zu samples -> %s\n", len, path.c_str());
    }
  } catch (const CLI::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", f.message.c_str());
    return f.status == GS_CONFIG || f.status == GS_INVALID_ARGUMENT ? kExitUsage : kExitData;
  }
  return kExitOk;
}
