// Command-line front end: dataset preparation, model fitting, scoring,
// calibration, metric evaluation and experiment reproduction. All
// randomness flows from explicit seeds, and every run with the same
// config produces byte-identical outputs.

#include <omp.h>

#include <CLI11.hpp>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <string>
#include <vector>

#include "sigconf/conformance.hpp"
#include "sigconf/datasets.hpp"
#include "sigconf/errors.hpp"
#include "sigconf/experiments.hpp"
#include "sigconf/io.hpp"
#include "sigconf/metrics.hpp"
#include "sigconf/pipeline.hpp"
#include "sigconf/rng.hpp"

namespace {

using json = nlohmann::json;
using namespace sigconf;

void write_manifest(const std::string& path, const json& j) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open " + path + " for writing");
  os << j.dump(2) << "\n";
  if (!os) throw DataError("write failed for " + path);
}

NormalizationMode normalization_from_name(const std::string& name) {
  if (name == "none") return NormalizationMode::None;
  if (name == "per-stream") return NormalizationMode::PerStream;
  if (name == "corpus") return NormalizationMode::Corpus;
  throw ConfigError("unknown normalization '" + name + "'");
}

std::vector<TransformKind> transforms_from_names(const std::vector<std::string>& names) {
  std::vector<TransformKind> out;
  out.reserve(names.size());
  for (const std::string& n : names) out.push_back(transform_from_name(n));
  return out;
}

ScoredDataset scores_from_files(const std::string& normal_path, const std::string& anomaly_path) {
  ScoredDataset ds;
  for (const ScoreRow& r : read_scores(normal_path)) {
    ds.scores.push_back(r.score);
    ds.labels.push_back(false);
  }
  for (const ScoreRow& r : read_scores(anomaly_path)) {
    ds.scores.push_back(r.score);
    ds.labels.push_back(true);
  }
  return ds;
}

// Per-class ECDF curves in one delimited file for external plotting.
void write_class_ecdf(const std::string& path, const ScoredDataset& ds) {
  std::vector<double> normal, anomaly;
  for (std::size_t i = 0; i < ds.scores.size(); ++i)
    (ds.labels[i] ? anomaly : normal).push_back(ds.scores[i]);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open " + path + " for writing");
  os << "value,fraction,class\n";
  for (const auto& [v, f] : ecdf(normal))
    os << format_double(v) << "," << format_double(f) << ",normal\n";
  for (const auto& [v, f] : ecdf(anomaly))
    os << format_double(v) << "," << format_double(f) << ",anomaly\n";
  if (!os) throw DataError("write failed for " + path);
}

double split_sd(const std::vector<SeriesSplit>& splits) {
  double mean = 0.0;
  for (const SeriesSplit& s : splits) mean += s.balanced_accuracy;
  mean /= double(splits.size());
  double var = 0.0;
  for (const SeriesSplit& s : splits) {
    double d = s.balanced_accuracy - mean;
    var += d * d;
  }
  return std::sqrt(var / double(splits.size()));
}

json label_counts(const LabeledCorpus& data, SplitTag tag) {
  std::map<std::string, std::size_t> counts;
  for (std::size_t i = 0; i < data.streams.size(); ++i)
    if (data.tags[i] == tag) ++counts[data.streams[i].label];
  json j = json::object();
  for (const auto& [label, count] : counts) j[label] = count;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anomaly detection for streamed data: signature features with conformance scoring"};
  app.set_config("--config", "", "Key-value config file; command-line flags override it");
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads, "Worker thread count (0 keeps the environment default)");
  auto apply_threads = [&threads] {
    if (threads > 0) omp_set_num_threads(threads);
  };

  // --- prepare ---------------------------------------------------------
  CLI::App* prepare = app.add_subcommand("prepare", "Convert raw datasets to stream files");
  prepare->require_subcommand(1);

  {
    auto* cmd = prepare->add_subcommand("pendigits", "Pen trajectory digits (UNIPEN format)");
    struct Opts {
      std::string train, test, out_train, out_test, manifest;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--train", o->train, "UNIPEN training file")->required();
    cmd->add_option("--test", o->test, "UNIPEN test file")->required();
    cmd->add_option("--out-train", o->out_train, "Training stream file (NDJSON)")->required();
    cmd->add_option("--out-test", o->out_test, "Test stream file (NDJSON)")->required();
    cmd->add_option("--manifest", o->manifest, "Manifest path (JSON)")->required();
    cmd->callback([o, apply_threads] {
      apply_threads();
      LabeledCorpus data = load_pendigits(o->train, o->test);
      std::vector<Stream> train, test;
      for (std::size_t i = 0; i < data.streams.size(); ++i)
        (data.tags[i] == SplitTag::Train ? train : test).push_back(data.streams[i]);
      write_streams_file(o->out_train, train);
      write_streams_file(o->out_test, test);
      json manifest{{"dataset", "pendigits"},
                    {"instances", data.streams.size()},
                    {"train_instances", train.size()},
                    {"test_instances", test.size()},
                    {"train_labels", label_counts(data, SplitTag::Train)},
                    {"test_labels", label_counts(data, SplitTag::Test)},
                    {"inputs", json::array({o->train, o->test})},
                    {"outputs", json::array({o->out_train, o->out_test})}};
      write_manifest(o->manifest, manifest);
      std::cout << "pendigits: " << data.streams.size() << " instances (" << train.size()
                << " train, " << test.size() << " test)\n";
    });
  }

  {
    auto* cmd = prepare->add_subcommand("ucr", "Labeled series archive file(s), seeded split");
    struct Opts {
      std::vector<std::string> inputs;
      std::string normal_class = "auto";
      double rate = 0.001;
      std::size_t split = 0;
      std::string out_corpus, out_test, manifest;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--in", o->inputs, "Input file(s); label first, one series per row")
        ->required();
    cmd->add_option("--normal-class", o->normal_class,
                    "Label treated as normal ('auto' picks the smallest)");
    cmd->add_option("--rate", o->rate, "Anomaly contamination rate of the corpus");
    cmd->add_option("--split", o->split, "Split index; also the shuffle seed");
    cmd->add_option("--out-corpus", o->out_corpus, "Corpus stream file (NDJSON)")->required();
    cmd->add_option("--out-test", o->out_test, "Test stream file (NDJSON)")->required();
    cmd->add_option("--manifest", o->manifest, "Manifest path (JSON)")->required();
    cmd->callback([o, apply_threads] {
      apply_threads();
      LabeledCorpus data = load_ucr(o->inputs.front());
      for (std::size_t i = 1; i < o->inputs.size(); ++i) append_ucr(data, o->inputs[i]);
      const std::string normal =
          o->normal_class == "auto" ? smallest_label(data) : o->normal_class;
      SeriesSplitPlan plan = plan_series_split(data, normal, o->rate, o->split);
      std::vector<Stream> corpus, test;
      for (std::size_t i : plan.corpus_idx) corpus.push_back(data.streams[i]);
      for (std::size_t i : plan.test_idx) test.push_back(data.streams[i]);
      write_streams_file(o->out_corpus, corpus);
      write_streams_file(o->out_test, test);
      json manifest{{"dataset", "ucr"},
                    {"inputs", o->inputs},
                    {"instances", data.streams.size()},
                    {"normal_class", normal},
                    {"rate", o->rate},
                    {"split", o->split},
                    {"corpus_size", plan.corpus_idx.size()},
                    {"corpus_normal", plan.n_train},
                    {"corpus_anomalous", plan.contamination},
                    {"test_size", plan.test_idx.size()},
                    {"outputs", json::array({o->out_corpus, o->out_test})}};
      write_manifest(o->manifest, manifest);
      std::cout << "ucr: normal class " << normal << ", corpus " << plan.corpus_idx.size()
                << " (" << plan.contamination << " contaminated), test " << plan.test_idx.size()
                << "\n";
    });
  }

  {
    auto* cmd = prepare->add_subcommand("ais", "Vessel position reports (CSV)");
    struct Opts {
      std::string in, out_corpus, out_normal, out_anomaly, manifest;
      AisColumns cols;
      AisParams params;
      std::string measure = "path";
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--in", o->in, "Position-report CSV")->required();
    cmd->add_option("--out-corpus", o->out_corpus)->required();
    cmd->add_option("--out-normal", o->out_normal)->required();
    cmd->add_option("--out-anomaly", o->out_anomaly)->required();
    cmd->add_option("--manifest", o->manifest)->required();
    cmd->add_option("--col-id", o->cols.id, "Vessel id column");
    cmd->add_option("--col-time", o->cols.time, "Timestamp column");
    cmd->add_option("--col-lat", o->cols.lat, "Latitude column");
    cmd->add_option("--col-lon", o->cols.lon, "Longitude column");
    cmd->add_option("--col-length", o->cols.length, "Vessel length column");
    cmd->add_option("--compress-m", o->params.compress_threshold_m,
                    "Drop points within this distance of the last kept one");
    cmd->add_option("--min-displacement-m", o->params.min_displacement_m,
                    "Minimum initial-to-final displacement per vessel");
    cmd->add_option("--segment-len-m", o->params.segment_len_m, "Sub-stream length");
    cmd->add_option("--max-gap-m", o->params.max_gap_m,
                    "Drop sub-streams with a successive-point gap at or above this");
    cmd->add_option("--measure", o->measure, "Sub-stream length measure")
        ->check(CLI::IsMember({"path", "displacement"}));
    cmd->add_option("--normal-min-length-m", o->params.normal_min_length_m,
                    "Vessels strictly longer are normal");
    cmd->add_option("--anomaly-max-length-m", o->params.anomaly_max_length_m,
                    "Vessels at most this long are anomalous");
    cmd->add_option("--sample", o->params.sample_per_subset, "Sample size per subset");
    cmd->add_option("--seed", o->params.seed, "Seed for the vessel split and sampling");
    cmd->callback([o, apply_threads] {
      apply_threads();
      o->params.measure = o->measure == "displacement" ? SegmentMeasure::Displacement
                                                       : SegmentMeasure::CumulativePath;
      AisLoadStats stats;
      std::vector<VesselRecord> vessels = load_ais(o->in, o->cols, &stats);
      AisExperiment exp = build_ais_experiment(vessels, o->params);
      write_streams_file(o->out_corpus, exp.corpus);
      write_streams_file(o->out_normal, exp.normal_test);
      write_streams_file(o->out_anomaly, exp.anomaly_test);
      json manifest{
          {"dataset", "ais"},
          {"input", o->in},
          {"rows", stats.rows},
          {"dropped_no_id", stats.dropped_no_id},
          {"dropped_bad_coords", stats.dropped_bad_coords},
          {"dropped_bad_time", stats.dropped_bad_time},
          {"dropped_duplicate_time", stats.dropped_duplicate_time},
          {"vessels_dropped_bad_length", stats.vessels_dropped_bad_length},
          {"vessels", vessels.size()},
          {"normal_vessels", exp.normal_vessels},
          {"anomaly_vessels", exp.anomaly_vessels},
          {"corpus_vessels", exp.corpus_vessels},
          {"excluded_vessels", exp.excluded_vessels},
          {"corpus_size", exp.corpus.size()},
          {"normal_test_size", exp.normal_test.size()},
          {"anomaly_test_size", exp.anomaly_test.size()},
          {"params",
           {{"compress_m", o->params.compress_threshold_m},
            {"min_displacement_m", o->params.min_displacement_m},
            {"segment_len_m", o->params.segment_len_m},
            {"max_gap_m", o->params.max_gap_m},
            {"measure", o->measure},
            {"normal_min_length_m", o->params.normal_min_length_m},
            {"anomaly_max_length_m", o->params.anomaly_max_length_m},
            {"sample", o->params.sample_per_subset},
            {"seed", o->params.seed}}},
          {"outputs", json::array({o->out_corpus, o->out_normal, o->out_anomaly})}};
      write_manifest(o->manifest, manifest);
      std::cout << "ais: " << exp.corpus.size() << " corpus, " << exp.normal_test.size()
                << " normal test, " << exp.anomaly_test.size() << " anomalous test sub-streams\n";
    });
  }

  // --- fit -------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("fit", "Fit a conformance model on a stream corpus");
    struct Opts {
      std::string corpus, out;
      std::size_t order = 1;
      std::vector<std::string> transforms;
      std::string normalization = "none";
      std::string time_mode = "uniform";
      double spectral_cutoff = kDefaultSpectralCutoff;
      double null_tolerance = kDefaultNullTolerance;
      bool with_calibration = false;
      double epsilon = 0.05;
      std::uint64_t seed = 0;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--corpus", o->corpus, "Corpus stream file (NDJSON)")->required();
    cmd->add_option("--out", o->out, "Model path (JSON)")->required();
    cmd->add_option("--order", o->order, "Signature truncation order (>= 1)");
    cmd->add_option("--transform", o->transforms,
                    "Stream transform, repeatable: time, time-diff, lead-lag, invisibility");
    cmd->add_option("--normalization", o->normalization, "none, per-stream or corpus")
        ->check(CLI::IsMember({"none", "per-stream", "corpus"}));
    cmd->add_option("--time-mode", o->time_mode, "Time coordinate source")
        ->check(CLI::IsMember({"uniform", "timestamps"}));
    cmd->add_option("--spectral-cutoff", o->spectral_cutoff,
                    "Relative eigenvalue cutoff for the pseudo-inverse");
    cmd->add_option("--null-tolerance", o->null_tolerance,
                    "Relative tolerance for out-of-span detection");
    cmd->add_flag("--calibrate", o->with_calibration, "Embed a split-half calibration");
    cmd->add_option("--epsilon", o->epsilon, "Calibration quantile parameter in (0, 1]");
    cmd->add_option("--seed", o->seed, "Calibration split seed");
    cmd->callback([o, apply_threads] {
      apply_threads();
      std::vector<Stream> corpus = read_streams_file(o->corpus);
      PipelineConfig config;
      config.order = o->order;
      config.transforms = transforms_from_names(o->transforms);
      config.normalization = normalization_from_name(o->normalization);
      config.time_param =
          o->time_mode == "timestamps" ? TimeParam::FromTimestamps : TimeParam::Uniform;
      config.spectral_cutoff = o->spectral_cutoff;
      config.null_tolerance = o->null_tolerance;
      FittedPipeline fp;
      fp.meta = plan_pipeline(corpus, config);
      Eigen::MatrixXd feats = featurize(corpus, fp.meta);
      fp.model = fit(feats, config.spectral_cutoff, config.null_tolerance);
      if (o->with_calibration)
        fp.calibration =
            calibrate(feats, o->epsilon, o->seed, config.spectral_cutoff, config.null_tolerance);
      save_model(o->out, fp);
      std::cout << "fit: " << corpus.size() << " streams, feature_dim " << fp.meta.feature_dim
                << ", rank " << fp.model.rank << "\n";
      if (fp.calibration)
        std::cout << "calibration: median_r " << format_double(fp.calibration->median_r)
                  << ", threshold " << format_double(fp.calibration->threshold) << "\n";
    });
  }

  // --- score -----------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("score", "Score streams against a fitted model");
    struct Opts {
      std::string model, in, out;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--model", o->model, "Model path (JSON)")->required();
    cmd->add_option("--in", o->in, "Stream file (NDJSON)")->required();
    cmd->add_option("--out", o->out, "Score file (CSV)")->required();
    cmd->callback([o, apply_threads] {
      apply_threads();
      FittedPipeline fp = load_model(o->model);
      std::vector<Stream> streams = read_streams_file(o->in);
      std::vector<ScoreRow> rows;
      rows.reserve(streams.size());
      if (!streams.empty()) {
        std::vector<Score> scores = score_streams(fp, streams);
        for (std::size_t i = 0; i < streams.size(); ++i)
          rows.push_back({streams[i].id, scores[i].value, streams[i].label});
      }
      write_scores(o->out, rows);
      std::cout << "scored " << rows.size() << " streams\n";
    });
  }

  // --- calibrate ---------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("calibrate", "Attach a split-half calibration to a model");
    struct Opts {
      std::string model, corpus, out;
      double epsilon = 0.05;
      std::uint64_t seed = 0;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--model", o->model, "Model path (JSON)")->required();
    cmd->add_option("--corpus", o->corpus, "Corpus stream file (NDJSON)")->required();
    cmd->add_option("--out", o->out, "Output model path (JSON)")->required();
    cmd->add_option("--epsilon", o->epsilon, "Quantile parameter in (0, 1]");
    cmd->add_option("--seed", o->seed, "Split seed");
    cmd->callback([o, apply_threads] {
      apply_threads();
      FittedPipeline fp = load_model(o->model);
      std::vector<Stream> corpus = read_streams_file(o->corpus);
      Eigen::MatrixXd feats = featurize(corpus, fp.meta);
      fp.calibration = calibrate(feats, o->epsilon, o->seed, fp.meta.config.spectral_cutoff,
                                 fp.meta.config.null_tolerance);
      save_model(o->out, fp);
      std::cout << "calibration: median_r " << format_double(fp.calibration->median_r)
                << ", threshold " << format_double(fp.calibration->threshold) << "\n";
    });
  }

  // --- eval --------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("eval", "Evaluate score files of the two classes");
    struct Opts {
      std::string normal, anomaly;
      std::string metric = "auc";
      std::size_t bootstrap = 0;
      std::uint64_t seed = 0;
      std::string ecdf_out;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--normal", o->normal, "Score file of the normal class")->required();
    cmd->add_option("--anomaly", o->anomaly, "Score file of the anomalous class")->required();
    cmd->add_option("--metric", o->metric, "auc or ba")->check(CLI::IsMember({"auc", "ba"}));
    cmd->add_option("--bootstrap", o->bootstrap,
                    "Resample count for a stratified bootstrap standard error");
    cmd->add_option("--seed", o->seed, "Bootstrap seed");
    cmd->add_option("--ecdf-out", o->ecdf_out, "Write per-class score ECDFs to this file");
    cmd->callback([o, apply_threads] {
      apply_threads();
      ScoredDataset ds = scores_from_files(o->normal, o->anomaly);
      if (o->metric == "auc") {
        std::cout << "auc " << format_double(roc_auc(ds)) << "\n";
        if (o->bootstrap > 0)
          std::cout << "se "
                    << format_double(bootstrap_se(ds, roc_auc, o->bootstrap, o->seed)) << " (B="
                    << o->bootstrap << ", seed=" << o->seed << ")\n";
      } else {
        BalancedAccuracy ba = best_balanced_accuracy(ds);
        std::cout << "ba " << format_double(ba.ba) << "\n";
        std::cout << "threshold " << format_double(ba.threshold) << "\n";
        if (o->bootstrap > 0) {
          auto metric = [](const ScoredDataset& d) { return best_balanced_accuracy(d).ba; };
          std::cout << "se "
                    << format_double(bootstrap_se(ds, metric, o->bootstrap, o->seed)) << " (B="
                    << o->bootstrap << ", seed=" << o->seed << ")\n";
        }
      }
      if (!o->ecdf_out.empty()) {
        write_class_ecdf(o->ecdf_out, ds);
        std::cout << "ecdf " << o->ecdf_out << "\n";
      }
    });
  }

  // --- reproduce ---------------------------------------------------------
  CLI::App* reproduce = app.add_subcommand("reproduce", "Re-run a published experiment");
  reproduce->require_subcommand(1);

  {
    auto* cmd = reproduce->add_subcommand("pendigits", "Pooled digit-model AUC per order");
    struct Opts {
      std::string train, test;
      std::vector<std::size_t> orders;
      std::size_t bootstrap = 0;
      std::uint64_t seed = 0;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--train", o->train, "UNIPEN training file")->required();
    cmd->add_option("--test", o->test, "UNIPEN test file")->required();
    cmd->add_option("--orders", o->orders, "Signature orders (default 1..5)");
    cmd->add_option("--bootstrap", o->bootstrap, "Resample count for AUC standard errors");
    cmd->add_option("--seed", o->seed, "Bootstrap seed");
    cmd->callback([o, apply_threads] {
      apply_threads();
      if (o->orders.empty()) o->orders = {1, 2, 3, 4, 5};
      LabeledCorpus data = load_pendigits(o->train, o->test);
      DigitExperimentResult res = run_digit_experiment(data, o->orders);
      std::cout << "order auc" << (o->bootstrap > 0 ? " se" : "") << "\n";
      bool monotone = true;
      for (std::size_t i = 0; i < res.orders.size(); ++i) {
        std::cout << res.orders[i] << " " << format_double(res.aucs[i]);
        if (o->bootstrap > 0)
          std::cout << " "
                    << format_double(bootstrap_se(res.pooled[i], roc_auc, o->bootstrap,
                                                  Rng::derive(o->seed, res.orders[i])));
        std::cout << "\n";
        if (i > 0 && res.aucs[i] < res.aucs[i - 1]) monotone = false;
      }
      std::cout << "monotone " << (monotone ? "yes" : "no") << "\n";
    });
  }

  {
    auto* cmd = reproduce->add_subcommand("ucr", "Median best balanced accuracy over splits");
    struct Opts {
      std::vector<std::string> inputs;
      std::string normal_class = "auto";
      double rate = 0.001;
      std::size_t splits = 10;
      std::size_t order = 5;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--in", o->inputs, "Input file(s); label first, one series per row")
        ->required();
    cmd->add_option("--normal-class", o->normal_class,
                    "Label treated as normal ('auto' picks the smallest)");
    cmd->add_option("--rate", o->rate, "Anomaly contamination rate of the corpus");
    cmd->add_option("--splits", o->splits, "Number of seeded splits");
    cmd->add_option("--order", o->order, "Signature truncation order");
    cmd->callback([o, apply_threads] {
      apply_threads();
      LabeledCorpus data = load_ucr(o->inputs.front());
      for (std::size_t i = 1; i < o->inputs.size(); ++i) append_ucr(data, o->inputs[i]);
      const std::string normal =
          o->normal_class == "auto" ? smallest_label(data) : o->normal_class;
      SeriesExperimentResult res =
          run_series_experiment(data, normal, o->rate, o->splits, o->order);
      std::cout << "normal_class " << normal << "\n";
      std::cout << "split ba threshold\n";
      for (std::size_t i = 0; i < res.splits.size(); ++i)
        std::cout << i << " " << format_double(res.splits[i].balanced_accuracy) << " "
                  << format_double(res.splits[i].threshold) << "\n";
      std::cout << "median_ba " << format_double(res.median_ba) << "\n";
      std::cout << "sd " << format_double(split_sd(res.splits)) << "\n";
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad flags are config errors; help is success
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
