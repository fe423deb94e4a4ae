// Command-line front end: synthetic benchmark generation, baseline
// training, unsupervised adaptation, evaluation, and the streaming
// selection/relearning simulation.
//
// Exit codes: 0 success, 2 configuration error, 3 data/format error,
// 4 numeric failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mudas/mudas.hpp"

namespace fs = std::filesystem;
using namespace mudas;

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;

  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_path.empty()) cfg.load_file(config_path);
    if (seed) cfg.seed = *seed;
    return cfg;
  }
};

std::ofstream open_log(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open log file: " + path);
  return os;
}

void write_config_echo(std::ostream& os, const RunConfig& cfg) {
  os << "# resolved configuration\n" << cfg.echo() << "# end configuration\n";
}

void write_epoch_records(std::ostream& os, const TrainingReport& report) {
  for (const EpochRecord& e : report.epochs) {
    os << "epoch=" << e.epoch << " l_ws=" << format_double(e.mean.l_ws)
       << " l_ss=" << format_double(e.mean.l_ss) << " l_pos=" << format_double(e.mean.l_pos)
       << " l_neg=" << format_double(e.mean.l_neg)
       << " l_pos_div=" << format_double(e.mean.l_pos_div)
       << " l_neg_div=" << format_double(e.mean.l_neg_div)
       << " total=" << format_double(e.mean.total) << " t=" << format_double(e.mean.t)
       << " lr=" << format_double(e.lr) << " pos_labels=" << e.pos_count
       << " neg_labels=" << e.neg_count << "\n";
  }
}

void print_metrics(std::ostream& os, const MetricReport& rep) {
  os << "micro_auprc=" << format_double(rep.micro_auprc) << "\n"
     << "macro_auprc=" << format_double(rep.macro_auprc) << "\n"
     << "f1_at_0.5=" << format_double(rep.f1_at_half) << "\n"
     << "classes_evaluated=" << rep.classes_evaluated << "\n"
     << "classes_skipped=" << rep.classes_skipped << "\n";
}

void emit_pr_curve(const std::string& path, const LabelMatrix& y, const MatD& z) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open PR curve output: " + path);
  write_pr_curve_csv(os, y, z);
}

LabeledSet load_labeled(const std::string& emb_path, const std::string& labels_path) {
  const EmbeddingBatch batch = load_embeddings(emb_path);
  const LabelFile labels = load_labels(labels_path);
  if (labels.labels.rows() != batch.rows())
    throw ShapeError("labels row count (" + std::to_string(labels.labels.rows()) +
                     ") does not match embeddings (" + std::to_string(batch.rows()) + ")");
  LabeledSet set;
  set.embeddings = batch.features;
  set.labels = labels.labels;
  set.domain = batch.domain;
  return set;
}

SourceStatsBlock build_stats(const ParameterSet& params, const LabeledSet& source) {
  SourceStatsBlock stats;
  stats.ranges = compute_source_ranges(predict(params, source.embeddings));
  stats.weights = class_weights(source.labels);
  return stats;
}

std::vector<std::string> class_names(std::size_t k) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < k; ++i) names.push_back("class_" + std::to_string(i));
  return names;
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

int cmd_gen(const CommonArgs& common, const std::string& out_dir) {
  const RunConfig cfg = common.resolve();
  const SyntheticSpec spec = cfg.synthetic_spec();
  const auto [source, target] = gen_synthetic(spec, cfg.seed);

  fs::create_directories(out_dir);
  EmbeddingBatch batch;
  batch.aug = AugTag::None;

  batch.features = source.embeddings;
  batch.domain = Domain::Source;
  save_embeddings(batch, out_dir + "/source_embeddings.emb1");
  save_labels({class_names(spec.num_classes), source.labels}, out_dir + "/source_labels.csv");

  batch.features = target.embeddings;
  batch.domain = Domain::Target;
  save_embeddings(batch, out_dir + "/target_embeddings.emb1");
  // held-out: evaluation only, never an adaptation input
  save_labels({class_names(spec.num_classes), target.labels}, out_dir + "/target_labels.csv");

  write_config_echo(std::cout, cfg);
  std::cout << "source_rows=" << source.embeddings.rows()
            << "\ntarget_rows=" << target.embeddings.rows() << "\nout_dir=" << out_dir << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train-source / train-upper
// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string embeddings, labels, out_model;
  std::string eval_embeddings, eval_labels;
  std::string pr_curve_path;
};

int cmd_train(const CommonArgs& common, const TrainArgs& args) {
  const RunConfig cfg = common.resolve();
  const LabeledSet data = load_labeled(args.embeddings, args.labels);
  const ClassifierConfig model_cfg = cfg.classifier_config(data.labels.cols());
  if (data.embeddings.cols() != model_cfg.input_dim)
    throw ShapeError("embedding dimension " + std::to_string(data.embeddings.cols()) +
                     " does not match input_dim " + std::to_string(model_cfg.input_dim));

  const AdaptResult res = train_supervised(data, cfg.adapt_config(), model_cfg);
  const SourceStatsBlock stats = build_stats(res.params, data);
  save_model(args.out_model, res.params, &stats);

  auto log = open_log(args.out_model + ".log");
  write_config_echo(log, cfg);
  write_epoch_records(log, res.report);

  write_config_echo(std::cout, cfg);
  std::cout << "model=" << args.out_model << "\n";
  if (!args.eval_embeddings.empty()) {
    const LabeledSet eval_set = load_labeled(args.eval_embeddings, args.eval_labels);
    const MatD probs = predict(res.params, eval_set.embeddings);
    print_metrics(std::cout, evaluate_metrics(eval_set.labels, probs));
    if (!args.pr_curve_path.empty()) emit_pr_curve(args.pr_curve_path, eval_set.labels, probs);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// adapt
// ---------------------------------------------------------------------------

struct AdaptArgs {
  std::string source_embeddings, source_labels, target_embeddings;
  std::string init_model;
  std::string out_model;
  std::string eval_labels;
  std::string pr_curve_path;
  std::size_t select_buffer = 0;  // 0 = adapt on the full target set
};

int cmd_adapt(const CommonArgs& common, const AdaptArgs& args) {
  const RunConfig cfg = common.resolve();
  const LabeledSet source = load_labeled(args.source_embeddings, args.source_labels);
  const EmbeddingBatch target_batch = load_embeddings(args.target_embeddings);

  std::optional<LoadedModel> init;
  if (!args.init_model.empty()) init = load_model(args.init_model);

  const ClassifierConfig model_cfg =
      init ? init->params.config : cfg.classifier_config(source.labels.cols());

  UnlabeledSet target;
  target.domain = Domain::Target;
  target.embeddings = target_batch.features;

  std::string selection_line;
  if (args.select_buffer > 0) {
    if (!init || !init->stats)
      throw ConfigError(
          "--select-buffer needs --init-model with source statistics (a train-source model)");
    SelectionBuffer buffer(args.select_buffer);
    const MatD probs = predict(init->params, target_batch.features);
    for (std::size_t r = 0; r < target_batch.rows(); ++r) {
      std::vector<double> row(probs.row(r), probs.row(r) + probs.cols());
      Embedding e;
      e.domain = Domain::Target;
      e.values.assign(target_batch.features.row(r),
                      target_batch.features.row(r) + target_batch.dim());
      buffer.offer(std::move(e), d_score(row, init->stats->ranges, init->stats->weights));
    }
    const auto kept = buffer.ranked();
    MatF selected(kept.size(), target_batch.dim());
    for (std::size_t r = 0; r < kept.size(); ++r)
      for (std::size_t c = 0; c < target_batch.dim(); ++c)
        selected(r, c) = kept[r].embedding.values[c];
    selection_line = "selected=" + std::to_string(kept.size()) + " of " +
                     std::to_string(target_batch.rows()) + " by d-score";
    target.embeddings = std::move(selected);
  }

  const AdaptResult res =
      adapt(source, target, cfg.adapt_config(), model_cfg, init ? &init->params : nullptr);
  const SourceStatsBlock stats = build_stats(res.params, source);
  save_model(args.out_model, res.params, &stats);

  auto log = open_log(args.out_model + ".log");
  write_config_echo(log, cfg);
  if (!selection_line.empty()) log << selection_line << "\n";
  log << "adapt_target_rows=" << target.embeddings.rows() << "\n";
  write_epoch_records(log, res.report);

  write_config_echo(std::cout, cfg);
  if (!selection_line.empty()) std::cout << selection_line << "\n";
  std::cout << "model=" << args.out_model << "\n";

  if (!args.eval_labels.empty()) {
    const LabelFile held_out = load_labels(args.eval_labels);
    if (held_out.labels.rows() != target_batch.rows())
      throw ShapeError("held-out labels do not match the target embeddings");
    const MatD probs = predict(res.params, target_batch.features);
    print_metrics(std::cout, evaluate_metrics(held_out.labels, probs));
    if (!args.pr_curve_path.empty()) emit_pr_curve(args.pr_curve_path, held_out.labels, probs);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string model, embeddings, labels;
  std::string pr_curve_path;
};

int cmd_eval(const EvalArgs& args) {
  const LoadedModel model = load_model(args.model);
  const LabeledSet data = load_labeled(args.embeddings, args.labels);
  if (data.labels.cols() != model.params.config.num_classes)
    throw ShapeError("labels class count does not match the model");
  const MatD probs = predict(model.params, data.embeddings);
  std::cout << "model=" << args.model << "\n";
  print_metrics(std::cout, evaluate_metrics(data.labels, probs));
  if (!args.pr_curve_path.empty()) emit_pr_curve(args.pr_curve_path, data.labels, probs);
  return 0;
}

// ---------------------------------------------------------------------------
// stream-sim
// ---------------------------------------------------------------------------

struct StreamArgs {
  std::string model, source_embeddings, source_labels, stream;
  std::string eval_labels;
  std::string out_report;
  std::size_t buffer_capacity = 256;
  std::size_t trigger_every = 0;
};

int cmd_stream_sim(const CommonArgs& common, const StreamArgs& args) {
  const RunConfig cfg = common.resolve();
  if (args.trigger_every == 0) throw ConfigError("--trigger-every must be >= 1");

  LoadedModel model = load_model(args.model);
  if (!model.stats) throw ConfigError("stream-sim needs a model with source statistics");
  const LabeledSet source = load_labeled(args.source_embeddings, args.source_labels);
  const EmbeddingBatch stream = load_embeddings(args.stream);
  if (stream.rows() == 0) throw ShapeError("stream-sim: empty stream");

  std::optional<LabelFile> held_out;
  if (!args.eval_labels.empty()) {
    held_out = load_labels(args.eval_labels);
    if (held_out->labels.rows() != stream.rows())
      throw ShapeError("held-out labels do not match the stream");
  }

  auto report = open_log(args.out_report);
  write_config_echo(report, cfg);
  report << "buffer_capacity=" << args.buffer_capacity
         << " trigger_every=" << args.trigger_every << "\n";

  SelectionBuffer buffer(args.buffer_capacity);
  SourceStatsBlock stats = *model.stats;
  std::size_t accepted = 0, triggers = 0;

  for (std::size_t r = 0; r < stream.rows(); ++r) {
    MatF row_features(1, stream.dim());
    for (std::size_t c = 0; c < stream.dim(); ++c) row_features(0, c) = stream.features(r, c);
    const MatD probs = predict(model.params, row_features);
    std::vector<double> row(probs.row(0), probs.row(0) + probs.cols());
    const double d = d_score(row, stats.ranges, stats.weights);

    Embedding e;
    e.domain = Domain::Target;
    e.values.assign(stream.features.row(r), stream.features.row(r) + stream.dim());
    const auto decision = buffer.offer(std::move(e), d);

    const char* verdict = decision.outcome == SelectionBuffer::Outcome::Rejected ? "rejected"
                          : decision.outcome == SelectionBuffer::Outcome::Accepted
                              ? "accepted"
                              : "accepted_evict";
    report << "offer=" << r << " d=" << format_double(d) << " decision=" << verdict
           << " occupancy=" << buffer.size() << "\n";

    if (decision.accepted()) {
      ++accepted;
      if (accepted % args.trigger_every == 0) {
        ++triggers;
        const auto kept = buffer.ranked();
        UnlabeledSet retrain_target;
        retrain_target.domain = Domain::Target;
        retrain_target.embeddings = MatF(kept.size(), stream.dim());
        for (std::size_t i = 0; i < kept.size(); ++i)
          for (std::size_t c = 0; c < stream.dim(); ++c)
            retrain_target.embeddings(i, c) = kept[i].embedding.values[c];

        const AdaptResult res = adapt(source, retrain_target, cfg.adapt_config(),
                                      model.params.config, &model.params);
        model.params = res.params;
        stats = build_stats(model.params, source);  // rescore future offers with the new model

        report << "trigger=" << triggers << " at_offer=" << r << " buffer_rows=" << kept.size();
        if (held_out) {
          const MetricReport m =
              evaluate_metrics(held_out->labels, predict(model.params, stream.features));
          report << " micro_auprc=" << format_double(m.micro_auprc)
                 << " macro_auprc=" << format_double(m.macro_auprc)
                 << " f1_at_0.5=" << format_double(m.f1_at_half);
        }
        report << "\n";
      }
    }
  }

  report << "final accepted=" << accepted << " evictions=" << buffer.evictions()
         << " triggers=" << triggers << " occupancy=" << buffer.size() << "\n";
  save_buffer(buffer, Domain::Target, args.out_report + ".buffer.emb1",
              args.out_report + ".buffer.dsc1");
  save_model(args.out_report + ".model.mud1", model.params, &stats);

  write_config_echo(std::cout, cfg);
  std::cout << "accepted=" << accepted << "\nevictions=" << buffer.evictions()
            << "\ntriggers=" << triggers << "\nreport=" << args.out_report << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-label unsupervised domain adaptation toolkit"};
  app.require_subcommand(1);

  CommonArgs common;
  app.add_option("--config", common.config_path, "key=value configuration file")->expected(1);
  std::uint64_t seed_value = 0;
  CLI::Option* seed_opt = app.add_option("--seed", seed_value, "override the configured seed");

  std::string out_dir;
  auto* gen = app.add_subcommand("gen", "generate the synthetic domain-shift benchmark");
  gen->add_option("--out", out_dir, "output directory")->required();

  TrainArgs train_args;
  auto add_train_opts = [&](CLI::App* cmd) {
    cmd->add_option("--embeddings", train_args.embeddings, "training embeddings (EMB1)")->required();
    cmd->add_option("--labels", train_args.labels, "training labels (CSV)")->required();
    cmd->add_option("--out", train_args.out_model, "output model path")->required();
    cmd->add_option("--eval-embeddings", train_args.eval_embeddings, "evaluation embeddings");
    cmd->add_option("--eval-labels", train_args.eval_labels, "evaluation labels");
    cmd->add_option("--emit-pr-curve", train_args.pr_curve_path, "write PR points as CSV");
  };
  auto* train_source = app.add_subcommand("train-source", "supervised baseline on source data");
  add_train_opts(train_source);
  auto* train_upper = app.add_subcommand("train-upper", "supervised reference on labeled target data");
  add_train_opts(train_upper);

  AdaptArgs adapt_args;
  auto* adapt_cmd = app.add_subcommand("adapt", "unsupervised adaptation to an unlabeled target");
  adapt_cmd->add_option("--source-embeddings", adapt_args.source_embeddings)->required();
  adapt_cmd->add_option("--source-labels", adapt_args.source_labels)->required();
  adapt_cmd->add_option("--target-embeddings", adapt_args.target_embeddings)->required();
  adapt_cmd->add_option("--init-model", adapt_args.init_model, "start from this model");
  adapt_cmd->add_option("--out", adapt_args.out_model, "output model path")->required();
  adapt_cmd->add_option("--eval-labels", adapt_args.eval_labels,
                        "held-out target labels, evaluation only");
  adapt_cmd->add_option("--emit-pr-curve", adapt_args.pr_curve_path);
  adapt_cmd->add_option("--select-buffer", adapt_args.select_buffer,
                        "adapt only on the top-N target rows by retention score");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a model on labeled embeddings");
  eval_cmd->add_option("--model", eval_args.model)->required();
  eval_cmd->add_option("--embeddings", eval_args.embeddings)->required();
  eval_cmd->add_option("--labels", eval_args.labels)->required();
  eval_cmd->add_option("--emit-pr-curve", eval_args.pr_curve_path);

  StreamArgs stream_args;
  auto* stream_cmd =
      app.add_subcommand("stream-sim", "replay a target stream with selective retention");
  stream_cmd->add_option("--model", stream_args.model, "initial model (train-source output)")
      ->required();
  stream_cmd->add_option("--source-embeddings", stream_args.source_embeddings)->required();
  stream_cmd->add_option("--source-labels", stream_args.source_labels)->required();
  stream_cmd->add_option("--stream", stream_args.stream, "target stream (EMB1)")->required();
  stream_cmd->add_option("--out", stream_args.out_report, "report path")->required();
  stream_cmd->add_option("--select-buffer", stream_args.buffer_capacity, "buffer capacity");
  stream_cmd->add_option("--trigger-every", stream_args.trigger_every,
                         "retrain after this many accepted samples")
      ->required();
  stream_cmd->add_option("--eval-labels", stream_args.eval_labels,
                         "held-out stream labels, evaluation only");

  // let --config/--seed appear after the subcommand name as well
  for (CLI::App* sub : app.get_subcommands(nullptr)) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (*seed_opt) common.seed = seed_value;

  try {
    if (gen->parsed()) return cmd_gen(common, out_dir);
    if (train_source->parsed() || train_upper->parsed()) return cmd_train(common, train_args);
    if (adapt_cmd->parsed()) return cmd_adapt(common, adapt_args);
    if (eval_cmd->parsed()) return cmd_eval(eval_args);
    if (stream_cmd->parsed()) return cmd_stream_sim(common, stream_args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 4;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 3;
  } catch (const ShapeError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
