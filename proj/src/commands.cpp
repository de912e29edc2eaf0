#include "addn/commands.hpp"

#include <fstream>

#include "addn/checkpoint.hpp"
#include "addn/error.hpp"
#include "addn/gradcheck.hpp"
#include "addn/report.hpp"

namespace addn {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw MissingFileError("cannot write " + path.string());
  return out;
}

}  // namespace

Dataset load_dataset(const RunConfig& config) {
  if (config.dataset == "synth") return synth_dataset(config.synth, config.seed);
  const std::filesystem::path dir(config.dataset);
  const std::filesystem::path split = config.split_file.empty() ? dir / "split.txt" : std::filesystem::path(config.split_file);
  return load_icbhi(dir, split);
}

std::string format_metrics(const MetricsReport& r) {
  std::string s = "Sp " + format_percent(r.sp) + "  Se " + format_percent(r.se) + "  Score " + format_percent(r.score);
  s += "\nconfusion (rows truth, cols prediction: normal crackle wheeze both)\n";
  for (const auto& row : r.confusion) {
    for (std::size_t c = 0; c < row.size(); ++c) s += (c ? " " : "  ") + std::to_string(row[c]);
    s += "\n";
  }
  return s;
}

int cmd_synth(const RunConfig& config, std::ostream& out) {
  const Dataset ds = synth_dataset(config.synth, config.seed);
  write_dataset(ds, config.out);
  out << "wrote " << ds.clips.size() << " clips (" << ds.indices(Split::Train).size() << " train, "
      << ds.indices(Split::Test).size() << " test) to " << config.out << "\n";
  return kExitOk;
}

int cmd_train(const RunConfig& config, std::ostream& out) {
  const Dataset ds = load_dataset(config);
  const MelExtractor extractor{MelConfig{}};
  const LabeledSet train_set = build_labeled_set(ds, Split::Train, extractor, config.threads);
  const LabeledSet test_set = build_labeled_set(ds, Split::Test, extractor, config.threads);
  const TrainConfig tc = train_config(config);

  ModelParams params = initialize_model(tc, train_set);
  AdamState adam;
  std::uint64_t epoch_offset = 0;
  if (!config.checkpoint.empty()) {
    const Checkpoint ck = load_checkpoint(config.checkpoint);
    restore_params(ck, params);
    if (ck.adam) adam = *ck.adam;
    epoch_offset = ck.epoch;
  }

  std::filesystem::create_directories(config.out);
  const std::filesystem::path dir(config.out);
  open_out(dir / "config.txt") << to_text(config);
  std::ofstream log = open_out(dir / "metrics.jsonl");
  const std::string run = ablation_name(config);

  TrainResult result = train_from(std::move(params), tc, train_set, test_set.size() ? &test_set : nullptr,
                                  [&](const EpochRecord& rec) {
                                    EpochRecord shifted = rec;
                                    shifted.epoch += epoch_offset;
                                    log << log_line(make_log_record(shifted, run, config.no_aff, config.no_ddl,
                                                                    config.no_bias_loss))
                                        << "\n";
                                    log.flush();
                                    out << "epoch " << shifted.epoch << " loss " << rec.train_loss;
                                    if (rec.metrics) {
                                      out << "  Sp " << format_percent(rec.metrics->sp) << " Se "
                                          << format_percent(rec.metrics->se) << " Score "
                                          << format_percent(rec.metrics->score);
                                    }
                                    out << "\n";
                                  },
                                  adam);

  save_checkpoint(make_checkpoint(result.params, to_text(config), epoch_offset + result.epochs.size(), &result.adam),
                  dir / "checkpoint.addn");
  out << "checkpoint written to " << (dir / "checkpoint.addn").string() << "\n";
  return kExitOk;
}

int cmd_eval(const RunConfig& config, std::ostream& out) {
  if (config.checkpoint.empty()) throw UsageError("checkpoint", "eval needs --checkpoint");
  const Checkpoint ck = load_checkpoint(config.checkpoint);
  const ModelConfig mc = model_config(config);
  ModelParams params = init_model(mc, config.seed);
  restore_params(ck, params);
  const Dataset ds = load_dataset(config);
  const Split split = config.eval_split == "train" ? Split::Train : Split::Test;
  const LabeledSet data = build_labeled_set(ds, split, MelExtractor{MelConfig{}}, config.threads);
  const MetricsReport report = evaluate(params, mc, data, config.threads);
  out << config.eval_split << " split, " << data.size() << " cycles\n" << format_metrics(report);
  return kExitOk;
}

int cmd_gradcheck(const RunConfig& config, std::ostream& out, const std::string& fault) {
  set_gradient_fault(fault);
  GradcheckSuiteConfig gc;
  gc.seed = config.seed;
  GradcheckReport report;
  try {
    report = run_gradcheck_suite(gc);
  } catch (...) {
    set_gradient_fault({});
    throw;
  }
  set_gradient_fault({});
  out << format_gradcheck_report(report);
  return report.passed() ? kExitOk : kExitVerification;
}

int cmd_report(const std::vector<std::filesystem::path>& logs, std::ostream& out) {
  out << report_from_logs(logs);
  return kExitOk;
}

}  // namespace addn
