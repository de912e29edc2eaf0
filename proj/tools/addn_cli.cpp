// addn: train, evaluate and verify the adaptive differential denoising model.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "addn/commands.hpp"
#include "addn/error.hpp"
#include "addn/runtime.hpp"

namespace {

struct Subcommand {
  CLI::App* app = nullptr;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> flags;
  std::string config_file;
};

void add_config_options(Subcommand& sub) {
  sub.app->add_option("--config", sub.config_file, "flat key = value config file")->check(CLI::ExistingFile);
  const addn::RunConfig defaults;
  for (const std::string& key : addn::config_keys()) {
    if (key == "mode") continue;
    if (addn::is_flag_key(key)) {
      sub.app->add_flag("--" + key, sub.flags[key]);
    } else {
      const std::string value = addn::get_config_value(defaults, key);
      sub.app->add_option("--" + key, sub.values[key], value.empty() ? "" : "default " + value);
    }
  }
}

addn::RunConfig resolve(const Subcommand& sub, const std::string& mode) {
  addn::ConfigPairs pairs{{"mode", mode}};
  for (const auto& [key, value] : sub.values) {
    if (sub.app->count("--" + key)) pairs.emplace_back(key, value);
  }
  for (const auto& [key, on] : sub.flags) {
    if (sub.app->count("--" + key)) pairs.emplace_back(key, on ? "true" : "false");
  }
  return addn::parse_config(pairs, sub.config_file);
}

}  // namespace

int main(int argc, char** argv) {
  addn::configure_allocator();
  CLI::App app{"Adaptive differential denoising for respiratory sound classification"};
  app.require_subcommand(1);

  Subcommand train{app.add_subcommand("train", "train a model and log per-epoch test metrics")};
  Subcommand eval{app.add_subcommand("eval", "evaluate a checkpoint on a split")};
  Subcommand synth{app.add_subcommand("synth", "write the synthetic dataset as WAV + annotations")};
  Subcommand gradcheck{app.add_subcommand("gradcheck", "finite-difference check of every gradient")};
  for (Subcommand* s : {&train, &eval, &synth, &gradcheck}) add_config_options(*s);

  std::string fault;
  gradcheck.app->add_option("--fault", fault, "corrupt the backward rule of this op (harness check)")
      ->group("");

  std::vector<std::string> logs;
  CLI::App* report = app.add_subcommand("report", "ablation table from metrics logs");
  report->add_option("logs", logs, "metrics.jsonl files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? addn::kExitOk : addn::kExitUsage;
  }

  try {
    if (*train.app) return addn::cmd_train(resolve(train, "train"), std::cout);
    if (*eval.app) return addn::cmd_eval(resolve(eval, "eval"), std::cout);
    if (*synth.app) return addn::cmd_synth(resolve(synth, "synth"), std::cout);
    if (*gradcheck.app) return addn::cmd_gradcheck(resolve(gradcheck, "gradcheck"), std::cout, fault);
    if (*report) {
      std::vector<std::filesystem::path> paths(logs.begin(), logs.end());
      return addn::cmd_report(paths, std::cout);
    }
  } catch (const addn::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return addn::kExitUsage;
  } catch (const addn::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return addn::kExitData;
  } catch (const addn::MissingFileError& e) {
    std::cerr << "missing file: " << e.what() << "\n";
    return addn::kExitData;
  } catch (const addn::DataFormatError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return addn::kExitData;
  } catch (const addn::CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return addn::kExitData;
  } catch (const addn::UndefinedMetricError& e) {
    std::cerr << "metric error: " << e.what() << "\n";
    return addn::kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return addn::kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return addn::kExitVerification;
  }
  return addn::kExitUsage;
}
