#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "addn/dataset.hpp"
#include "addn/trainer.hpp"

namespace addn {

/// Everything a CLI run depends on. Field names double as config-file keys
/// and `--key` flags.
struct RunConfig {
  std::string mode = "train";  // train | eval | synth | gradcheck
  std::string dataset = "synth";  // "synth" or a directory in ICBHI layout
  std::string split_file;         // default: <dataset>/split.txt
  std::string out = "run";
  std::string checkpoint;         // eval input; train resumes from it when set
  std::string eval_split = "test";

  SynthConfig synth;

  std::size_t d_model = 96;
  std::size_t heads = 4;
  std::size_t layers = 4;
  std::size_t ffn_hidden = 0;  // 0: 2 * d_model
  std::size_t mask_hidden = 32;
  bool shared_lambda = false;
  double lambda_init = 0.8;
  bool aff_residual = false;

  double lr = 5e-5;
  double weight_decay = 0.1;
  std::size_t batch = 8;
  std::size_t epochs = 50;
  std::size_t max_steps = 0;
  double beta = 0.5;
  double epsilon = 0.2;
  double alpha = 0.02;

  bool no_aff = false;
  bool no_ddl = false;
  bool no_bias_loss = false;

  std::uint64_t seed = 0;
  std::size_t threads = 0;
};

using ConfigPairs = std::vector<std::pair<std::string, std::string>>;

/// Every recognized key, in serialization order.
const std::vector<std::string>& config_keys();

/// True for keys that are boolean switches (accepted bare as flags).
bool is_flag_key(const std::string& key);

/// Sets one key from its text form. Unknown keys and malformed values throw
/// UsageError naming the key.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);
std::string get_config_value(const RunConfig& config, const std::string& key);

/// Flat `key = value` text; `#` starts a comment. Unknown keys are rejected.
ConfigPairs parse_config_text(const std::string& text, const std::string& source);

/// Defaults, then the file (if any), then flags; validated at the end.
RunConfig parse_config(const ConfigPairs& flags, const std::filesystem::path& config_file = {});

/// Range and consistency checks; throws UsageError with the offending key.
void validate(const RunConfig& config);

/// Canonical text listing every key, readable by parse_config_text.
std::string to_text(const RunConfig& config);

ModelConfig model_config(const RunConfig& config);
TrainConfig train_config(const RunConfig& config);

/// Short name of the ablation combination, e.g. "full" or "no_aff+no_ddl".
std::string ablation_name(const RunConfig& config);

}  // namespace addn
