#pragma once

#include "adp/dataset.hpp"
#include "adp/gateway.hpp"
#include "adp/parser.hpp"
#include "adp/plan.hpp"
#include "adp/prompt.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace adp {

struct ModelProfile {
  std::string name;      // "mini" | "large" | "custom"
  std::string model_id;
  int max_output_tokens = 0;

  static ModelProfile lookup(const std::string& name);
};

struct ExperimentConfig {
  std::string dataset_path;
  TaskId task_id = TaskId::custom;
  std::optional<std::size_t> subset_n;
  std::string model_profile = "mini";
  std::string model_id;  // defaults from profile
  PromptMode mode = PromptMode::batch;
  std::size_t batch_size = 1;
  SelectionMode selection = SelectionMode::random;
  std::uint64_t seed = 0;
  int retry_on_wrong_count = 1;
  BackendKind backend = BackendKind::mock;
  std::string embedding_provider = "local";
  std::string templates_dir = "templates";
  std::string cache_path;            // replay source; live/mock record target
  std::string embedding_cache_path;
  int max_in_flight = 4;
  std::size_t demo_count = 0;  // few_shot only
  double alignment_tau = 0.9;
  double temperature = 0.0;
  int max_output_tokens = 0;  // 0 -> profile default
  MockKnobs mock_knobs;

  void validate() const;
  json to_json() const;
  static ExperimentConfig from_json(const json& j);
  /// key = value lines; '#' comments; unknown keys rejected.
  static ExperimentConfig from_file(const std::filesystem::path& path);
  void apply_override(const std::string& key, const std::string& value);
};

struct ItemRecord {
  std::string id;
  std::optional<AnswerValue> predicted;
  AnswerValue gold;
  bool correct = false;
  std::size_t batch_index = 0;
  std::size_t position = 0;
  Alignment alignment = Alignment::absent;
  std::size_t raw_begin = 0;  // character span in the raw response
  std::size_t raw_end = 0;
  std::vector<Diagnostic> diagnostics;  // positional diagnostics for this item

  json to_json() const;
  static ItemRecord from_json(const json& j, AnswerKind kind);
};

struct ScoreReport {
  double accuracy = 0.0;
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t absent = 0;
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> by_position;   // pos -> (correct, total)
  std::map<std::string, std::pair<std::size_t, std::size_t>> by_alignment;  // verdict -> (correct, total)
};

ScoreReport score(const std::vector<ItemRecord>& records);

/// Accuracy rendering used everywhere a 3-decimal cell is reported:
/// round half away from zero.
std::string format_accuracy(double accuracy);

struct RunResult {
  ExperimentConfig config;
  std::vector<ItemRecord> items;
  ScoreReport scores;
  long prompt_tokens = 0;
  long completion_tokens = 0;
  double tokens_per_item = 0.0;
  long wall_ms = 0;
  std::map<std::string, std::size_t> diagnostic_counts;  // run-wide, by kind
  std::vector<std::string> request_keys;
  std::string template_hash;
  std::uint64_t dataset_checksum = 0;
  std::size_t batch_count = 0;
  std::size_t retried_batches = 0;
  std::size_t failed_batches = 0;
};

/// Full pipeline: ingest -> (embed) -> plan -> render -> dispatch -> parse ->
/// score, persisting every stage under out_dir (config / plan.jsonl /
/// prompts/ / raw/ / items.jsonl / summary.json).
RunResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Dry run: ingest, plan, and render prompts into out_dir without touching
/// any backend.
void render_prompts(const ExperimentConfig& config, const std::filesystem::path& out_dir);

struct PersistedRun {
  ExperimentConfig config;
  std::vector<ItemRecord> items;
  json summary;
};

PersistedRun load_run(const std::filesystem::path& run_dir);

struct ComparisonReport {
  double accuracy_a = 0.0;
  double accuracy_b = 0.0;
  double accuracy_delta = 0.0;
  long prompt_token_delta = 0;
  long completion_token_delta = 0;
  std::size_t both_correct = 0;
  std::size_t only_a = 0;
  std::size_t only_b = 0;
  std::size_t both_wrong = 0;

  double agreement() const;
  json to_json() const;
};

/// Paired comparison; refuses runs over different item sets or seed
/// discipline (checked via dataset checksum, seed, and scored id multiset).
ComparisonReport compare_runs(const PersistedRun& a, const PersistedRun& b);

/// Result-matrix row key in the paper's table style.
std::string method_label(const ExperimentConfig& config);

/// CSV matrix: rows (dataset, model (method)), columns batch sizes, cells
/// 3-decimal accuracy with "-" for absent cells.
std::string make_report(const std::vector<PersistedRun>& runs);

}  // namespace adp
