#include "adp/dataset.hpp"
#include "adp/embedding.hpp"
#include "adp/error.hpp"
#include "adp/experiment.hpp"
#include "adp/hash.hpp"
#include "adp/plan.hpp"
#include "adp/prompt.hpp"

#include "CLI11.hpp"

#include <fmt/format.h>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using namespace adp;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

bool is_usage_error(Errc code) {
  switch (code) {
    case Errc::config_invalid:
    case Errc::n_out_of_range:
    case Errc::missing_field:
    case Errc::bad_gold:
    case Errc::duplicate_id:
    case Errc::empty_dataset:
    case Errc::bad_record:
    case Errc::bad_template:
    case Errc::template_missing_placeholder:
    case Errc::demos_not_allowed:
    case Errc::empty_batch:
      return true;
    default:
      return false;
  }
}

TaskSpec task_spec_or_fail(const std::string& name) {
  auto task = parse_task(name);
  if (!task || *task == TaskId::custom)
    throw Error(Errc::config_invalid, fmt::format("unknown task '{}'", name));
  return TaskSpec::builtin(*task);
}

/// Flags shared by render/run; applied over the config file as overrides.
struct ConfigOverrides {
  std::map<std::string, std::string> values;

  void attach(CLI::App* cmd) {
    auto add = [this, cmd](const std::string& flag, const std::string& key,
                           const std::string& help) {
      cmd->add_option_function<std::string>(
          flag, [this, key](const std::string& value) { values[key] = value; }, help);
    };
    add("--dataset", "dataset", "dataset file (overrides config)");
    add("--task", "task", "task id (overrides config)");
    add("--subset-n", "subset_n", "subset size (overrides config)");
    add("--seed", "seed", "seed (overrides config)");
    add("--n,--batch-size", "batch_size", "batch size N (overrides config)");
    add("--mode", "mode", "prompt mode: single|batch|auto_demo|few_shot");
    add("--selection", "selection", "random|retrieval_partition|retrieval_per_anchor");
    add("--backend", "backend", "live|replay|mock");
    add("--max-in-flight", "max_in_flight", "max outstanding requests");
    add("--retries", "retries", "whole-batch retries on wrong item count");
    add("--model-profile", "model_profile", "mini|large|custom");
    add("--model-id", "model_id", "model id override");
    add("--cache", "cache", "response cache file");
    add("--embedding-cache", "embedding_cache", "embedding cache file");
    add("--embedding-provider", "embedding_provider", "local|http:<model>");
    add("--templates-dir", "templates_dir", "prompt template directory");
    add("--demo-count", "demo_count", "few-shot demonstration count");
    add("--temperature", "temperature", "sampling temperature");
    add("--max-output-tokens", "max_output_tokens", "completion token limit");
  }

  ExperimentConfig resolve(const std::string& config_path) const {
    ExperimentConfig config;
    if (!config_path.empty()) config = ExperimentConfig::from_file(config_path);
    for (const auto& [key, value] : values) config.apply_override(key, value);
    return config;
  }
};

void print_score(const ScoreReport& report) {
  fmt::print("accuracy {} ({}/{} correct, {} absent)\n", format_accuracy(report.accuracy),
             report.correct, report.total, report.absent);
  fmt::print("by position:\n");
  for (const auto& [pos, counts] : report.by_position) {
    fmt::print("  {:>3}: {}/{}\n", pos, counts.first, counts.second);
  }
  fmt::print("by alignment:\n");
  for (const auto& [verdict, counts] : report.by_alignment) {
    fmt::print("  {:>9}: {}/{}\n", verdict, counts.first, counts.second);
  }
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Batch-prompting harness: auto-demo prompts, retrieval batch selection, "
               "structured output parsing, and accuracy/token reporting"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "validate and normalize a dataset");
  std::string ingest_task;
  std::string ingest_input;
  std::string ingest_output;
  std::string ingest_format = "auto";
  std::optional<std::size_t> ingest_subset;
  std::uint64_t ingest_seed = 0;
  ingest->add_option("--task", ingest_task, "task id")->required();
  ingest->add_option("--input", ingest_input, "source file (jsonl/tsv/csv)")->required();
  ingest->add_option("--output", ingest_output, "normalized output file")->required();
  ingest->add_option("--format", ingest_format, "auto|jsonl|tsv");
  ingest->add_option("--subset-n", ingest_subset, "keep a seeded subset of n points");
  ingest->add_option("--seed", ingest_seed, "subset seed");

  // embed
  auto* embed = app.add_subcommand("embed", "embed a normalized dataset");
  std::string embed_task;
  std::string embed_input;
  std::string embed_output;
  std::string embed_provider = "local";
  std::string embed_cache;
  embed->add_option("--task", embed_task, "task id")->required();
  embed->add_option("--input", embed_input, "normalized dataset")->required();
  embed->add_option("--output", embed_output, "embedding output file")->required();
  embed->add_option("--provider", embed_provider, "local|http:<model>");
  embed->add_option("--embedding-cache", embed_cache, "embedding cache file");

  // plan
  auto* plan_cmd = app.add_subcommand("plan", "build a batch plan");
  std::string plan_task;
  std::string plan_input;
  std::string plan_output;
  std::string plan_selection = "random";
  std::string plan_provider = "local";
  std::string plan_cache;
  std::size_t plan_n = 1;
  std::uint64_t plan_seed = 0;
  plan_cmd->add_option("--task", plan_task, "task id")->required();
  plan_cmd->add_option("--input", plan_input, "normalized dataset")->required();
  plan_cmd->add_option("--output", plan_output, "plan output file")->required();
  plan_cmd->add_option("--selection", plan_selection,
                       "random|retrieval_partition|retrieval_per_anchor");
  plan_cmd->add_option("--n", plan_n, "batch size")->required();
  plan_cmd->add_option("--seed", plan_seed, "seed");
  plan_cmd->add_option("--provider", plan_provider, "embedding provider");
  plan_cmd->add_option("--embedding-cache", plan_cache, "embedding cache file");

  // render
  auto* render_cmd = app.add_subcommand("render", "dry-run: write prompts, no backend");
  std::string render_config;
  std::string render_out;
  ConfigOverrides render_overrides;
  render_cmd->add_option("--config", render_config, "experiment config file");
  render_cmd->add_option("--out", render_out, "output directory")->required();
  render_overrides.attach(render_cmd);

  // run
  auto* run_cmd = app.add_subcommand("run", "execute an experiment");
  std::string run_config;
  std::string run_out;
  bool run_strict = false;
  ConfigOverrides run_overrides;
  run_cmd->add_option("--config", run_config, "experiment config file");
  run_cmd->add_option("--out", run_out, "run directory")->required();
  run_cmd->add_flag("--strict", run_strict, "exit 2 on partial failures or diagnostics");
  run_overrides.attach(run_cmd);

  // score
  auto* score_cmd = app.add_subcommand("score", "recompute metrics from a run directory");
  std::string score_run;
  score_cmd->add_option("--run", score_run, "run directory")->required();

  // compare
  auto* compare_cmd = app.add_subcommand("compare", "paired comparison of two runs");
  std::string compare_a;
  std::string compare_b;
  compare_cmd->add_option("--run-a", compare_a, "first run directory")->required();
  compare_cmd->add_option("--run-b", compare_b, "second run directory")->required();

  // report
  auto* report_cmd = app.add_subcommand("report", "result matrix over run directories");
  std::vector<std::string> report_runs;
  std::string report_output;
  report_cmd->add_option("runs", report_runs, "run directories");
  report_cmd->add_option("--output", report_output, "write CSV here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints the message / help text
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (ingest->parsed()) {
    const TaskSpec spec = task_spec_or_fail(ingest_task);
    FileFormat format = FileFormat::auto_detect;
    if (ingest_format == "jsonl") format = FileFormat::jsonl;
    else if (ingest_format == "tsv" || ingest_format == "csv") format = FileFormat::delimited;
    else if (ingest_format != "auto")
      throw Error(Errc::config_invalid, fmt::format("unknown format '{}'", ingest_format));
    Dataset dataset = load_dataset(ingest_input, spec, format);
    if (ingest_subset) dataset = subset(dataset, *ingest_subset, ingest_seed);
    save_dataset(dataset, ingest_output);
    fmt::print("{} points, checksum {}\n", dataset.size(), hex64(dataset.checksum));
    return kExitOk;
  }

  if (embed->parsed()) {
    const TaskSpec spec = task_spec_or_fail(embed_task);
    const Dataset dataset = load_dataset(embed_input, spec);
    auto provider = make_provider(embed_provider);
    std::optional<EmbeddingCache> cache;
    if (!embed_cache.empty()) cache.emplace(embed_cache);
    const auto embeddings = embed_corpus(dataset, *provider, cache ? &*cache : nullptr);
    std::vector<json> records;
    for (const auto& point : dataset.points) {
      const auto& vec = embeddings.at(point.id);
      json record;
      record["provider"] = provider->id();
      record["text_hash"] = text_hash(similarity_text(spec, point));
      record["dim"] = vec.dim();
      record["values"] = vec.values;
      records.push_back(std::move(record));
    }
    write_jsonl(embed_output, records);
    fmt::print("{} vectors, dim {}\n", records.size(),
               records.empty() ? 0 : records.front()["dim"].get<std::size_t>());
    return kExitOk;
  }

  if (plan_cmd->parsed()) {
    const TaskSpec spec = task_spec_or_fail(plan_task);
    const Dataset dataset = load_dataset(plan_input, spec);
    const auto selection = parse_selection(plan_selection);
    if (!selection)
      throw Error(Errc::config_invalid, fmt::format("unknown selection '{}'", plan_selection));
    BatchPlan plan;
    if (*selection == SelectionMode::random) {
      plan = plan_batches_random(dataset, plan_n, plan_seed);
    } else {
      auto provider = make_provider(plan_provider);
      std::optional<EmbeddingCache> cache;
      if (!plan_cache.empty()) cache.emplace(plan_cache);
      const auto embeddings = embed_corpus(dataset, *provider, cache ? &*cache : nullptr);
      plan = plan_batches_retrieval(dataset, embeddings, plan_n, plan_seed, *selection);
      plan.provider_id = provider->id();
    }
    save_plan(plan, plan_output);
    fmt::print("{} batches of size <= {}\n", plan.batches.size(), plan.batch_size);
    return kExitOk;
  }

  if (render_cmd->parsed()) {
    const ExperimentConfig config = render_overrides.resolve(render_config);
    render_prompts(config, render_out);
    fmt::print("prompts written to {}\n", (fs::path(render_out) / "prompts").string());
    return kExitOk;
  }

  if (run_cmd->parsed()) {
    const ExperimentConfig config = run_overrides.resolve(run_config);
    const RunResult result = run_experiment(config, run_out);
    print_score(result.scores);
    fmt::print("tokens: {} prompt + {} completion ({:.1f}/item)\n", result.prompt_tokens,
               result.completion_tokens, result.tokens_per_item);
    std::size_t diagnostic_total = 0;
    for (const auto& [kind, count] : result.diagnostic_counts) {
      fmt::print("diagnostic {}: {}\n", kind, count);
      diagnostic_total += count;
    }
    if (result.failed_batches > 0)
      fmt::print("failed batches: {}/{}\n", result.failed_batches, result.batch_count);
    if (run_strict && (result.failed_batches > 0 || diagnostic_total > 0 ||
                       result.scores.absent > 0)) {
      fmt::print(stderr, "strict mode: partial failures present\n");
      return kExitRuntime;
    }
    return kExitOk;
  }

  if (score_cmd->parsed()) {
    const PersistedRun run = load_run(score_run);
    const ScoreReport recomputed = score(run.items);
    print_score(recomputed);
    const double recorded = run.summary["metrics"].value("accuracy", -1.0);
    if (recorded >= 0.0 && recorded != recomputed.accuracy) {
      fmt::print(stderr, "summary accuracy {} disagrees with recount {}\n", recorded,
                 recomputed.accuracy);
      return kExitRuntime;
    }
    return kExitOk;
  }

  if (compare_cmd->parsed()) {
    const ComparisonReport report = compare_runs(load_run(compare_a), load_run(compare_b));
    fmt::print("{}\n", report.to_json().dump(2));
    return kExitOk;
  }

  if (report_cmd->parsed()) {
    std::vector<PersistedRun> runs;
    runs.reserve(report_runs.size());
    for (const auto& dir : report_runs) runs.push_back(load_run(dir));
    const std::string csv = make_report(runs);
    if (report_output.empty()) {
      fmt::print("{}", csv);
    } else {
      write_file(report_output, csv);
    }
    return kExitOk;
  }

  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_usage_error(e.code()) ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
