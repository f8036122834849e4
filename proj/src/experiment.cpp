#include "adp/experiment.hpp"

#include "adp/embedding.hpp"
#include "adp/error.hpp"
#include "adp/hash.hpp"
#include "adp/rng.hpp"
#include "adp/text.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

namespace adp {

ModelProfile ModelProfile::lookup(const std::string& name) {
  if (name == "mini") return {"mini", "gpt-4o-mini", 16000};
  if (name == "large") return {"large", "gpt-4o", 8000};
  if (name == "custom") return {"custom", "", 4096};
  throw Error(Errc::config_invalid, fmt::format("unknown model profile '{}'", name));
}

void ExperimentConfig::validate() const {
  if (dataset_path.empty()) throw Error(Errc::config_invalid, "dataset path missing");
  ModelProfile::lookup(model_profile);
  if (model_profile == "custom" && model_id.empty())
    throw Error(Errc::config_invalid, "custom profile needs an explicit model_id");
  if (batch_size < 1) throw Error(Errc::config_invalid, "batch_size must be >= 1");
  if (mode == PromptMode::single && batch_size != 1)
    throw Error(Errc::config_invalid, "single mode requires batch_size 1");
  if (selection != SelectionMode::random && batch_size < 2)
    throw Error(Errc::config_invalid, "retrieval selection requires batch_size >= 2");
  if (mode == PromptMode::few_shot) {
    if (demo_count == 0)
      throw Error(Errc::config_invalid, "few_shot mode needs demo_count >= 1");
    if (!subset_n)
      throw Error(Errc::config_invalid,
                  "few_shot mode needs subset_n so a held-out demo pool exists");
  }
  if (retry_on_wrong_count < 0)
    throw Error(Errc::config_invalid, "retry_on_wrong_count must be >= 0");
  if (max_in_flight < 1) throw Error(Errc::config_invalid, "max_in_flight must be >= 1");
  if (alignment_tau < 0.0 || alignment_tau > 1.0)
    throw Error(Errc::config_invalid, "alignment_tau must be in [0,1]");
  if (temperature < 0.0 || temperature > 2.0)
    throw Error(Errc::config_invalid, "temperature must be in [0,2]");
  if (backend == BackendKind::replay && cache_path.empty())
    throw Error(Errc::config_invalid, "replay backend needs a cache path");
}

json ExperimentConfig::to_json() const {
  json j;
  j["dataset"] = dataset_path;
  j["task"] = task_name(task_id);
  if (subset_n) j["subset_n"] = *subset_n;
  j["model_profile"] = model_profile;
  j["model_id"] = model_id;
  j["mode"] = mode_name(mode);
  j["batch_size"] = batch_size;
  j["selection"] = selection_name(selection);
  j["seed"] = seed;
  j["retry_on_wrong_count"] = retry_on_wrong_count;
  j["backend"] = backend_name(backend);
  j["embedding_provider"] = embedding_provider;
  j["templates_dir"] = templates_dir;
  j["cache"] = cache_path;
  j["embedding_cache"] = embedding_cache_path;
  j["max_in_flight"] = max_in_flight;
  j["demo_count"] = demo_count;
  j["alignment_tau"] = alignment_tau;
  j["temperature"] = temperature;
  j["max_output_tokens"] = max_output_tokens;
  j["mock_drop_last_item"] = mock_knobs.drop_last_item;
  j["mock_mangle_repetition"] = mock_knobs.mangle_repetition;
  j["mock_wrong_count_extra"] = mock_knobs.wrong_count_extra;
  j["mock_wrong_answer_period"] = mock_knobs.wrong_answer_period;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig config;
  for (const auto& [key, value] : j.items()) {
    std::string str;
    if (value.is_string()) {
      str = value.get<std::string>();
    } else if (value.is_boolean()) {
      str = value.get<bool>() ? "true" : "false";
    } else {
      str = value.dump();
    }
    config.apply_override(key, str);
  }
  return config;
}

namespace {

bool parse_bool(const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw Error(Errc::config_invalid, fmt::format("bad boolean '{}'", value));
}

}  // namespace

void ExperimentConfig::apply_override(const std::string& key, const std::string& value) {
  if (key == "dataset") {
    dataset_path = value;
  } else if (key == "task") {
    auto id = parse_task(value);
    if (!id) throw Error(Errc::config_invalid, fmt::format("unknown task '{}'", value));
    task_id = *id;
  } else if (key == "subset_n") {
    subset_n = static_cast<std::size_t>(std::stoull(value));
  } else if (key == "model_profile") {
    model_profile = value;
  } else if (key == "model_id") {
    model_id = value;
  } else if (key == "mode") {
    auto m = parse_mode(value);
    if (!m) throw Error(Errc::config_invalid, fmt::format("unknown mode '{}'", value));
    mode = *m;
  } else if (key == "batch_size" || key == "n") {
    batch_size = static_cast<std::size_t>(std::stoull(value));
  } else if (key == "selection") {
    auto s = parse_selection(value);
    if (!s) throw Error(Errc::config_invalid, fmt::format("unknown selection '{}'", value));
    selection = *s;
  } else if (key == "seed") {
    seed = std::stoull(value);
  } else if (key == "retry_on_wrong_count" || key == "retries") {
    retry_on_wrong_count = std::stoi(value);
  } else if (key == "backend") {
    auto b = parse_backend(value);
    if (!b) throw Error(Errc::config_invalid, fmt::format("unknown backend '{}'", value));
    backend = *b;
  } else if (key == "embedding_provider") {
    embedding_provider = value;
  } else if (key == "templates_dir") {
    templates_dir = value;
  } else if (key == "cache") {
    cache_path = value;
  } else if (key == "embedding_cache") {
    embedding_cache_path = value;
  } else if (key == "max_in_flight") {
    max_in_flight = std::stoi(value);
  } else if (key == "demo_count") {
    demo_count = static_cast<std::size_t>(std::stoull(value));
  } else if (key == "alignment_tau") {
    alignment_tau = std::stod(value);
  } else if (key == "temperature") {
    temperature = std::stod(value);
  } else if (key == "max_output_tokens") {
    max_output_tokens = std::stoi(value);
  } else if (key == "mock_drop_last_item") {
    mock_knobs.drop_last_item = parse_bool(value);
  } else if (key == "mock_mangle_repetition") {
    mock_knobs.mangle_repetition = parse_bool(value);
  } else if (key == "mock_wrong_count_extra") {
    mock_knobs.wrong_count_extra = parse_bool(value);
  } else if (key == "mock_wrong_answer_period") {
    mock_knobs.wrong_answer_period = std::stoi(value);
  } else {
    throw Error(Errc::config_invalid, fmt::format("unknown config key '{}'", key));
  }
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  ExperimentConfig config;
  const std::string raw = read_file(path);
  std::size_t row = 0;
  for (const auto& line : text::split_lines(raw)) {
    ++row;
    const std::string t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::config_invalid,
                  fmt::format("{}:{}: expected 'key = value'", path.string(), row));
    config.apply_override(text::trim(t.substr(0, eq)), text::trim(t.substr(eq + 1)));
  }
  return config;
}

json ItemRecord::to_json() const {
  json j;
  j["id"] = id;
  j["predicted"] = predicted ? predicted->to_json() : json(nullptr);
  j["gold"] = gold.to_json();
  j["correct"] = correct;
  j["batch_index"] = batch_index;
  j["position"] = position;
  j["alignment"] = alignment_name(alignment);
  j["raw_span"] = {raw_begin, raw_end};
  json diags = json::array();
  for (const auto& d : diagnostics) {
    diags.push_back({{"kind", diagnostic_name(d.kind)}, {"position", d.position},
                     {"message", d.message}});
  }
  j["diagnostics"] = diags;
  return j;
}

ItemRecord ItemRecord::from_json(const json& j, AnswerKind kind) {
  ItemRecord record;
  record.id = j.value("id", "");
  if (!j.value("predicted", json(nullptr)).is_null())
    record.predicted = AnswerValue::from_json(j["predicted"], kind);
  record.gold = AnswerValue::from_json(j.at("gold"), kind);
  record.correct = j.value("correct", false);
  record.batch_index = j.value("batch_index", std::size_t{0});
  record.position = j.value("position", std::size_t{0});
  const std::string verdict = j.value("alignment", "absent");
  for (Alignment a :
       {Alignment::exact, Alignment::fuzzy_ok, Alignment::mismatch, Alignment::absent}) {
    if (verdict == alignment_name(a)) record.alignment = a;
  }
  for (const auto& d : j.value("diagnostics", json::array())) {
    Diagnostic diag;
    const std::string kind_name = d.value("kind", "");
    for (DiagnosticKind k :
         {DiagnosticKind::wrong_count, DiagnosticKind::unparseable_label,
          DiagnosticKind::duplicate_position, DiagnosticKind::missing_anchor}) {
      if (kind_name == diagnostic_name(k)) diag.kind = k;
    }
    diag.position = d.value("position", -1);
    diag.message = d.value("message", "");
    record.diagnostics.push_back(std::move(diag));
  }
  return record;
}

ScoreReport score(const std::vector<ItemRecord>& records) {
  if (records.empty()) throw Error(Errc::empty_records, "no item records to score");
  ScoreReport report;
  report.total = records.size();
  for (const auto& record : records) {
    if (record.correct) ++report.correct;
    if (!record.predicted) ++report.absent;
    auto& pos = report.by_position[record.position];
    pos.second++;
    if (record.correct) pos.first++;
    auto& ali = report.by_alignment[alignment_name(record.alignment)];
    ali.second++;
    if (record.correct) ali.first++;
  }
  report.accuracy = static_cast<double>(report.correct) / static_cast<double>(report.total);
  return report;
}

std::string format_accuracy(double accuracy) {
  const long long milli = std::llround(accuracy * 1000.0);  // half away from zero
  return fmt::format("{:.3f}", static_cast<double>(milli) / 1000.0);
}

namespace {

std::string gold_answer_string(const TaskSpec& spec, const AnswerValue& gold) {
  if (gold.is_class()) return spec.class_labels[static_cast<std::size_t>(gold.cls())];
  return text::format_decimal(gold.num());
}

struct RawRecord {
  std::size_t batch_index = 0;
  int attempt = 1;
  std::string request_key;
  std::optional<ChatResponse> response;
  std::string error;
  bool count_ok = false;
  std::vector<Diagnostic> diagnostics;

  json to_json() const {
    json j;
    j["batch_index"] = batch_index;
    j["attempt"] = attempt;
    j["request_key"] = request_key;
    if (response) {
      j["text"] = response->text;
      j["prompt_tokens"] = response->prompt_tokens;
      j["completion_tokens"] = response->completion_tokens;
      j["latency_ms"] = response->latency_ms;
      j["backend"] = backend_name(response->backend);
      j["truncated"] = response->truncated;
    }
    if (!error.empty()) j["error"] = error;
    j["count_ok"] = count_ok;
    json diags = json::array();
    for (const auto& d : diagnostics) {
      diags.push_back({{"kind", diagnostic_name(d.kind)}, {"position", d.position},
                       {"message", d.message}});
    }
    j["diagnostics"] = diags;
    return j;
  }
};

std::unique_ptr<ChatBackend> make_backend(const ExperimentConfig& config,
                                          const PromptTemplate& tmpl, const Dataset& dataset,
                                          std::shared_ptr<ResponseCache> cache) {
  switch (config.backend) {
    case BackendKind::mock:
      return std::make_unique<MockBackend>(tmpl, dataset, config.mock_knobs, cache);
    case BackendKind::replay:
      if (!cache) throw Error(Errc::config_invalid, "replay backend needs a cache path");
      if (cache->size() == 0)
        throw Error(Errc::cache_miss,
                    fmt::format("replay cache {} is missing or empty", cache->file().string()));
      return std::make_unique<ReplayBackend>(cache);
    case BackendKind::live: {
      auto live = LiveConfig::from_env();
      if (!live)
        throw Error(Errc::config_invalid,
                    "live backend needs ADP_API_BASE_URL (and ADP_API_KEY) in the environment");
      return std::make_unique<LiveBackend>(
          *live, make_http_transport(live->base_url, live->api_key), cache);
    }
  }
  throw Error(Errc::config_invalid, "unknown backend");
}

}  // namespace

namespace {

struct PreparedRun {
  TaskSpec spec;
  Dataset full;
  Dataset dataset;
  PromptTemplate tmpl;
  ItemSyntax syntax;
  BatchPlan plan;
  std::vector<Demo> demos;
  std::vector<std::vector<DataPoint>> batch_points;
  std::vector<RenderedPrompt> prompts;
  std::vector<ChatRequest> requests;
};

PreparedRun prepare_run(const ExperimentConfig& config) {
  PreparedRun p;
  p.spec = TaskSpec::builtin(config.task_id);
  p.full = load_dataset(config.dataset_path, p.spec);
  p.dataset = config.subset_n ? subset(p.full, *config.subset_n, config.seed) : p.full;

  p.tmpl = load_task_template(config.templates_dir, config.task_id, config.mode);
  p.syntax = ItemSyntax::from_template(p.tmpl);

  if (config.selection == SelectionMode::random) {
    p.plan = plan_batches_random(p.dataset, config.batch_size, config.seed);
  } else {
    auto provider = make_provider(config.embedding_provider);
    std::optional<EmbeddingCache> embedding_cache;
    if (!config.embedding_cache_path.empty())
      embedding_cache.emplace(config.embedding_cache_path);
    const auto embeddings =
        embed_corpus(p.dataset, *provider, embedding_cache ? &*embedding_cache : nullptr);
    p.plan = plan_batches_retrieval(p.dataset, embeddings, config.batch_size, config.seed,
                                    config.selection);
    p.plan.provider_id = provider->id();
  }

  // held-out demonstrations for the few-shot arm
  if (config.mode == PromptMode::few_shot) {
    std::set<std::string> scored_ids;
    for (const auto& point : p.dataset.points) scored_ids.insert(point.id);
    std::vector<const DataPoint*> pool;
    for (const auto& point : p.full.points)
      if (!scored_ids.count(point.id)) pool.push_back(&point);
    if (pool.size() < config.demo_count)
      throw Error(Errc::config_invalid,
                  fmt::format("demo pool has {} points, need {}", pool.size(), config.demo_count));
    Rng rng(fnv1a64("demo-pool") ^ config.seed);
    for (std::size_t index : rng.sample_indices(pool.size(), config.demo_count))
      p.demos.push_back({*pool[index], gold_answer_string(p.spec, pool[index]->gold)});
  }

  for (const auto& batch : p.plan.batches) {
    std::vector<DataPoint> points;
    points.reserve(batch.size());
    for (const auto& id : batch) {
      const DataPoint* point = p.dataset.find(id);
      if (point == nullptr) throw Error(Errc::missing_embedding, fmt::format("id '{}'", id));
      points.push_back(*point);
    }
    p.prompts.push_back(render(p.tmpl, points, p.demos));
    p.batch_points.push_back(std::move(points));
  }

  ModelProfile profile = ModelProfile::lookup(config.model_profile);
  if (!config.model_id.empty()) profile.model_id = config.model_id;
  if (config.max_output_tokens > 0) profile.max_output_tokens = config.max_output_tokens;
  p.requests.reserve(p.prompts.size());
  for (const auto& prompt : p.prompts) {
    ChatRequest request;
    request.model_id = profile.model_id;
    request.prompt_text = prompt.text;
    request.temperature = config.temperature;
    request.max_output_tokens = profile.max_output_tokens;
    request.validate();
    p.requests.push_back(std::move(request));
  }
  return p;
}

void persist_inputs(const PreparedRun& p, const ExperimentConfig& config,
                    const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_file(out_dir / "config.json", config.to_json().dump() + "\n");
  save_plan(p.plan, out_dir / "plan.jsonl");
  for (std::size_t b = 0; b < p.prompts.size(); ++b) {
    write_file(out_dir / "prompts" / fmt::format("batch_{:05}.txt", b), p.prompts[b].text);
  }
}

}  // namespace

void render_prompts(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  const PreparedRun p = prepare_run(config);
  persist_inputs(p, config, out_dir);
}

RunResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();

  PreparedRun prep = prepare_run(config);
  // persist inputs before dispatch so failed runs stay auditable
  persist_inputs(prep, config, out_dir);

  const TaskSpec& spec = prep.spec;
  const Dataset& dataset = prep.dataset;
  const PromptTemplate& tmpl = prep.tmpl;
  const ItemSyntax& syntax = prep.syntax;
  const BatchPlan& plan = prep.plan;
  const auto& batch_points = prep.batch_points;
  const auto& requests = prep.requests;

  std::shared_ptr<ResponseCache> cache;
  if (!config.cache_path.empty()) cache = std::make_shared<ResponseCache>(config.cache_path);
  auto backend = make_backend(config, tmpl, dataset, cache);

  auto outcomes = dispatch_batch(requests, *backend, config.max_in_flight);

  // parse, retrying whole batches on wrong counts
  RunResult result;
  result.config = config;
  result.template_hash = hex64(tmpl.content_hash);
  result.dataset_checksum = dataset.checksum;
  result.batch_count = plan.batches.size();

  std::vector<RawRecord> raw_records;
  const bool classification = spec.answer_kind == AnswerKind::binary_class;

  for (std::size_t b = 0; b < plan.batches.size(); ++b) {
    const std::size_t n = plan.batches[b].size();
    result.request_keys.push_back(requests[b].request_key());

    ParsedBatchOutput parsed;
    bool have_response = false;
    int attempt = 1;
    DispatchOutcome outcome = outcomes[b];
    while (true) {
      RawRecord raw;
      raw.batch_index = b;
      raw.attempt = attempt;
      raw.request_key = requests[b].request_key();
      if (outcome.ok()) {
        have_response = true;
        parsed = classification
                     ? parse_labels(outcome.response->text, n, spec, config.mode, syntax)
                     : parse_numeric(outcome.response->text, n, config.mode, syntax);
        raw.response = outcome.response;
        raw.count_ok = parsed.count_ok;
        raw.diagnostics = parsed.diagnostics;
        result.prompt_tokens += outcome.response->prompt_tokens;
        result.completion_tokens += outcome.response->completion_tokens;
      } else {
        raw.error = outcome.error_message;
      }
      raw_records.push_back(std::move(raw));

      const bool want_retry =
          attempt <= config.retry_on_wrong_count && (!outcome.ok() || !parsed.count_ok);
      if (!want_retry) break;
      ++attempt;
      if (attempt == 2) ++result.retried_batches;
      outcome = DispatchOutcome{};
      try {
        outcome.response = backend->complete(requests[b]);
      } catch (const Error& e) {
        outcome.error = e.code();
        outcome.error_message = e.what();
      }
    }

    if (!have_response) {
      ++result.failed_batches;
      parsed = ParsedBatchOutput{};
      parsed.items.resize(n);
      for (std::size_t p = 0; p < n; ++p) parsed.items[p].position = static_cast<int>(p);
      parsed.count_ok = false;
    }

    // batch-level diagnostic tally
    for (const auto& diag : parsed.diagnostics) {
      result.diagnostic_counts[diagnostic_name(diag.kind)]++;
    }

    for (std::size_t p = 0; p < n; ++p) {
      const DataPoint& point = batch_points[b][p];
      const ParsedItem& item = parsed.items[p];
      ItemRecord record;
      record.id = point.id;
      record.gold = point.gold;
      record.predicted = item.answer;
      record.batch_index = b;
      record.position = p;
      if (config.mode == PromptMode::auto_demo) {
        record.alignment = check_alignment(item, point, tmpl.serializer, config.alignment_tau);
      }
      record.correct = item.answer.has_value() && item.answer->matches(point.gold);
      for (const auto& diag : parsed.diagnostics) {
        if (diag.position == static_cast<int>(p)) record.diagnostics.push_back(diag);
      }
      result.items.push_back(std::move(record));
    }
  }

  result.scores = score(result.items);
  const long total_tokens = result.prompt_tokens + result.completion_tokens;
  result.tokens_per_item =
      result.items.empty() ? 0.0
                           : static_cast<double>(total_tokens) /
                                 static_cast<double>(result.items.size());
  result.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - started)
                       .count();

  // persist outputs
  std::vector<json> raw_json;
  raw_json.reserve(raw_records.size());
  for (const auto& record : raw_records) raw_json.push_back(record.to_json());
  write_jsonl(out_dir / "raw" / "responses.jsonl", raw_json);

  std::vector<json> item_json;
  item_json.reserve(result.items.size());
  for (const auto& record : result.items) item_json.push_back(record.to_json());
  write_jsonl(out_dir / "items.jsonl", item_json);

  json summary;
  summary["metrics"]["accuracy"] = result.scores.accuracy;
  summary["metrics"]["accuracy_3dp"] = format_accuracy(result.scores.accuracy);
  summary["metrics"]["total_items"] = result.scores.total;
  summary["metrics"]["correct_items"] = result.scores.correct;
  summary["metrics"]["absent_items"] = result.scores.absent;
  summary["metrics"]["prompt_tokens"] = result.prompt_tokens;
  summary["metrics"]["completion_tokens"] = result.completion_tokens;
  summary["metrics"]["tokens_per_item"] = result.tokens_per_item;
  summary["metrics"]["batches"] = result.batch_count;
  summary["metrics"]["retried_batches"] = result.retried_batches;
  summary["metrics"]["failed_batches"] = result.failed_batches;
  {
    json by_position = json::object();
    for (const auto& [pos, counts] : result.scores.by_position) {
      by_position[fmt::format("{}", pos)] = {{"correct", counts.first},
                                             {"total", counts.second}};
    }
    summary["metrics"]["by_position"] = by_position;
    json by_alignment = json::object();
    for (const auto& [verdict, counts] : result.scores.by_alignment) {
      by_alignment[verdict] = {{"correct", counts.first}, {"total", counts.second}};
    }
    summary["metrics"]["by_alignment"] = by_alignment;
    json diagnostics = json::object();
    for (const auto& [kind, count] : result.diagnostic_counts) diagnostics[kind] = count;
    summary["metrics"]["diagnostics"] = diagnostics;
  }
  summary["provenance"]["config"] = config.to_json();
  summary["provenance"]["dataset_checksum"] = hex64(result.dataset_checksum);
  summary["provenance"]["template_hash"] = result.template_hash;
  summary["provenance"]["request_keys"] = result.request_keys;
  summary["provenance"]["plan_provider"] = plan.provider_id;
  summary["provenance"]["message_shape"] = "single-user-message";
  summary["timing"]["wall_ms"] = result.wall_ms;
  write_file(out_dir / "summary.json", summary.dump() + "\n");

  return result;
}

PersistedRun load_run(const std::filesystem::path& run_dir) {
  PersistedRun run;
  const auto config_records = read_jsonl(run_dir / "config.json");
  if (config_records.empty()) throw Error(Errc::io_error, "run has no config record");
  run.config = ExperimentConfig::from_json(config_records.front());
  const auto summary_records = read_jsonl(run_dir / "summary.json");
  if (summary_records.empty()) throw Error(Errc::io_error, "run has no summary record");
  run.summary = summary_records.front();
  const AnswerKind kind = TaskSpec::builtin(run.config.task_id).answer_kind;
  for (const auto& record : read_jsonl(run_dir / "items.jsonl"))
    run.items.push_back(ItemRecord::from_json(record, kind));
  return run;
}

double ComparisonReport::agreement() const {
  const std::size_t total = both_correct + only_a + only_b + both_wrong;
  if (total == 0) return 1.0;
  return static_cast<double>(both_correct + both_wrong) / static_cast<double>(total);
}

json ComparisonReport::to_json() const {
  json j;
  j["accuracy_a"] = accuracy_a;
  j["accuracy_b"] = accuracy_b;
  j["accuracy_delta"] = accuracy_delta;
  j["prompt_token_delta"] = prompt_token_delta;
  j["completion_token_delta"] = completion_token_delta;
  j["agreement"] = agreement();
  j["both_correct"] = both_correct;
  j["only_a"] = only_a;
  j["only_b"] = only_b;
  j["both_wrong"] = both_wrong;
  return j;
}

ComparisonReport compare_runs(const PersistedRun& a, const PersistedRun& b) {
  const std::string checksum_a = a.summary["provenance"].value("dataset_checksum", "a");
  const std::string checksum_b = b.summary["provenance"].value("dataset_checksum", "b");
  if (checksum_a != checksum_b)
    throw Error(Errc::incomparable_runs, "runs scored different dataset subsets");
  if (a.config.seed != b.config.seed)
    throw Error(Errc::incomparable_runs, "runs used different seeds");
  if (a.items.size() != b.items.size())
    throw Error(Errc::incomparable_runs, "runs scored different item counts");

  auto sorted_indices = [](const PersistedRun& run) {
    std::vector<std::size_t> order(run.items.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      const auto& ix = run.items[x];
      const auto& iy = run.items[y];
      return std::tie(ix.id, ix.batch_index, ix.position) <
             std::tie(iy.id, iy.batch_index, iy.position);
    });
    return order;
  };
  const auto order_a = sorted_indices(a);
  const auto order_b = sorted_indices(b);
  for (std::size_t i = 0; i < order_a.size(); ++i) {
    if (a.items[order_a[i]].id != b.items[order_b[i]].id)
      throw Error(Errc::incomparable_runs, "runs scored different item sets");
  }

  ComparisonReport report;
  report.accuracy_a = score(a.items).accuracy;
  report.accuracy_b = score(b.items).accuracy;
  report.accuracy_delta = report.accuracy_a - report.accuracy_b;
  report.prompt_token_delta = a.summary["metrics"].value("prompt_tokens", 0L) -
                              b.summary["metrics"].value("prompt_tokens", 0L);
  report.completion_token_delta = a.summary["metrics"].value("completion_tokens", 0L) -
                                  b.summary["metrics"].value("completion_tokens", 0L);
  for (std::size_t i = 0; i < order_a.size(); ++i) {
    const bool ca = a.items[order_a[i]].correct;
    const bool cb = b.items[order_b[i]].correct;
    if (ca && cb) ++report.both_correct;
    else if (ca) ++report.only_a;
    else if (cb) ++report.only_b;
    else ++report.both_wrong;
  }
  return report;
}

std::string method_label(const ExperimentConfig& config) {
  if (config.mode == PromptMode::few_shot) return "few-shot";
  std::string label;
  if (config.selection != SelectionMode::random) label += "Data Selection, ";
  label += (config.mode == PromptMode::auto_demo) ? "w" : "w/o";
  return label;
}

namespace {

int method_rank(const std::string& label) {
  if (label == "w") return 0;
  if (label == "w/o") return 1;
  if (label == "Data Selection, w") return 2;
  if (label == "Data Selection, w/o") return 3;
  return 4;  // few-shot
}

std::string csv_cell(const std::string& value) {
  if (value.find(',') == std::string::npos && value.find('"') == std::string::npos) return value;
  std::string quoted = "\"";
  for (char c : value) {
    if (c == '"') quoted += "\"\"";
    else quoted.push_back(c);
  }
  quoted += '"';
  return quoted;
}

}  // namespace

std::string make_report(const std::vector<PersistedRun>& runs) {
  struct RowKey {
    std::string dataset;
    std::string model;
    std::string method;
    bool operator<(const RowKey& other) const {
      const int ra = method_rank(method);
      const int rb = method_rank(other.method);
      return std::tie(dataset, model, ra, method) < std::tie(other.dataset, other.model, rb,
                                                             other.method);
    }
  };

  std::set<std::size_t> sizes;
  std::map<RowKey, std::map<std::size_t, std::string>> cells;
  for (const auto& run : runs) {
    ModelProfile profile = ModelProfile::lookup(run.config.model_profile);
    if (!run.config.model_id.empty()) profile.model_id = run.config.model_id;
    RowKey key{task_name(run.config.task_id), profile.model_id, method_label(run.config)};
    sizes.insert(run.config.batch_size);
    const double accuracy = score(run.items).accuracy;
    cells[key].emplace(run.config.batch_size, format_accuracy(accuracy));  // first run wins
  }

  std::string out = "dataset,model (method)";
  for (std::size_t size : sizes) out += fmt::format(",bs={}", size);
  out += '\n';
  for (const auto& [key, row] : cells) {
    out += csv_cell(key.dataset);
    out += ',';
    out += csv_cell(fmt::format("{} ({})", key.model, key.method));
    for (std::size_t size : sizes) {
      auto it = row.find(size);
      out += ',';
      out += (it == row.end()) ? "-" : it->second;
    }
    out += '\n';
  }
  return out;
}

}  // namespace adp
