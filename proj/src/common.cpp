#include "adp/error.hpp"
#include "adp/hash.hpp"
#include "adp/jsonl.hpp"
#include "adp/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>

namespace adp {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::missing_field: return "MissingField";
    case Errc::bad_gold: return "BadGold";
    case Errc::duplicate_id: return "DuplicateId";
    case Errc::empty_dataset: return "EmptyDataset";
    case Errc::n_out_of_range: return "NOutOfRange";
    case Errc::bad_record: return "BadRecord";
    case Errc::provider_unavailable: return "ProviderUnavailable";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::zero_vector: return "ZeroVector";
    case Errc::missing_embedding: return "MissingEmbedding";
    case Errc::demos_not_allowed: return "DemosNotAllowed";
    case Errc::empty_batch: return "EmptyBatch";
    case Errc::template_missing_placeholder: return "TemplateMissingPlaceholder";
    case Errc::bad_template: return "BadTemplate";
    case Errc::cache_miss: return "CacheMiss";
    case Errc::transient_exhausted: return "TransientExhausted";
    case Errc::auth_failure: return "AuthFailure";
    case Errc::transport: return "Transport";
    case Errc::config_invalid: return "ConfigInvalid";
    case Errc::empty_records: return "EmptyRecords";
    case Errc::incomparable_runs: return "IncomparableRuns";
    case Errc::io_error: return "IoError";
  }
  return "Error";
}

std::string hex64(std::uint64_t value) { return fmt::format("{:016x}", value); }

std::vector<std::size_t> Rng::sample_indices(std::size_t population, std::size_t n) {
  std::vector<std::size_t> indices(population);
  for (std::size_t i = 0; i < population; ++i) indices[i] = i;
  for (std::size_t i = 0; i < n && i + 1 < population; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(below(population - i));
    std::swap(indices[i], indices[j]);
  }
  indices.resize(std::min(n, population));
  std::sort(indices.begin(), indices.end());
  return indices;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, fmt::format("cannot open {}", path.string()));
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return content;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, fmt::format("cannot write {}", path.string()));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(Errc::io_error, fmt::format("short write to {}", path.string()));
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, fmt::format("cannot open {}", path.string()));
  std::vector<json> records;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json parsed = json::parse(line, nullptr, false);
    if (parsed.is_discarded()) {
      throw Error(Errc::bad_record, fmt::format("{}:{}: not a JSON record", path.string(), row));
    }
    records.push_back(std::move(parsed));
  }
  return records;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& records) {
  std::string out;
  for (const auto& record : records) {
    out += record.dump();
    out += '\n';
  }
  write_file(path, out);
}

}  // namespace adp
