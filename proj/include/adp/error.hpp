#pragma once

#include <stdexcept>
#include <string>

namespace adp {

enum class Errc {
  // dataset
  missing_field,
  bad_gold,
  duplicate_id,
  empty_dataset,
  n_out_of_range,
  bad_record,
  // embeddings / selection
  provider_unavailable,
  dimension_mismatch,
  zero_vector,
  missing_embedding,
  // prompts
  demos_not_allowed,
  empty_batch,
  template_missing_placeholder,
  bad_template,
  // gateway
  cache_miss,
  transient_exhausted,
  auth_failure,
  transport,
  // experiments
  config_invalid,
  empty_records,
  incomparable_runs,
  // generic
  io_error,
};

const char* errc_name(Errc code);

/// Typed runtime error carried by every throwing operation in the library.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace adp
