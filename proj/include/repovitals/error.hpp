#pragma once

#include <stdexcept>
#include <string>

namespace repovitals {

// Error codes used across the library. The CLI maps these onto exit
// classes: upstream/API failures vs local data failures.
enum class Errc {
  not_found,
  rate_limited,
  transport,
  malformed,
  io_error,
  insufficient_history,
  too_few_rows,
  column_mismatch,
  empty_dataset,
  single_class,
  no_oob_rows,
  too_few_per_class,
  empty_sample,
  length_mismatch,
  zero_variance,
  too_few_groups,
  no_commits,
  unmaintained_project,
  invalid_config,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::not_found: return "not_found";
    case Errc::rate_limited: return "rate_limited";
    case Errc::transport: return "transport";
    case Errc::malformed: return "malformed";
    case Errc::io_error: return "io_error";
    case Errc::insufficient_history: return "insufficient_history";
    case Errc::too_few_rows: return "too_few_rows";
    case Errc::column_mismatch: return "column_mismatch";
    case Errc::empty_dataset: return "empty_dataset";
    case Errc::single_class: return "single_class";
    case Errc::no_oob_rows: return "no_oob_rows";
    case Errc::too_few_per_class: return "too_few_per_class";
    case Errc::empty_sample: return "empty_sample";
    case Errc::length_mismatch: return "length_mismatch";
    case Errc::zero_variance: return "zero_variance";
    case Errc::too_few_groups: return "too_few_groups";
    case Errc::no_commits: return "no_commits";
    case Errc::unmaintained_project: return "unmaintained_project";
    case Errc::invalid_config: return "invalid_config";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const { return code_; }

  // True for failures caused by the remote API rather than local data.
  bool is_upstream() const {
    return code_ == Errc::not_found || code_ == Errc::rate_limited ||
           code_ == Errc::transport;
  }

 private:
  Errc code_;
};

}  // namespace repovitals
