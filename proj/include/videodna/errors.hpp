#pragma once

#include <stdexcept>
#include <string>

namespace videodna {

enum class Errc {
  empty_input,
  k_too_large,
  dimension_mismatch,
  image_too_small,
  length_mismatch,
  mode_mismatch,
  singular_covariance,
  weak_learner_failure,
  missing_bitcodes,
  band_mismatch,
  empty_query,
  empty_index,
  invalid_matrix,
  label_mismatch,
  kind_mismatch,
  empty_sequence,
  insufficient_sources,
  corpus_too_small,
  bad_format,
  io_error,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace videodna
