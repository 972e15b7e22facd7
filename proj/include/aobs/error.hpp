#pragma once

#include <stdexcept>
#include <string>

namespace aobs {

enum class errc {
  // capture data
  non_binary_cell,
  ragged_rows,
  all_zero_row,
  empty_input,
  fixture_missing,
  fixture_shape_mismatch,
  // stochastic
  non_positive_scale,
  non_positive_parameter,
  invalid_probability,
  zero_weight_vector,
  not_positive_definite,
  // scenarios / F specs
  invalid_scenario_params,
  unsupported_f,
  // estimators
  alpha_out_of_range,
  unattainable_target,
  mass_at_zero_bin,
  // samplers / fits
  degenerate_weights,
  non_convergence,
  singular_information,
  quadrature_failure,
  // cli
  config_error,
  missing_study_artifacts,
};

const char* errc_name(errc c);

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

}  // namespace aobs
