#include "aobs/error.hpp"

namespace aobs {

const char* errc_name(errc c) {
  switch (c) {
    case errc::non_binary_cell: return "NonBinaryCell";
    case errc::ragged_rows: return "RaggedRows";
    case errc::all_zero_row: return "AllZeroRow";
    case errc::empty_input: return "EmptyInput";
    case errc::fixture_missing: return "FixtureMissing";
    case errc::fixture_shape_mismatch: return "FixtureShapeMismatch";
    case errc::non_positive_scale: return "NonPositiveScale";
    case errc::non_positive_parameter: return "NonPositiveParameter";
    case errc::invalid_probability: return "InvalidProbability";
    case errc::zero_weight_vector: return "ZeroWeightVector";
    case errc::not_positive_definite: return "NotPositiveDefinite";
    case errc::invalid_scenario_params: return "InvalidScenarioParams";
    case errc::unsupported_f: return "UnsupportedF";
    case errc::alpha_out_of_range: return "AlphaOutOfRange";
    case errc::unattainable_target: return "UnattainableTarget";
    case errc::mass_at_zero_bin: return "MassAtZeroBin";
    case errc::degenerate_weights: return "DegenerateWeights";
    case errc::non_convergence: return "NonConvergence";
    case errc::singular_information: return "SingularInformation";
    case errc::quadrature_failure: return "QuadratureFailure";
    case errc::config_error: return "ConfigError";
    case errc::missing_study_artifacts: return "MissingStudyArtifacts";
  }
  return "UnknownError";
}

}  // namespace aobs
