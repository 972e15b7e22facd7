#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aobs/dp_sampler.hpp"
#include "aobs/fspec.hpp"
#include "aobs/lengthbias.hpp"
#include "aobs/loglinear.hpp"
#include "aobs/scenario.hpp"
#include "aobs/toml.hpp"

namespace aobs {

inline constexpr const char* kCodeVersion = "aobs 0.1.0";

// Estimation routes a study can run per replicate.
enum class EstimatorId { dp, darroch, indirect_poisson, indirect_gamma, homogeneous };

const char* estimator_name(EstimatorId id);
EstimatorId estimator_by_name(const std::string& name);

struct StudyConfig {
    std::vector<std::string> scenarios = {"darroch", "normal", "two_normal_mixture"};
    int replicates = 50;
    std::int64_t population = 2000;
    int lists = 0;                      // 0 keeps each preset's list count
    std::optional<double> list_effect;  // overrides every selected scenario
    Link link = Link::logit;
    std::uint64_t seed = 1;
    std::vector<double> alpha_grid = {0.05, 0.10, 0.15, 0.20, 0.25};
    std::vector<EstimatorId> estimators = {EstimatorId::dp, EstimatorId::darroch,
                                           EstimatorId::indirect_poisson,
                                           EstimatorId::indirect_gamma};
    PriorConfig prior;
    int iterations = 20000;
    int burn_in = 5000;
    int thin = 5;
    std::string out_dir = "study_out";
    std::string config_text;  // raw config bytes; hashed into the manifest

    void validate() const;
    MixingScenario scenario(std::size_t index) const;
    ChainConfig chain_config() const;
};

StudyConfig study_config_from_toml(const toml::Table& t);
StudyConfig load_study_config(const std::string& path);

struct RiskConfig {
    FSpec f = FSpec::beta_spec(2.0, 2.0);
    std::int64_t population = 1000;
    int replicates = 2000;
    std::vector<double> alphas = {0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30};
    std::vector<EstimatorKind> estimators = {EstimatorKind::empirical, EstimatorKind::histogram};
    double bin_width = 0.0;  // 0 picks n^-0.6
    std::uint64_t seed = 1;
    std::string out_dir = "risk_out";
    std::string config_text;

    void validate() const;
};

RiskConfig risk_config_from_toml(const toml::Table& t);
RiskConfig load_risk_config(const std::string& path);

struct EstimateSet {
    bool failed = false;
    std::string error;
    double n_hat = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;
    std::vector<double> n_alpha_hat;
    std::vector<double> n_alpha_lo, n_alpha_hi;  // posterior intervals; empty for MLE fits
};

struct ReplicateRecord {
    int scenario_index = 0;
    int replicate = 0;
    std::uint64_t gen_stream = 0, chain_stream = 0;
    std::int64_t m = 0;
    std::int64_t truth_n = 0;
    std::vector<std::int64_t> truth_n_alpha;
    std::vector<EstimateSet> fits;  // aligned with cfg.estimators
};

struct StudyRow {
    std::string scenario;  // preset name, or "all" pooled across scenarios
    std::string estimator;
    std::string target;  // "N" or an alpha value
    double delta = 0.0;
    double bias = 0.0;
    double coverage = 0.0;  // NaN when the route carries no interval
    int used = 0;
    int failures = 0;
};

struct StudyResult {
    StudyConfig cfg;
    std::vector<ReplicateRecord> records;  // scenario-major, replicate-minor
    std::vector<StudyRow> rows;
    // posterior draws from replicate 0 of each scenario, for violin data
    std::vector<std::vector<PosteriorDraw>> violin;
    std::int64_t failures = 0;
};

// progress, when set, fires once per finished replicate (serialized internally)
StudyResult run_study(const StudyConfig& cfg, int workers,
                      const std::function<void(const ReplicateRecord&)>& progress = {});

// summary.csv, coverage.csv, violin.csv, curves_<scenario>.csv, manifest.json
void write_study_outputs(const StudyResult& res, const std::string& out_dir);

// population CSV + truth JSON per replicate, plus a manifest
void write_simulation(const StudyConfig& cfg, const std::string& out_dir);

void write_risk_outputs(const RiskConfig& cfg, const RiskStudy& result, const std::string& out_dir);

// Shortest round-trip decimal text; empty for non-finite values.
std::string num_text(double v);
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace aobs
