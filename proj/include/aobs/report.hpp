#pragma once

#include <string>
#include <vector>

namespace aobs {

struct ViolinGroup {
    std::string name;
    std::vector<double> values;
};

struct ViolinData {
    std::string scenario;
    std::vector<ViolinGroup> groups;  // file order: alpha grid, alpha_inf, N
};

struct CurveData {
    std::string scenario;
    std::vector<double> eta;
    std::vector<double> truth;  // NaN where absent
    std::vector<double> estimate;
    bool has_truth = false;
};

// violin.csv -> per-scenario groups; errors with MissingStudyArtifacts when
// the file is absent or carries no draws
std::vector<ViolinData> read_violin_csv(const std::string& path);
CurveData read_curves_csv(const std::string& path, const std::string& scenario);

std::string render_violin_svg(const ViolinData& data);
std::string render_curves_svg(const CurveData& data);

struct ReportResult {
    std::vector<std::string> figures;  // file names written into the study dir
};

// Renders every figure a completed study directory supports.
ReportResult render_report(const std::string& study_dir);

}  // namespace aobs
