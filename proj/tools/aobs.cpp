#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aobs/capture_data.hpp"
#include "aobs/dp_sampler.hpp"
#include "aobs/error.hpp"
#include "aobs/loglinear.hpp"
#include "aobs/observability.hpp"
#include "aobs/report.hpp"
#include "aobs/study.hpp"

namespace {

using nlohmann::json;

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) aobs::fail(aobs::errc::config_error, "cannot write '" + path.string() + "'");
    return out;
}

aobs::CaptureDataset load_capture_csv(const std::string& path, bool header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) aobs::fail(aobs::errc::config_error, "cannot open data file '" + path + "'");
    return aobs::parse_capture_csv(in, header);
}

json scalar_json(const aobs::ScalarSummary& s) {
    return json{{"mean", s.mean}, {"sd", s.sd}, {"ci_lo", s.ci_lo}, {"ci_hi", s.ci_hi}};
}

int run_fit_dp(const std::string& data_path, bool header, std::uint64_t seed,
               const std::string& out_dir, int iterations, int burn_in, int thin, int truncation,
               std::vector<double> alphas) {
    aobs::CaptureDataset data = load_capture_csv(data_path, header);
    aobs::PriorConfig prior;
    prior.truncation = truncation;
    aobs::ChainConfig cc;
    cc.iterations = iterations;
    cc.burn_in = burn_in;
    cc.thin = thin;
    if (!alphas.empty()) cc.alpha_grid = std::move(alphas);
    cc.validate();
    prior.validate();

    aobs::ChainResult res =
        aobs::run_chain(aobs::Rng::substream(seed, 2, 0, 0), data, prior, cc);

    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    {
        auto out = open_output(dir / "draws.csv");
        out << "draw,population,n_lb,alpha_inf,conc";
        for (double a : cc.alpha_grid) out << ",n_alpha_" << aobs::num_text(a);
        out << '\n';
        for (std::size_t d = 0; d < res.draws.size(); ++d) {
            const auto& dr = res.draws[d];
            out << d << ',' << dr.population << ',' << dr.n_lb << ','
                << aobs::num_text(dr.alpha_inf) << ',' << aobs::num_text(dr.conc);
            for (std::size_t k = 0; k < cc.alpha_grid.size(); ++k) out << ',' << dr.n_alpha[k];
            out << '\n';
        }
    }
    {
        json j;
        j["tool"] = aobs::kCodeVersion;
        j["m"] = static_cast<std::int64_t>(data.histories().size());
        j["lists"] = data.lists();
        j["seed"] = seed;
        j["population"] = scalar_json(res.summary.population);
        j["population_ess"] = res.summary.population_ess;
        json na = json::array();
        for (std::size_t k = 0; k < res.summary.alpha_grid.size(); ++k) {
            json row = scalar_json(res.summary.n_alpha[k]);
            row["alpha"] = res.summary.alpha_grid[k];
            na.push_back(row);
        }
        j["n_alpha"] = na;
        j["n_lb"] = scalar_json(res.summary.n_lb);
        json q;
        for (std::size_t k = 0; k < res.summary.q_levels.size(); ++k)
            q[aobs::num_text(res.summary.q_levels[k])] = res.summary.alpha_inf_quantiles[k];
        j["alpha_inf_quantiles"] = q;
        j["kept_draws"] = res.summary.kept_draws;
        j["clamped_rho_events"] = res.summary.clamped_rho_events;
        auto out = open_output(dir / "summary.json");
        out << j.dump(2) << '\n';
    }
    std::fprintf(stderr, "fit-dp: m=%zu draws=%" PRId64 " N mean=%.1f [%.1f, %.1f]\n",
                 data.histories().size(), res.summary.kept_draws, res.summary.population.mean,
                 res.summary.population.ci_lo, res.summary.population.ci_hi);
    return 0;
}

int run_fit_loglinear(const std::string& data_path, bool header, const std::string& family,
                      const std::string& out_dir, std::vector<double> alphas) {
    aobs::CaptureDataset data = load_capture_csv(data_path, header);
    aobs::LogLinearFamily fam = aobs::family_by_name(family);
    aobs::LogLinearFit fit = aobs::fit_loglinear(aobs::build_design(data.lists(), fam), data);
    if (alphas.empty()) alphas = {0.05, 0.10, 0.15, 0.20, 0.25};

    std::filesystem::create_directories(out_dir);
    json j;
    j["tool"] = aobs::kCodeVersion;
    j["family"] = aobs::family_name(fit.family);
    j["lists"] = fit.lists;
    j["m"] = fit.m;
    j["n_hat"] = fit.n_hat;
    j["ci_lo"] = fit.ci_lo;
    j["ci_hi"] = fit.ci_hi;
    std::vector<double> coef(fit.coef.data(), fit.coef.data() + fit.coef.size());
    j["coef"] = coef;
    std::vector<double> se;
    for (Eigen::Index k = 0; k < fit.coef.size(); ++k)
        se.push_back(std::sqrt(std::max(fit.cov(k, k), 0.0)));
    j["se"] = se;
    if (fam != aobs::LogLinearFamily::homogeneous) j["tau"] = fit.tau();
    j["iterations"] = fit.iterations;
    j["final_grad_norm"] = fit.final_grad_norm;
    json na = json::array();
    for (double a : alphas) {
        json row;
        row["alpha"] = a;
        try {
            row["value"] = aobs::estimate_n_alpha_parametric(fit, a);
        } catch (const aobs::error& e) {
            row["value"] = nullptr;
            row["error"] = e.what();
        }
        na.push_back(row);
    }
    j["n_alpha"] = na;
    auto out = open_output(std::filesystem::path(out_dir) / "fit.json");
    out << j.dump(2) << '\n';
    std::fprintf(stderr, "fit-loglinear: family=%s m=%" PRId64 " N=%.1f [%.1f, %.1f]\n",
                 aobs::family_name(fit.family), fit.m, fit.n_hat, fit.ci_lo, fit.ci_hi);
    return 0;
}

int run_bound(std::int64_t n, double eps, double alpha, double target, bool has_alpha,
              bool has_target) {
    if (has_alpha == has_target)
        aobs::fail(aobs::errc::config_error, "pass exactly one of --alpha and --target");
    json j;
    j["n"] = n;
    j["epsilon"] = eps;
    if (has_alpha) {
        j["alpha"] = alpha;
        j["detection_bound"] = aobs::thm1_bound(alpha, eps, n);
    } else {
        j["target"] = target;
        j["alpha_required"] = aobs::alpha_for_target(target, eps, n);
    }
    std::cout << j.dump(2) << '\n';
    return 0;
}

int run_risk(const std::string& config, std::uint64_t seed, bool seed_set,
             const std::string& out_override) {
    aobs::RiskConfig cfg = aobs::load_risk_config(config);
    if (seed_set) cfg.seed = seed;
    const std::string out = out_override.empty() ? cfg.out_dir : out_override;
    aobs::RiskStudy rs = aobs::risk_study(cfg.seed, cfg.f, cfg.population, cfg.alphas,
                                          cfg.replicates, cfg.estimators, cfg.bin_width);
    aobs::write_risk_outputs(cfg, rs, out);
    std::int64_t failures = 0;
    for (const auto& cell : rs.cells) failures += cell.failed;
    std::fprintf(stderr, "risk-study: %zu cells, %" PRId64 " failed replicates -> %s\n",
                 rs.cells.size(), failures, out.c_str());
    return failures > 0 ? 3 : 0;
}

int run_simulate(const std::string& config, std::uint64_t seed, bool seed_set,
                 const std::string& out_override) {
    aobs::StudyConfig cfg = aobs::load_study_config(config);
    if (seed_set) cfg.seed = seed;
    const std::string out = out_override.empty() ? cfg.out_dir : out_override;
    aobs::write_simulation(cfg, out);
    std::fprintf(stderr, "simulate: %zu scenarios x %d replicates -> %s\n",
                 cfg.scenarios.size(), cfg.replicates, out.c_str());
    return 0;
}

int run_study_cmd(const std::string& config, std::uint64_t seed, bool seed_set,
                  const std::string& out_override, int workers, bool full) {
    aobs::StudyConfig cfg = aobs::load_study_config(config);
    if (seed_set) cfg.seed = seed;
    if (full) cfg.replicates = 200;
    const std::string out = out_override.empty() ? cfg.out_dir : out_override;
    const int total = static_cast<int>(cfg.scenarios.size()) * cfg.replicates;
    int done = 0;
    aobs::StudyResult res =
        aobs::run_study(cfg, workers, [&](const aobs::ReplicateRecord& rec) {
            ++done;
            std::fprintf(stderr, "[study %d/%d] %s r%d m=%" PRId64 "\n", done, total,
                         cfg.scenarios[static_cast<std::size_t>(rec.scenario_index)].c_str(),
                         rec.replicate, rec.m);
        });
    aobs::write_study_outputs(res, out);
    std::fprintf(stderr, "study: %" PRId64 " failed fits -> %s\n", res.failures, out.c_str());
    return res.failures > 0 ? 3 : 0;
}

int run_report(const std::string& dir) {
    aobs::ReportResult res = aobs::render_report(dir);
    for (const auto& f : res.figures) std::fprintf(stderr, "report: wrote %s\n", f.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"population estimation from overlapping capture lists"};
    app.require_subcommand(1);

    std::string config, out, data_path, family = "darroch", report_dir;
    std::uint64_t seed = 1;
    int workers = 1;
    bool full = false;
    bool no_header = false;
    int iterations = 20000, burn_in = 5000, thin = 5, truncation = 30;
    std::vector<double> alphas;
    std::int64_t bound_n = 0;
    double bound_eps = 0, bound_alpha = 0, bound_target = 0;

    auto add_seed = [&](CLI::App* cmd) { return cmd->add_option("--seed", seed, "master seed"); };
    auto add_out = [&](CLI::App* cmd) {
        return cmd->add_option("--out", out, "output directory");
    };

    auto* sim = app.add_subcommand("simulate", "generate populations and truth files");
    sim->add_option("--config", config, "TOML config")->required();
    auto* sim_seed = add_seed(sim);
    add_out(sim);

    auto* fdp = app.add_subcommand("fit-dp", "mixture model fit on one capture dataset");
    fdp->add_option("--data", data_path, "capture CSV")->required();
    fdp->add_flag("--no-header", no_header, "data file has no header row");
    add_seed(fdp);
    add_out(fdp);
    fdp->add_option("--iterations", iterations, "sweeps");
    fdp->add_option("--burn-in", burn_in, "discarded sweeps");
    fdp->add_option("--thin", thin, "keep every k-th sweep");
    fdp->add_option("--truncation", truncation, "mixture truncation level");
    fdp->add_option("--alpha", alphas, "threshold grid");

    auto* fll = app.add_subcommand("fit-loglinear", "log-linear fit on one capture dataset");
    fll->add_option("--data", data_path, "capture CSV")->required();
    fll->add_flag("--no-header", no_header, "data file has no header row");
    fll->add_option("--family", family, "darroch|indirect_poisson|indirect_gamma|homogeneous");
    add_out(fll);
    fll->add_option("--alpha", alphas, "threshold grid");

    auto* rsk = app.add_subcommand("risk-study", "direct length-biased sampling risk study");
    rsk->add_option("--config", config, "TOML config")->required();
    auto* rsk_seed = add_seed(rsk);
    add_out(rsk);

    auto* bnd = app.add_subcommand("bound", "detection probability of a threshold-exceeding set");
    bnd->add_option("--n", bound_n, "population size")->required();
    bnd->add_option("--epsilon", bound_eps, "mixing mass of the set")->required();
    auto* bnd_alpha = bnd->add_option("--alpha", bound_alpha, "capture threshold");
    auto* bnd_target = bnd->add_option("--target", bound_target, "required detection probability");

    auto* stu = app.add_subcommand("study", "replicated simulation study");
    stu->add_option("--config", config, "TOML config")->required();
    auto* stu_seed = add_seed(stu);
    add_out(stu);
    stu->add_option("--workers", workers, "worker threads");
    stu->add_flag("--full", full, "run 200 replicates");

    auto* rep = app.add_subcommand("report", "render figures for a finished study");
    rep->add_option("dir", report_dir, "study output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) return run_simulate(config, seed, sim_seed->count() > 0, out);
        if (fdp->parsed())
            return run_fit_dp(data_path, !no_header, seed, out.empty() ? "fit_dp_out" : out,
                              iterations, burn_in, thin, truncation, alphas);
        if (fll->parsed())
            return run_fit_loglinear(data_path, !no_header, family,
                                     out.empty() ? "fit_loglinear_out" : out, alphas);
        if (rsk->parsed()) return run_risk(config, seed, rsk_seed->count() > 0, out);
        if (bnd->parsed())
            return run_bound(bound_n, bound_eps, bound_alpha, bound_target,
                             bnd_alpha->count() > 0, bnd_target->count() > 0);
        if (stu->parsed())
            return run_study_cmd(config, seed, stu_seed->count() > 0, out, workers, full);
        if (rep->parsed()) return run_report(report_dir);
    } catch (const aobs::error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.code() == aobs::errc::config_error ? 1 : 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
