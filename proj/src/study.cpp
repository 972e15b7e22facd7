#include "aobs/study.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "aobs/error.hpp"
#include "aobs/mathfn.hpp"

namespace aobs {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// substream purpose tags; replicate ids pack (scenario index, replicate)
constexpr std::uint64_t kPurposeGenerate = 1;
constexpr std::uint64_t kPurposeChain = 2;

std::uint64_t replicate_id(std::size_t scenario_index, int replicate) {
    return (static_cast<std::uint64_t>(scenario_index) << 20) | static_cast<std::uint64_t>(replicate);
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(errc::config_error, "cannot write '" + path.string() + "'");
    return out;
}

void parallel_for(int jobs, int workers, const std::function<void(int)>& fn) {
    workers = std::clamp(workers, 1, jobs);
    if (workers <= 1) {
        for (int i = 0; i < jobs; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (;;) {
                    int i = next.fetch_add(1);
                    if (i >= jobs) return;
                    fn(i);
                }
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

double logit_clamped(double p) {
    p = std::clamp(p, 1e-12, 1.0 - 1e-12);
    return std::log(p) - std::log1p(-p);
}

struct WeightedKde {
    std::vector<double> x;
    std::vector<double> w;
    double bandwidth = 0.1;

    void fit_bandwidth() {
        double sw = 0, m1 = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sw += w[i];
            m1 += w[i] * x[i];
        }
        if (sw <= 0) return;
        m1 /= sw;
        double v = 0, sw2 = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            v += w[i] * (x[i] - m1) * (x[i] - m1);
            sw2 += w[i] * w[i];
        }
        v /= sw;
        double n_eff = sw * sw / sw2;
        double sd = std::sqrt(std::max(v, 0.0));
        bandwidth = std::max(1.06 * sd * std::pow(n_eff, -0.2), 1e-3);
    }

    double density(double at) const {
        if (x.empty()) return 0.0;
        double sw = 0, acc = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sw += w[i];
            acc += w[i] * normal_pdf((at - x[i]) / bandwidth);
        }
        return sw > 0 ? acc / (sw * bandwidth) : 0.0;
    }
};

// pooled posterior atoms on the log-odds scale, weighted by class membership
WeightedKde eta_kde(const std::vector<PosteriorDraw>& draws) {
    WeightedKde kde;
    for (const auto& d : draws) {
        for (std::size_t h = 0; h < d.class_p.size(); ++h) {
            if (d.class_count[h] <= 0) continue;
            kde.x.push_back(logit_clamped(d.class_p[h]));
            kde.w.push_back(static_cast<double>(d.class_count[h]));
        }
    }
    kde.fit_bandwidth();
    return kde;
}

}  // namespace

std::string num_text(double v) {
    if (!std::isfinite(v)) return {};
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

const char* estimator_name(EstimatorId id) {
    switch (id) {
        case EstimatorId::dp: return "dp";
        case EstimatorId::darroch: return "darroch";
        case EstimatorId::indirect_poisson: return "indirect_poisson";
        case EstimatorId::indirect_gamma: return "indirect_gamma";
        case EstimatorId::homogeneous: return "homogeneous";
    }
    return "?";
}

EstimatorId estimator_by_name(const std::string& name) {
    for (EstimatorId id : {EstimatorId::dp, EstimatorId::darroch, EstimatorId::indirect_poisson,
                           EstimatorId::indirect_gamma, EstimatorId::homogeneous})
        if (name == estimator_name(id)) return id;
    fail(errc::config_error, "unknown estimator '" + name + "'");
}

void StudyConfig::validate() const {
    if (scenarios.empty()) fail(errc::config_error, "no scenarios selected");
    if (scenarios.size() > 4095) fail(errc::config_error, "too many scenarios");
    for (const auto& s : scenarios) MixingScenario::by_name(s);  // rejects unknown names
    if (replicates < 1 || replicates > 1000000) fail(errc::config_error, "replicates out of range");
    if (population < 1) fail(errc::config_error, "population must be positive");
    if (lists < 0 || lists > 20) fail(errc::config_error, "lists out of range");
    if (alpha_grid.empty()) fail(errc::config_error, "alpha_grid is empty");
    for (std::size_t k = 0; k < alpha_grid.size(); ++k) {
        if (!(alpha_grid[k] > 0 && alpha_grid[k] < 1))
            fail(errc::config_error, "alpha values must lie in (0,1)");
        if (k > 0 && !(alpha_grid[k] > alpha_grid[k - 1]))
            fail(errc::config_error, "alpha_grid must be strictly increasing");
    }
    if (estimators.empty()) fail(errc::config_error, "no estimators selected");
    std::set<EstimatorId> seen(estimators.begin(), estimators.end());
    if (seen.size() != estimators.size()) fail(errc::config_error, "duplicate estimator");
    prior.validate();
    chain_config().validate();
    if (out_dir.empty()) fail(errc::config_error, "out_dir is empty");
}

MixingScenario StudyConfig::scenario(std::size_t index) const {
    MixingScenario sc = MixingScenario::by_name(scenarios.at(index));
    if (lists > 0) sc.lists = lists;
    if (list_effect) sc.list_effect = *list_effect;
    sc.validate();
    return sc;
}

ChainConfig StudyConfig::chain_config() const {
    ChainConfig cc;
    cc.iterations = iterations;
    cc.burn_in = burn_in;
    cc.thin = thin;
    cc.alpha_grid = alpha_grid;
    return cc;
}

namespace {

// every key a config file may carry; anything else is rejected
const std::set<std::string>& study_keys() {
    static const std::set<std::string> keys = {
        "study.scenarios", "study.replicates", "study.population",  "study.lists",
        "study.list_effect", "study.link",     "study.seed",        "study.alpha_grid",
        "study.estimators", "study.out_dir",   "sampler.truncation", "sampler.base_mean",
        "sampler.base_var", "sampler.list_mean", "sampler.list_var", "sampler.conc_shape",
        "sampler.conc_rate", "sampler.iterations", "sampler.burn_in", "sampler.thin",
    };
    return keys;
}

const std::set<std::string>& risk_keys() {
    static const std::set<std::string> keys = {
        "risk.f",       "risk.a",          "risk.b",        "risk.atom_p",
        "risk.atom_w",  "risk.heights",    "risk.population", "risk.replicates",
        "risk.alphas",  "risk.estimators", "risk.bin_width", "risk.seed",
        "risk.out_dir",
    };
    return keys;
}

void reject_unknown(const toml::Table& t, const std::set<std::string>& allowed) {
    for (const auto& [key, value] : t.entries)
        if (!allowed.count(key))
            fail(errc::config_error,
                 "unknown config key '" + key + "' (line " + std::to_string(value.line) + ")");
}

Link link_by_name(const std::string& name) {
    if (name == "logit") return Link::logit;
    if (name == "probit") return Link::probit;
    fail(errc::config_error, "unknown link '" + name + "'");
}

std::int64_t checked_int(const toml::Value& v, std::int64_t lo, std::int64_t hi,
                         const char* what) {
    std::int64_t x = v.as_int();
    if (x < lo || x > hi)
        fail(errc::config_error, std::string(what) + " out of range at line " + std::to_string(v.line));
    return x;
}

}  // namespace

StudyConfig study_config_from_toml(const toml::Table& t) {
    reject_unknown(t, study_keys());
    StudyConfig cfg;
    if (t.has("study.scenarios")) cfg.scenarios = t.at("study.scenarios").as_string_array();
    if (t.has("study.replicates"))
        cfg.replicates = static_cast<int>(checked_int(t.at("study.replicates"), 1, 1000000, "replicates"));
    if (t.has("study.population"))
        cfg.population = checked_int(t.at("study.population"), 1, 100000000, "population");
    if (t.has("study.lists"))
        cfg.lists = static_cast<int>(checked_int(t.at("study.lists"), 1, 20, "lists"));
    if (t.has("study.list_effect")) cfg.list_effect = t.at("study.list_effect").as_real();
    if (t.has("study.link")) cfg.link = link_by_name(t.at("study.link").as_string());
    if (t.has("study.seed"))
        cfg.seed = static_cast<std::uint64_t>(t.at("study.seed").as_int());
    if (t.has("study.alpha_grid")) cfg.alpha_grid = t.at("study.alpha_grid").as_real_array();
    if (t.has("study.estimators")) {
        cfg.estimators.clear();
        for (const auto& name : t.at("study.estimators").as_string_array())
            cfg.estimators.push_back(estimator_by_name(name));
    }
    if (t.has("study.out_dir")) cfg.out_dir = t.at("study.out_dir").as_string();
    if (t.has("sampler.truncation"))
        cfg.prior.truncation = static_cast<int>(checked_int(t.at("sampler.truncation"), 2, 512, "truncation"));
    if (t.has("sampler.base_mean")) cfg.prior.base_mean = t.at("sampler.base_mean").as_real();
    if (t.has("sampler.base_var")) cfg.prior.base_var = t.at("sampler.base_var").as_real();
    if (t.has("sampler.list_mean")) cfg.prior.list_mean = t.at("sampler.list_mean").as_real();
    if (t.has("sampler.list_var")) cfg.prior.list_var = t.at("sampler.list_var").as_real();
    if (t.has("sampler.conc_shape")) cfg.prior.conc_shape = t.at("sampler.conc_shape").as_real();
    if (t.has("sampler.conc_rate")) cfg.prior.conc_rate = t.at("sampler.conc_rate").as_real();
    if (t.has("sampler.iterations"))
        cfg.iterations = static_cast<int>(checked_int(t.at("sampler.iterations"), 1, 10000000, "iterations"));
    if (t.has("sampler.burn_in"))
        cfg.burn_in = static_cast<int>(checked_int(t.at("sampler.burn_in"), 0, 10000000, "burn_in"));
    if (t.has("sampler.thin"))
        cfg.thin = static_cast<int>(checked_int(t.at("sampler.thin"), 1, 1000000, "thin"));
    cfg.validate();
    return cfg;
}

StudyConfig load_study_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(errc::config_error, "cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    StudyConfig cfg = study_config_from_toml(toml::parse_toml_string(buf.str()));
    cfg.config_text = buf.str();
    return cfg;
}

void RiskConfig::validate() const {
    f.validate();
    if (population < 1) fail(errc::config_error, "population must be positive");
    if (replicates < 1 || replicates > 1000000) fail(errc::config_error, "replicates out of range");
    if (alphas.empty()) fail(errc::config_error, "alphas is empty");
    for (double a : alphas)
        if (!(a >= 0 && a < 1)) fail(errc::config_error, "alpha values must lie in [0,1)");
    if (estimators.empty()) fail(errc::config_error, "no estimators selected");
    if (bin_width < 0 || bin_width >= 1) fail(errc::config_error, "bin_width out of range");
    if (out_dir.empty()) fail(errc::config_error, "out_dir is empty");
}

RiskConfig risk_config_from_toml(const toml::Table& t) {
    reject_unknown(t, risk_keys());
    RiskConfig cfg;
    std::string kind = t.has("risk.f") ? t.at("risk.f").as_string() : "beta";
    if (kind == "beta") {
        double a = t.has("risk.a") ? t.at("risk.a").as_real() : 2.0;
        double b = t.has("risk.b") ? t.at("risk.b").as_real() : 2.0;
        cfg.f = FSpec::beta_spec(a, b);
    } else if (kind == "atoms") {
        if (!t.has("risk.atom_p") || !t.has("risk.atom_w"))
            fail(errc::config_error, "atoms need risk.atom_p and risk.atom_w");
        cfg.f = FSpec::atoms_spec(t.at("risk.atom_p").as_real_array(),
                                  t.at("risk.atom_w").as_real_array());
    } else if (kind == "histogram") {
        if (!t.has("risk.heights")) fail(errc::config_error, "histogram needs risk.heights");
        cfg.f = FSpec::histogram_spec(t.at("risk.heights").as_real_array());
    } else {
        fail(errc::config_error, "unknown f kind '" + kind + "'");
    }
    if (t.has("risk.population"))
        cfg.population = checked_int(t.at("risk.population"), 1, 100000000, "population");
    if (t.has("risk.replicates"))
        cfg.replicates = static_cast<int>(checked_int(t.at("risk.replicates"), 1, 1000000, "replicates"));
    if (t.has("risk.alphas")) cfg.alphas = t.at("risk.alphas").as_real_array();
    if (t.has("risk.estimators")) {
        cfg.estimators.clear();
        for (const auto& name : t.at("risk.estimators").as_string_array()) {
            if (name == "empirical")
                cfg.estimators.push_back(EstimatorKind::empirical);
            else if (name == "histogram")
                cfg.estimators.push_back(EstimatorKind::histogram);
            else
                fail(errc::config_error, "unknown estimator '" + name + "'");
        }
    }
    if (t.has("risk.bin_width")) cfg.bin_width = t.at("risk.bin_width").as_real();
    if (t.has("risk.seed")) cfg.seed = static_cast<std::uint64_t>(t.at("risk.seed").as_int());
    if (t.has("risk.out_dir")) cfg.out_dir = t.at("risk.out_dir").as_string();
    cfg.validate();
    return cfg;
}

RiskConfig load_risk_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(errc::config_error, "cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    RiskConfig cfg = risk_config_from_toml(toml::parse_toml_string(buf.str()));
    cfg.config_text = buf.str();
    return cfg;
}

namespace {

EstimateSet fit_dp_route(Rng rng, const CaptureDataset& data, const StudyConfig& cfg,
                         std::vector<PosteriorDraw>* keep_draws) {
    EstimateSet est;
    ChainResult res = run_chain(rng, data, cfg.prior, cfg.chain_config());
    est.n_hat = res.summary.population.mean;
    est.ci_lo = res.summary.population.ci_lo;
    est.ci_hi = res.summary.population.ci_hi;
    for (const auto& s : res.summary.n_alpha) {
        est.n_alpha_hat.push_back(s.mean);
        est.n_alpha_lo.push_back(s.ci_lo);
        est.n_alpha_hi.push_back(s.ci_hi);
    }
    if (keep_draws) *keep_draws = std::move(res.draws);
    return est;
}

EstimateSet fit_loglinear_route(EstimatorId id, const CaptureDataset& data,
                                const StudyConfig& cfg) {
    LogLinearFamily fam;
    switch (id) {
        case EstimatorId::darroch: fam = LogLinearFamily::darroch; break;
        case EstimatorId::indirect_poisson: fam = LogLinearFamily::indirect_poisson; break;
        case EstimatorId::indirect_gamma: fam = LogLinearFamily::indirect_gamma; break;
        default: fam = LogLinearFamily::homogeneous; break;
    }
    EstimateSet est;
    LogLinearFit fit = fit_loglinear(build_design(data.lists(), fam), data);
    est.n_hat = fit.n_hat;
    est.ci_lo = fit.ci_lo;
    est.ci_hi = fit.ci_hi;
    for (double alpha : cfg.alpha_grid) {
        double v;
        try {
            v = estimate_n_alpha_parametric(fit, alpha);
        } catch (const error&) {
            v = kNan;
        }
        est.n_alpha_hat.push_back(v);
    }
    return est;
}

ReplicateRecord run_replicate(const StudyConfig& cfg, std::size_t s_idx, int r,
                              std::vector<PosteriorDraw>* keep_draws) {
    ReplicateRecord rec;
    rec.scenario_index = static_cast<int>(s_idx);
    rec.replicate = r;
    const std::uint64_t rid = replicate_id(s_idx, r);

    MixingScenario sc = cfg.scenario(s_idx);
    Rng gen = Rng::substream(cfg.seed, kPurposeGenerate, rid, 0);
    rec.gen_stream = gen.stream();
    Population pop = simulate_population(gen, sc, cfg.population, cfg.link);
    rec.m = pop.observed_count();
    rec.truth_n = pop.size();
    for (double alpha : cfg.alpha_grid) rec.truth_n_alpha.push_back(true_n_alpha(pop, alpha));

    CaptureDataset data = pop.observed_dataset();
    for (EstimatorId id : cfg.estimators) {
        EstimateSet est;
        try {
            if (id == EstimatorId::dp) {
                Rng chain = Rng::substream(cfg.seed, kPurposeChain, rid, 0);
                rec.chain_stream = chain.stream();
                est = fit_dp_route(chain, data, cfg, keep_draws);
            } else {
                est = fit_loglinear_route(id, data, cfg);
            }
        } catch (const error& e) {
            est = EstimateSet{};
            est.failed = true;
            est.error = e.what();
            est.n_hat = kNan;
            est.ci_lo = est.ci_hi = kNan;
            est.n_alpha_hat.assign(cfg.alpha_grid.size(), kNan);
        }
        rec.fits.push_back(std::move(est));
    }
    return rec;
}

struct TargetAcc {
    double sq = 0, bias = 0;
    int used = 0, covered = 0, cov_n = 0, failures = 0;

    void add(double est, double truth, double lo, double hi, bool has_ci) {
        if (!std::isfinite(est)) {
            ++failures;
            return;
        }
        double d = est - truth;
        sq += d * d;
        bias += d;
        ++used;
        if (has_ci && std::isfinite(lo) && std::isfinite(hi)) {
            ++cov_n;
            if (lo <= truth && truth <= hi) ++covered;
        }
    }

    StudyRow row(const std::string& scenario, const std::string& estimator,
                 const std::string& target) const {
        StudyRow out;
        out.scenario = scenario;
        out.estimator = estimator;
        out.target = target;
        out.used = used;
        out.failures = failures;
        out.delta = used > 0 ? std::sqrt(sq / used) : kNan;
        out.bias = used > 0 ? bias / used : kNan;
        out.coverage = cov_n > 0 ? static_cast<double>(covered) / cov_n : kNan;
        return out;
    }
};

}  // namespace

StudyResult run_study(const StudyConfig& cfg, int workers,
                      const std::function<void(const ReplicateRecord&)>& progress) {
    cfg.validate();
    StudyResult res;
    res.cfg = cfg;
    const std::size_t S = cfg.scenarios.size();
    const int R = cfg.replicates;
    res.records.resize(S * static_cast<std::size_t>(R));
    res.violin.resize(S);

    const bool wants_dp = std::find(cfg.estimators.begin(), cfg.estimators.end(),
                                    EstimatorId::dp) != cfg.estimators.end();

    std::mutex progress_mx;
    parallel_for(static_cast<int>(S) * R, workers, [&](int job) {
        std::size_t s_idx = static_cast<std::size_t>(job) / static_cast<std::size_t>(R);
        int r = job % R;
        std::vector<PosteriorDraw>* keep =
            (wants_dp && r == 0) ? &res.violin[s_idx] : nullptr;
        res.records[static_cast<std::size_t>(job)] = run_replicate(cfg, s_idx, r, keep);
        if (progress) {
            std::lock_guard<std::mutex> lock(progress_mx);
            progress(res.records[static_cast<std::size_t>(job)]);
        }
    });

    // aggregation: per-scenario rows, then a pooled block when several scenarios ran
    auto aggregate = [&](const std::string& label, std::size_t s_lo, std::size_t s_hi) {
        for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
            const std::string ename = estimator_name(cfg.estimators[e]);
            TargetAcc total;
            std::vector<TargetAcc> per_alpha(cfg.alpha_grid.size());
            for (std::size_t s = s_lo; s < s_hi; ++s) {
                for (int r = 0; r < R; ++r) {
                    const auto& rec = res.records[s * static_cast<std::size_t>(R) +
                                                  static_cast<std::size_t>(r)];
                    const auto& est = rec.fits[e];
                    total.add(est.n_hat, static_cast<double>(rec.truth_n), est.ci_lo, est.ci_hi,
                              true);
                    for (std::size_t k = 0; k < cfg.alpha_grid.size(); ++k) {
                        bool has_ci = !est.n_alpha_lo.empty();
                        per_alpha[k].add(est.failed ? kNan : est.n_alpha_hat[k],
                                         static_cast<double>(rec.truth_n_alpha[k]),
                                         has_ci ? est.n_alpha_lo[k] : kNan,
                                         has_ci ? est.n_alpha_hi[k] : kNan, has_ci);
                    }
                }
            }
            res.rows.push_back(total.row(label, ename, "N"));
            for (std::size_t k = 0; k < cfg.alpha_grid.size(); ++k)
                res.rows.push_back(per_alpha[k].row(label, ename, num_text(cfg.alpha_grid[k])));
        }
    };
    for (std::size_t s = 0; s < S; ++s) aggregate(cfg.scenarios[s], s, s + 1);
    if (S > 1) aggregate("all", 0, S);

    for (const auto& rec : res.records)
        for (const auto& est : rec.fits)
            if (est.failed) ++res.failures;
    return res;
}

namespace {

nlohmann::json manifest_header(const char* kind, std::string_view config_text,
                               std::uint64_t seed) {
    nlohmann::json j;
    j["tool"] = kCodeVersion;
    j["kind"] = kind;
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(config_text)));
    j["config_hash"] = std::string("fnv1a64:") + hex;
    j["seed"] = seed;
    return j;
}

nlohmann::json m_summary_json(const StudyConfig& cfg,
                              const std::function<std::int64_t(std::size_t, int)>& m_of) {
    nlohmann::json out;
    for (std::size_t s = 0; s < cfg.scenarios.size(); ++s) {
        std::vector<double> ms;
        for (int r = 0; r < cfg.replicates; ++r) ms.push_back(static_cast<double>(m_of(s, r)));
        nlohmann::json row;
        row["median"] = empirical_quantile(ms, 0.5);
        row["min"] = *std::min_element(ms.begin(), ms.end());
        row["max"] = *std::max_element(ms.begin(), ms.end());
        out[cfg.scenarios[s]] = row;
    }
    return out;
}

void write_common_config(nlohmann::json& j, const StudyConfig& cfg) {
    j["population"] = cfg.population;
    j["replicates"] = cfg.replicates;
    j["link"] = cfg.link == Link::logit ? "logit" : "probit";
    j["scenarios"] = cfg.scenarios;
    j["alpha_grid"] = cfg.alpha_grid;
}

}  // namespace

void write_study_outputs(const StudyResult& res, const std::string& out_dir) {
    const StudyConfig& cfg = res.cfg;
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);

    {
        auto out = open_output(dir / "summary.csv");
        out << "scenario,estimator,target,delta,bias,coverage,replicates_used,failures\n";
        for (const auto& row : res.rows)
            out << row.scenario << ',' << row.estimator << ',' << row.target << ','
                << num_text(row.delta) << ',' << num_text(row.bias) << ','
                << num_text(row.coverage) << ',' << row.used << ',' << row.failures << '\n';
    }
    {
        auto out = open_output(dir / "coverage.csv");
        out << "scenario,estimator,target,coverage,intervals_counted\n";
        for (const auto& row : res.rows) {
            if (!std::isfinite(row.coverage)) continue;
            out << row.scenario << ',' << row.estimator << ',' << row.target << ','
                << num_text(row.coverage) << ',' << row.used << '\n';
        }
    }
    {
        auto out = open_output(dir / "violin.csv");
        out << "scenario,group,draw,value\n";
        for (std::size_t s = 0; s < cfg.scenarios.size(); ++s) {
            const auto& draws = res.violin[s];
            if (draws.empty()) continue;
            const std::string& sname = cfg.scenarios[s];
            for (std::size_t k = 0; k < cfg.alpha_grid.size(); ++k) {
                for (std::size_t d = 0; d < draws.size(); ++d)
                    out << sname << ',' << num_text(cfg.alpha_grid[k]) << ',' << d << ','
                        << draws[d].n_alpha[k] << '\n';
            }
            std::vector<double> ainf;
            for (const auto& d : draws) ainf.push_back(d.alpha_inf);
            double a_star = empirical_quantile(ainf, 0.5);
            for (std::size_t d = 0; d < draws.size(); ++d)
                out << sname << ",alpha_inf," << d << ',' << draw_n_alpha(draws[d], a_star)
                    << '\n';
            for (std::size_t d = 0; d < draws.size(); ++d)
                out << sname << ",N," << d << ',' << draws[d].population << '\n';
        }
    }

    for (std::size_t s = 0; s < cfg.scenarios.size(); ++s) {
        const auto& draws = res.violin[s];
        if (draws.empty()) continue;
        MixingScenario sc = cfg.scenario(s);
        const bool with_truth = cfg.link == Link::logit && sc.has_density();
        WeightedKde kde = eta_kde(draws);
        auto out = open_output(dir / ("curves_" + cfg.scenarios[s] + ".csv"));
        out << "eta,truth,estimate\n";
        for (int i = 0; i <= 200; ++i) {
            double eta = -10.0 + 16.0 * i / 200.0;
            double truth = kNan;
            if (with_truth)
                truth = induced_density_logit(
                    eta, [&](double th) { return sc.density(th); }, sc.list_effect, sc.lists);
            out << num_text(eta) << ',' << num_text(truth) << ',' << num_text(kde.density(eta))
                << '\n';
        }
    }

    nlohmann::json j = manifest_header("study", cfg.config_text, cfg.seed);
    write_common_config(j, cfg);
    {
        std::vector<std::string> enames;
        for (EstimatorId id : cfg.estimators) enames.emplace_back(estimator_name(id));
        j["estimators"] = enames;
    }
    j["sampler"] = {{"truncation", cfg.prior.truncation},
                    {"base_mean", cfg.prior.base_mean},
                    {"base_var", cfg.prior.base_var},
                    {"list_mean", cfg.prior.list_mean},
                    {"list_var", cfg.prior.list_var},
                    {"conc_shape", cfg.prior.conc_shape},
                    {"conc_rate", cfg.prior.conc_rate},
                    {"iterations", cfg.iterations},
                    {"burn_in", cfg.burn_in},
                    {"thin", cfg.thin}};
    j["failures"] = res.failures;
    j["m_summary"] = m_summary_json(cfg, [&](std::size_t s, int r) {
        return res.records[s * static_cast<std::size_t>(cfg.replicates) +
                           static_cast<std::size_t>(r)]
            .m;
    });
    nlohmann::json log = nlohmann::json::array();
    for (const auto& rec : res.records) {
        nlohmann::json row;
        row["scenario"] = cfg.scenarios[static_cast<std::size_t>(rec.scenario_index)];
        row["replicate"] = rec.replicate;
        row["gen_stream"] = rec.gen_stream;
        row["chain_stream"] = rec.chain_stream;
        row["m"] = rec.m;
        nlohmann::json failed = nlohmann::json::array();
        for (std::size_t e = 0; e < rec.fits.size(); ++e)
            if (rec.fits[e].failed) failed.push_back(estimator_name(cfg.estimators[e]));
        row["failed"] = failed;
        log.push_back(row);
    }
    j["replicate_log"] = log;
    auto out = open_output(dir / "manifest.json");
    out << j.dump(2) << '\n';
}

void write_simulation(const StudyConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    std::vector<std::vector<std::int64_t>> m_all(cfg.scenarios.size());

    for (std::size_t s = 0; s < cfg.scenarios.size(); ++s) {
        MixingScenario sc = cfg.scenario(s);
        for (int r = 0; r < cfg.replicates; ++r) {
            Rng gen = Rng::substream(cfg.seed, kPurposeGenerate, replicate_id(s, r), 0);
            Population pop = simulate_population(gen, sc, cfg.population, cfg.link);
            m_all[s].push_back(pop.observed_count());

            char tag[32];
            std::snprintf(tag, sizeof(tag), "_r%04d", r);
            CaptureDataset data = pop.observed_dataset();
            {
                auto out = open_output(dir / ("pop_" + cfg.scenarios[s] + tag + ".csv"));
                for (int t = 1; t <= data.lists(); ++t) out << (t > 1 ? "," : "") << 't' << t;
                out << '\n';
                for (const auto& h : data.histories()) {
                    for (int t = 0; t < data.lists(); ++t)
                        out << (t > 0 ? "," : "") << (h.on_list(t) ? 1 : 0);
                    out << '\n';
                }
            }
            {
                nlohmann::json truth;
                truth["scenario"] = cfg.scenarios[s];
                truth["replicate"] = r;
                truth["n"] = pop.size();
                truth["m"] = pop.observed_count();
                truth["alpha_grid"] = cfg.alpha_grid;
                nlohmann::json na = nlohmann::json::array();
                for (double alpha : cfg.alpha_grid) na.push_back(true_n_alpha(pop, alpha));
                truth["n_alpha"] = na;
                truth["gen_stream"] = gen.stream();
                auto out = open_output(dir / ("truth_" + cfg.scenarios[s] + tag + ".json"));
                out << truth.dump(2) << '\n';
            }
        }
    }

    nlohmann::json j = manifest_header("simulate", cfg.config_text, cfg.seed);
    write_common_config(j, cfg);
    j["m_summary"] = m_summary_json(
        cfg, [&](std::size_t s, int r) { return m_all[s][static_cast<std::size_t>(r)]; });
    auto out = open_output(dir / "manifest.json");
    out << j.dump(2) << '\n';
}

void write_risk_outputs(const RiskConfig& cfg, const RiskStudy& result,
                        const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    {
        auto out = open_output(dir / "risk.csv");
        out << "estimator,alpha,mse_vs_restricted,mse_vs_total,bias,theory_restricted,"
               "theory_total,cor1_bound,replicates_used,failures\n";
        for (const auto& cell : result.cells) {
            const char* kname = cell.kind == EstimatorKind::empirical ? "empirical" : "histogram";
            TheoreticalMse th = theoretical_mse(cfg.f, cfg.population, cell.kind, cell.alpha);
            out << kname << ',' << num_text(cell.alpha) << ',' << num_text(cell.mse_restricted)
                << ',' << num_text(cell.mse_total) << ',' << num_text(cell.bias_restricted) << ','
                << (th.infinite ? "inf" : num_text(th.vs_restricted)) << ','
                << (th.infinite ? "inf" : num_text(th.vs_total)) << ','
                << (std::isfinite(th.cor1_bound) ? num_text(th.cor1_bound) : "inf") << ','
                << (static_cast<std::int64_t>(cell.estimates.size()) - cell.failed) << ','
                << cell.failed << '\n';
        }
    }
    nlohmann::json j = manifest_header("risk", cfg.config_text, cfg.seed);
    j["population"] = cfg.population;
    j["replicates"] = cfg.replicates;
    j["f"] = cfg.f.describe();
    j["alphas"] = cfg.alphas;
    j["bin_width"] = cfg.bin_width;
    auto out = open_output(dir / "manifest.json");
    out << j.dump(2) << '\n';
}

}  // namespace aobs
