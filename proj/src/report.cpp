#include "aobs/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "aobs/dp_sampler.hpp"
#include "aobs/error.hpp"
#include "aobs/mathfn.hpp"
#include "aobs/study.hpp"

namespace aobs {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double field_to_double(const std::string& s) {
    if (s.empty()) return kNan;
    if (s == "inf") return std::numeric_limits<double>::infinity();
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        fail(errc::missing_study_artifacts, "bad numeric field '" + s + "'");
    return v;
}

// fixed two-decimal text keeps SVG output byte-stable
std::string fmt2(double v) {
    char buf[48];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
    (void)ec;
    return std::string(buf, p);
}

std::string fmt_tick(double v) {
    char buf[48];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 10);
    (void)ec;
    return std::string(buf, p);
}

struct Canvas {
    std::ostringstream svg;
    double width = 720, height = 480;
    double ml = 70, mr = 20, mt = 40, mb = 60;

    double plot_w() const { return width - ml - mr; }
    double plot_h() const { return height - mt - mb; }

    void open(const std::string& title) {
        svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt2(width)
            << "\" height=\"" << fmt2(height) << "\" viewBox=\"0 0 " << fmt2(width) << ' '
            << fmt2(height) << "\">\n";
        svg << "<rect width=\"" << fmt2(width) << "\" height=\"" << fmt2(height)
            << "\" fill=\"white\"/>\n";
        svg << "<text x=\"" << fmt2(width / 2) << "\" y=\"24\" text-anchor=\"middle\" "
               "font-family=\"sans-serif\" font-size=\"16\">"
            << title << "</text>\n";
    }

    void frame() {
        svg << "<rect x=\"" << fmt2(ml) << "\" y=\"" << fmt2(mt) << "\" width=\""
            << fmt2(plot_w()) << "\" height=\"" << fmt2(plot_h())
            << "\" fill=\"none\" stroke=\"black\"/>\n";
    }

    std::string close() {
        svg << "</svg>\n";
        return svg.str();
    }
};

// 1-2-5 tick spacing
std::vector<double> nice_ticks(double lo, double hi, int want) {
    std::vector<double> out;
    if (!(hi > lo)) return {lo};
    double raw = (hi - lo) / std::max(want, 2);
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double mult : {1.0, 2.0, 5.0, 10.0}) {
        if (mag * mult >= raw) {
            step = mag * mult;
            break;
        }
    }
    double first = std::ceil(lo / step) * step;
    for (double v = first; v <= hi + step * 1e-9; v += step) out.push_back(v == 0 ? 0.0 : v);
    return out;
}

struct Kde1d {
    std::vector<double> grid, dens;
};

Kde1d kde_curve(const std::vector<double>& values, int points) {
    Kde1d out;
    double lo = *std::min_element(values.begin(), values.end());
    double hi = *std::max_element(values.begin(), values.end());
    double mean = 0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    double sd = std::sqrt(std::max(var, 0.0));
    double bw = 1.06 * sd * std::pow(static_cast<double>(values.size()), -0.2);
    if (!(bw > 0)) bw = std::max((hi - lo) / 20.0, 0.5);
    lo -= 2.5 * bw;
    hi += 2.5 * bw;
    for (int i = 0; i < points; ++i) {
        double g = lo + (hi - lo) * i / (points - 1);
        double acc = 0;
        for (double v : values) acc += normal_pdf((g - v) / bw);
        out.grid.push_back(g);
        out.dens.push_back(acc / (static_cast<double>(values.size()) * bw));
    }
    return out;
}

}  // namespace

std::vector<ViolinData> read_violin_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(errc::missing_study_artifacts, "missing '" + path + "'");
    std::string line;
    if (!std::getline(in, line))
        fail(errc::missing_study_artifacts, "empty draw file '" + path + "'");
    std::vector<ViolinData> out;
    std::int64_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 4) fail(errc::missing_study_artifacts, "malformed draw row '" + line + "'");
        ++rows;
        auto* scen = [&]() -> ViolinData* {
            for (auto& v : out)
                if (v.scenario == f[0]) return &v;
            out.push_back(ViolinData{f[0], {}});
            return &out.back();
        }();
        auto* grp = [&]() -> ViolinGroup* {
            for (auto& g : scen->groups)
                if (g.name == f[1]) return &g;
            scen->groups.push_back(ViolinGroup{f[1], {}});
            return &scen->groups.back();
        }();
        grp->values.push_back(field_to_double(f[3]));
    }
    if (rows == 0) fail(errc::missing_study_artifacts, "empty draw file '" + path + "'");
    return out;
}

CurveData read_curves_csv(const std::string& path, const std::string& scenario) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(errc::missing_study_artifacts, "missing '" + path + "'");
    std::string line;
    if (!std::getline(in, line))
        fail(errc::missing_study_artifacts, "empty curves file '" + path + "'");
    CurveData out;
    out.scenario = scenario;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 3)
            fail(errc::missing_study_artifacts, "malformed curve row '" + line + "'");
        out.eta.push_back(field_to_double(f[0]));
        out.truth.push_back(field_to_double(f[1]));
        out.estimate.push_back(field_to_double(f[2]));
        if (std::isfinite(out.truth.back())) out.has_truth = true;
    }
    if (out.eta.empty()) fail(errc::missing_study_artifacts, "empty curves file '" + path + "'");
    return out;
}

std::string render_violin_svg(const ViolinData& data) {
    Canvas c;
    c.open(data.scenario);
    c.frame();

    const std::size_t G = data.groups.size();
    std::vector<Kde1d> kdes(G);
    double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
    for (std::size_t g = 0; g < G; ++g) {
        const auto& vals = data.groups[g].values;
        if (vals.empty()) continue;
        kdes[g] = kde_curve(vals, 64);
        ymin = std::min(ymin, kdes[g].grid.front());
        ymax = std::max(ymax, kdes[g].grid.back());
    }
    if (!(ymax > ymin)) {
        ymin -= 1;
        ymax += 1;
    }
    double pad = 0.04 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;

    auto ypix = [&](double v) { return c.mt + c.plot_h() * (ymax - v) / (ymax - ymin); };
    double slot = c.plot_w() / static_cast<double>(G);

    for (double tick : nice_ticks(ymin, ymax, 6)) {
        double y = ypix(tick);
        c.svg << "<line x1=\"" << fmt2(c.ml - 5) << "\" y1=\"" << fmt2(y) << "\" x2=\""
              << fmt2(c.ml) << "\" y2=\"" << fmt2(y) << "\" stroke=\"black\"/>\n";
        c.svg << "<text x=\"" << fmt2(c.ml - 8) << "\" y=\"" << fmt2(y + 4)
              << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
              << fmt_tick(tick) << "</text>\n";
    }

    for (std::size_t g = 0; g < G; ++g) {
        const auto& vals = data.groups[g].values;
        double cx = c.ml + slot * (static_cast<double>(g) + 0.5);
        c.svg << "<text x=\"" << fmt2(cx) << "\" y=\"" << fmt2(c.height - c.mb + 18)
              << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
              << data.groups[g].name << "</text>\n";
        if (vals.empty()) continue;

        double dmax = *std::max_element(kdes[g].dens.begin(), kdes[g].dens.end());
        double half = 0.42 * slot;
        c.svg << "<polygon fill=\"#9ecae1\" stroke=\"#3182bd\" stroke-width=\"1\" points=\"";
        for (std::size_t i = 0; i < kdes[g].grid.size(); ++i) {
            double w = dmax > 0 ? half * kdes[g].dens[i] / dmax : 0;
            c.svg << fmt2(cx - w) << ',' << fmt2(ypix(kdes[g].grid[i])) << ' ';
        }
        for (std::size_t i = kdes[g].grid.size(); i-- > 0;) {
            double w = dmax > 0 ? half * kdes[g].dens[i] / dmax : 0;
            c.svg << fmt2(cx + w) << ',' << fmt2(ypix(kdes[g].grid[i]));
            if (i > 0) c.svg << ' ';
        }
        c.svg << "\"/>\n";

        std::vector<double> sorted = vals;
        double lo = empirical_quantile(sorted, 0.025);
        double hi = empirical_quantile(sorted, 0.975);
        double mean = 0;
        for (double v : vals) mean += v;
        mean /= static_cast<double>(vals.size());
        c.svg << "<line x1=\"" << fmt2(cx) << "\" y1=\"" << fmt2(ypix(lo)) << "\" x2=\""
              << fmt2(cx) << "\" y2=\"" << fmt2(ypix(hi))
              << "\" stroke=\"#08519c\" stroke-width=\"2\"/>\n";
        c.svg << "<circle cx=\"" << fmt2(cx) << "\" cy=\"" << fmt2(ypix(mean))
              << "\" r=\"3\" fill=\"#08519c\"/>\n";
    }

    c.svg << "<text x=\"18\" y=\"" << fmt2(c.mt + c.plot_h() / 2)
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
             "transform=\"rotate(-90 18 "
          << fmt2(c.mt + c.plot_h() / 2) << ")\">count</text>\n";
    return c.close();
}

std::string render_curves_svg(const CurveData& data) {
    Canvas c;
    c.open(data.scenario);
    c.frame();

    double xmin = data.eta.front(), xmax = data.eta.back();
    double ymax = 0;
    for (std::size_t i = 0; i < data.eta.size(); ++i) {
        if (std::isfinite(data.truth[i])) ymax = std::max(ymax, data.truth[i]);
        if (std::isfinite(data.estimate[i])) ymax = std::max(ymax, data.estimate[i]);
    }
    if (!(ymax > 0)) ymax = 1;
    ymax *= 1.08;

    auto xpix = [&](double v) { return c.ml + c.plot_w() * (v - xmin) / (xmax - xmin); };
    auto ypix = [&](double v) { return c.mt + c.plot_h() * (ymax - v) / ymax; };

    for (double tick : nice_ticks(xmin, xmax, 8)) {
        double x = xpix(tick);
        c.svg << "<line x1=\"" << fmt2(x) << "\" y1=\"" << fmt2(c.height - c.mb) << "\" x2=\""
              << fmt2(x) << "\" y2=\"" << fmt2(c.height - c.mb + 5) << "\" stroke=\"black\"/>\n";
        c.svg << "<text x=\"" << fmt2(x) << "\" y=\"" << fmt2(c.height - c.mb + 18)
              << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
              << fmt_tick(tick) << "</text>\n";
    }
    for (double tick : nice_ticks(0, ymax, 5)) {
        double y = ypix(tick);
        c.svg << "<line x1=\"" << fmt2(c.ml - 5) << "\" y1=\"" << fmt2(y) << "\" x2=\""
              << fmt2(c.ml) << "\" y2=\"" << fmt2(y) << "\" stroke=\"black\"/>\n";
        c.svg << "<text x=\"" << fmt2(c.ml - 8) << "\" y=\"" << fmt2(y + 4)
              << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
              << fmt_tick(tick) << "</text>\n";
    }

    auto polyline = [&](const std::vector<double>& ys, const char* color, const char* dash) {
        c.svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
        if (dash[0]) c.svg << " stroke-dasharray=\"" << dash << "\"";
        c.svg << " points=\"";
        bool first = true;
        for (std::size_t i = 0; i < data.eta.size(); ++i) {
            if (!std::isfinite(ys[i])) continue;
            if (!first) c.svg << ' ';
            c.svg << fmt2(xpix(data.eta[i])) << ',' << fmt2(ypix(ys[i]));
            first = false;
        }
        c.svg << "\"/>\n";
    };
    if (data.has_truth) polyline(data.truth, "black", "");
    polyline(data.estimate, "#3182bd", "6,3");

    double lx = c.width - c.mr - 150, ly = c.mt + 14;
    if (data.has_truth) {
        c.svg << "<line x1=\"" << fmt2(lx) << "\" y1=\"" << fmt2(ly) << "\" x2=\""
              << fmt2(lx + 28) << "\" y2=\"" << fmt2(ly) << "\" stroke=\"black\" "
              << "stroke-width=\"1.5\"/>\n";
        c.svg << "<text x=\"" << fmt2(lx + 34) << "\" y=\"" << fmt2(ly + 4)
              << "\" font-family=\"sans-serif\" font-size=\"12\">truth</text>\n";
        ly += 18;
    }
    c.svg << "<line x1=\"" << fmt2(lx) << "\" y1=\"" << fmt2(ly) << "\" x2=\"" << fmt2(lx + 28)
          << "\" y2=\"" << fmt2(ly)
          << "\" stroke=\"#3182bd\" stroke-width=\"1.5\" stroke-dasharray=\"6,3\"/>\n";
    c.svg << "<text x=\"" << fmt2(lx + 34) << "\" y=\"" << fmt2(ly + 4)
          << "\" font-family=\"sans-serif\" font-size=\"12\">estimate</text>\n";

    c.svg << "<text x=\"" << fmt2(c.ml + c.plot_w() / 2) << "\" y=\"" << fmt2(c.height - 16)
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
             "log-odds of capture</text>\n";
    c.svg << "<text x=\"18\" y=\"" << fmt2(c.mt + c.plot_h() / 2)
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
             "transform=\"rotate(-90 18 "
          << fmt2(c.mt + c.plot_h() / 2) << ")\">density</text>\n";
    return c.close();
}

ReportResult render_report(const std::string& study_dir) {
    namespace fs = std::filesystem;
    const fs::path dir(study_dir);
    if (!fs::is_directory(dir))
        fail(errc::missing_study_artifacts, "no study directory at '" + study_dir + "'");

    auto write_file = [&](const fs::path& path, const std::string& bytes) {
        std::ofstream out(path, std::ios::binary);
        if (!out) fail(errc::config_error, "cannot write '" + path.string() + "'");
        out << bytes;
    };

    ReportResult res;
    std::vector<ViolinData> violins = read_violin_csv((dir / "violin.csv").string());
    for (const auto& v : violins) {
        std::string base = "violin_" + v.scenario;
        write_file(dir / (base + ".svg"), render_violin_svg(v));
        std::ostringstream csv;
        csv << "group,draw,value\n";
        for (const auto& g : v.groups)
            for (std::size_t d = 0; d < g.values.size(); ++d)
                csv << g.name << ',' << d << ',' << num_text(g.values[d]) << '\n';
        write_file(dir / (base + ".csv"), csv.str());
        res.figures.push_back(base + ".svg");
    }

    for (const auto& v : violins) {
        fs::path curves = dir / ("curves_" + v.scenario + ".csv");
        if (!fs::exists(curves)) continue;
        CurveData data = read_curves_csv(curves.string(), v.scenario);
        std::string base = "etas_" + v.scenario;
        write_file(dir / (base + ".svg"), render_curves_svg(data));
        std::ostringstream csv;
        csv << "eta,truth,estimate\n";
        for (std::size_t i = 0; i < data.eta.size(); ++i)
            csv << num_text(data.eta[i]) << ',' << num_text(data.truth[i]) << ','
                << num_text(data.estimate[i]) << '\n';
        write_file(dir / (base + ".csv"), csv.str());
        res.figures.push_back(base + ".svg");
    }

    nlohmann::json j;
    j["tool"] = kCodeVersion;
    j["kind"] = "report";
    j["figures"] = res.figures;
    write_file(dir / "report_manifest.json", j.dump(2) + "\n");
    return res;
}

}  // namespace aobs
