#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "temsa/report.hpp"

namespace temsa::eval {

namespace {

constexpr const char* kPalette[] = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string file_stem(const std::string& dataset) {
    std::string out;
    for (char c : dataset) {
        const unsigned char u = static_cast<unsigned char>(c);
        out += (std::isalnum(u) || c == '-' || c == '_') ? static_cast<char>(std::tolower(u)) : '_';
    }
    return out.empty() ? "dataset" : out;
}

struct BarGroup {
    std::string label;
    std::vector<double> values;         // one per series, in [0, 1]
    std::optional<double> mean_marker;  // drawn as an 'x'
};

/// Grouped bars on a 0..1 axis with an optional dashed reference line.
std::string bar_chart(const std::string& title, const std::vector<std::string>& series,
                      const std::vector<BarGroup>& groups, std::optional<double> reference = std::nullopt,
                      const std::string& reference_label = "") {
    const double bar_w = 18.0, gap = 24.0, left = 60.0, top = 50.0, plot_h = 300.0;
    const double group_w = bar_w * static_cast<double>(series.size()) + gap;
    const double width = left + group_w * static_cast<double>(std::max<std::size_t>(groups.size(), 1)) + 160.0;
    const double height = top + plot_h + 110.0;
    auto y_of = [&](double v) { return top + plot_h * (1.0 - std::clamp(v, 0.0, 1.0)); };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << fmt(width / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
      << "</text>\n";
    for (int tick = 0; tick <= 10; tick += 2) {
        const double v = tick / 10.0, y = y_of(v);
        s << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(width - 150) << "\" y2=\""
          << fmt(y) << "\" stroke=\"#ddd\"/>\n";
        s << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(y + 4) << "\" text-anchor=\"end\">" << fmt(v)
          << "</text>\n";
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const double x0 = left + gap / 2 + group_w * static_cast<double>(g);
        for (std::size_t k = 0; k < series.size() && k < groups[g].values.size(); ++k) {
            const double v = groups[g].values[k];
            const double x = x0 + bar_w * static_cast<double>(k);
            s << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y_of(v)) << "\" width=\"" << fmt(bar_w - 2)
              << "\" height=\"" << fmt(top + plot_h - y_of(v)) << "\" fill=\"" << kPalette[k % 6] << "\"><title>"
              << escape(groups[g].label + " " + series[k] + " " + format_number(v)) << "</title></rect>\n";
        }
        if (groups[g].mean_marker) {
            const double cx = x0 + bar_w * static_cast<double>(series.size()) / 2 - 1, cy = y_of(*groups[g].mean_marker);
            s << "<path d=\"M" << fmt(cx - 5) << " " << fmt(cy - 5) << " L" << fmt(cx + 5) << " " << fmt(cy + 5)
              << " M" << fmt(cx - 5) << " " << fmt(cy + 5) << " L" << fmt(cx + 5) << " " << fmt(cy - 5)
              << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
        }
        const double lx = x0 + bar_w * static_cast<double>(series.size()) / 2, ly = top + plot_h + 14;
        s << "<text x=\"" << fmt(lx) << "\" y=\"" << fmt(ly) << "\" text-anchor=\"end\" transform=\"rotate(-30 "
          << fmt(lx) << " " << fmt(ly) << ")\">" << escape(groups[g].label) << "</text>\n";
    }
    if (reference) {
        const double y = y_of(*reference);
        s << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(width - 150) << "\" y2=\""
          << fmt(y) << "\" stroke=\"black\" stroke-dasharray=\"6 4\"/>\n";
        s << "<text x=\"" << fmt(width - 146) << "\" y=\"" << fmt(y + 4) << "\">" << escape(reference_label)
          << "</text>\n";
    }
    for (std::size_t k = 0; k < series.size(); ++k) {
        const double y = top + 10 + 16 * static_cast<double>(k);
        s << "<rect x=\"" << fmt(width - 130) << "\" y=\"" << fmt(y) << "\" width=\"10\" height=\"10\" fill=\""
          << kPalette[k % 6] << "\"/>\n";
        s << "<text x=\"" << fmt(width - 115) << "\" y=\"" << fmt(y + 9) << "\">" << escape(series[k]) << "</text>\n";
    }
    s << "<text x=\"" << fmt(width - 130) << "\" y=\"" << fmt(top + 10 + 16 * static_cast<double>(series.size()) + 9)
      << "\">x = experiment mean</text>\n";
    s << "</svg>\n";
    return s.str();
}

void write(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write plot '" + path.string() + "'");
    out << content;
    if (!out) throw Error("failed writing plot '" + path.string() + "'");
}

}  // namespace

std::vector<std::string> emit_plots(const ComparisonReport& report, const std::string& out_dir) {
    if (report.empty()) throw Error("emit_plots: report is empty");
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) throw Error("cannot create plot directory '" + out_dir + "'");

    const std::vector<std::string> series{"Acc", "Pre", "F1", "Rec"};
    const std::string mode = std::string(to_string(report.averaging));
    std::vector<std::string> written;
    for (const auto& dataset : report.datasets()) {
        std::vector<BarGroup> groups;
        for (const auto& r : report.rows) {
            if (r.dataset != dataset) continue;
            BarGroup g{r.label, {r.metrics.accuracy, r.metrics.precision, r.metrics.f1, r.metrics.recall}, {}};
            for (const auto& m : report.means)
                if (m.dataset == dataset && m.experiment == r.experiment) g.mean_marker = m.mean.accuracy;
            groups.push_back(std::move(g));
        }
        const auto path = fs::path(out_dir) / (file_stem(dataset) + "_comparison.svg");
        write(path, bar_chart(dataset + ": text, image and multimodal sentiment (" + mode + ")", series, groups));
        written.push_back(path.string());
    }

    // Baseline view: mean accuracy of each experiment per dataset against the
    // text-only mean of that dataset.
    std::vector<std::string> exp_series;
    std::vector<int> exp_ids;
    for (const auto& m : report.means)
        if (std::find(exp_ids.begin(), exp_ids.end(), m.experiment) == exp_ids.end()) exp_ids.push_back(m.experiment);
    std::sort(exp_ids.begin(), exp_ids.end());
    for (int e : exp_ids) {
        std::string name = experiment_label(e, "");
        exp_series.push_back(name.substr(0, name.size() - 3));
    }
    std::vector<BarGroup> groups;
    std::optional<double> baseline;
    for (const auto& dataset : report.datasets()) {
        BarGroup g{dataset, std::vector<double>(exp_ids.size(), 0.0), {}};
        for (const auto& m : report.means) {
            if (m.dataset != dataset) continue;
            const auto k = static_cast<std::size_t>(std::find(exp_ids.begin(), exp_ids.end(), m.experiment) -
                                                    exp_ids.begin());
            g.values[k] = m.mean.accuracy;
            if (m.experiment == 2 && !baseline) baseline = m.mean.accuracy;
        }
        groups.push_back(std::move(g));
    }
    const auto path = fs::path(out_dir) / "baseline_comparison.svg";
    write(path, bar_chart("Accuracy against the text-only baseline", exp_series, groups, baseline,
                          "text baseline"));
    written.push_back(path.string());
    return written;
}

}  // namespace temsa::eval
