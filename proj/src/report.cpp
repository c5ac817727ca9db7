#include "gia/report.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <regex>
#include <sstream>

namespace gia {

namespace {

const char* const kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '-': out += "&#45;"; break;  // keeps "--" out of comments
            default: out += c;
        }
    }
    return out;
}

}  // namespace

nlohmann::json profile_to_json(const NamedProfile& p) {
    std::vector<Real> samples(p.profile.samples.data(), p.profile.samples.data() + p.profile.samples.size());
    return {{"label", p.label},
            {"node_set", p.profile.node_set},
            {"samples", samples},
            {"histogram", p.profile.histogram}};
}

NamedProfile profile_from_json(const nlohmann::json& j) {
    NamedProfile p;
    p.label = j.value("label", "profile");
    const auto samples = j.at("samples").get<std::vector<Real>>();
    IndexList nodes = j.value("node_set", IndexList{});
    Vector v = Eigen::Map<const Vector>(samples.data(), static_cast<Index>(samples.size()));
    p.profile = make_profile(std::move(nodes), std::move(v));
    if (j.contains("histogram")) {
        const auto stored = j.at("histogram").get<std::vector<Index>>();
        require(std::equal(stored.begin(), stored.end(), p.profile.histogram.begin(), p.profile.histogram.end()),
                "profile '" + p.label + "': histogram disagrees with its samples");
    }
    return p;
}

std::string histogram_svg(const std::vector<NamedProfile>& profiles) {
    require(!profiles.empty(), "histogram: no profiles");
    constexpr Real width = 640, height = 360, left = 50, right = 20, top = 30, bottom = 40;
    const Real plot_w = width - left - right, plot_h = height - top - bottom;
    Real peak = 0;
    for (const auto& p : profiles) {
        const Real total = std::max<Real>(1, static_cast<Real>(p.profile.samples.size()));
        for (Index c : p.profile.histogram) peak = std::max(peak, c / total);
    }
    if (peak == 0) peak = 1;

    std::ostringstream out;
    out << std::fixed << std::setprecision(2);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    for (const auto& p : profiles) {
        out << "<!-- bins " << escape_xml(p.label) << ":";
        for (Index c : p.profile.histogram) out << ' ' << c;
        out << " -->\n";
    }
    out << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
        << top + plot_h << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
        << "\" stroke=\"black\"/>\n";
    for (Real tick : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
        const Real x = left + (tick + 1.0) / 2.0 * plot_w;
        out << "<text x=\"" << x << "\" y=\"" << top + plot_h + 16 << "\" font-size=\"11\" text-anchor=\"middle\">"
            << std::setprecision(1) << tick << std::setprecision(2) << "</text>\n";
    }
    out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 6
        << "\" font-size=\"12\" text-anchor=\"middle\">node homophily</text>\n";

    const Real bin_w = plot_w / kHistogramBins;
    for (std::size_t k = 0; k < profiles.size(); ++k) {
        const auto& p = profiles[k];
        const char* color = kPalette[k % std::size(kPalette)];
        const Real total = std::max<Real>(1, static_cast<Real>(p.profile.samples.size()));
        out << "<g fill=\"" << color << "\" fill-opacity=\"0.35\" stroke=\"" << color << "\">\n";
        for (int b = 0; b < kHistogramBins; ++b) {
            const Real h = p.profile.histogram[b] / total / peak * plot_h;
            if (h <= 0) continue;
            out << "<rect x=\"" << left + b * bin_w << "\" y=\"" << top + plot_h - h << "\" width=\"" << bin_w
                << "\" height=\"" << h << "\"/>\n";
        }
        out << "</g>\n";
        out << "<text x=\"" << left + 10 << "\" y=\"" << top + 14 * (k + 1) << "\" font-size=\"12\" fill=\"" << color
            << "\">" << escape_xml(p.label) << " (n=" << p.profile.samples.size() << ")</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::vector<std::pair<std::string, std::vector<Index>>> svg_bin_counts(const std::string& svg) {
    std::vector<std::pair<std::string, std::vector<Index>>> out;
    const std::regex comment("<!-- bins (.*?):([0-9 ]*) -->");
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), comment); it != std::sregex_iterator(); ++it) {
        std::vector<Index> counts;
        std::istringstream in((*it)[2].str());
        for (Index c; in >> c;) counts.push_back(c);
        out.push_back({(*it)[1].str(), counts});
    }
    return out;
}

std::string summary_table(const EvalReport& report) {
    const Category cats[] = {Category::Vanilla, Category::Robust, Category::Combo, Category::Homo};
    std::vector<std::string> attacks;
    for (const auto& c : report.categories)
        if (std::find(attacks.begin(), attacks.end(), c.attack) == attacks.end()) attacks.push_back(c.attack);
    std::map<std::string, std::pair<Real, Index>> shifts;
    for (const auto& r : report.attack_runs)
        if (r.error.empty()) shifts[r.attack].first += r.homophily_shift, shifts[r.attack].second += 1;

    std::ostringstream out;
    out << std::fixed << std::setprecision(2);
    out << "### " << (report.dataset.empty() ? "report" : report.dataset) << "\n\n| attack |";
    for (Category c : cats) out << ' ' << category_name(c) << " mean | " << category_name(c) << " max |";
    out << " homophily shift |\n|---|";
    for (std::size_t i = 0; i < std::size(cats); ++i) out << "---|---|";
    out << "---|\n";
    for (const auto& a : attacks) {
        out << "| " << a << " |";
        for (Category c : cats) {
            const auto it = std::find_if(report.categories.begin(), report.categories.end(),
                                         [&](const CategorySummary& s) { return s.attack == a && s.category == c; });
            if (it == report.categories.end())
                out << " - | - |";
            else
                out << ' ' << 100 * it->mean << " | " << 100 * it->max << " |";
        }
        const auto s = shifts.find(a);
        if (s == shifts.end())
            out << " - |\n";
        else
            out << ' ' << std::setprecision(4) << s->second.first / s->second.second << std::setprecision(2) << " |\n";
    }
    return out.str();
}

}  // namespace gia
