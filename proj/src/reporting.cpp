#include "refa/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <sstream>

#include "refa/error.hpp"
#include "refa/maturity.hpp"

namespace refa {

using nlohmann::json;

std::optional<Granularity> parse_granularity(std::string_view s) {
    if (s == "lifecycle") return Granularity::per_lifecycle();
    constexpr std::string_view prefix = "phase:";
    if (s.substr(0, prefix.size()) == prefix) {
        if (auto p = parse_phase(s.substr(prefix.size()))) return Granularity::per_phase(*p);
    }
    return std::nullopt;
}

std::string granularity_name(const Granularity& g) {
    if (g.kind == Granularity::Kind::PerLifecycle) return "lifecycle";
    return "phase:" + std::string(phase_name(g.phase));
}

json to_json(const MaturityReport& r) {
    return {{"assessmentId", r.assessment_id},
            {"granularity", granularity_name(r.granularity)},
            {"filter", std::string(rater_filter_name(r.filter))},
            {"axes", r.axes},
            {"currentCurve", r.current_curve},
            {"targetCurve", r.target_curve}};
}

MaturityReport build_maturity_report(const Assessment& a, Granularity granularity, RaterFilter filter) {
    ScoreTable scores = compute_scores(a, filter);
    MaturityReport r;
    r.assessment_id = a.id;
    r.granularity = granularity;
    r.filter = filter;

    auto push = [&](const std::string& label, const ScoreEntry& e) {
        if (!e.target_mean) {
            throw Error(errc::missing_target, "no target rating recorded for " + label, "axes/" + label);
        }
        r.axes.push_back(label);
        r.current_curve.push_back(e.current_mean);
        r.target_curve.push_back(*e.target_mean);
    };

    if (granularity.kind == Granularity::Kind::PerPhase) {
        for (const auto& [code, e] : scores.per_area) {
            auto it = a.area_phases.find(code);
            if (it != a.area_phases.end() && it->second == granularity.phase) push(code, e);
        }
    } else {
        for (const auto& [phase, e] : scores.per_phase) push(std::string(phase_name(phase)), e);
    }
    if (r.axes.empty()) {
        throw Error(errc::no_data, "no scored data for granularity " + granularity_name(granularity),
                    "assessment/" + a.id);
    }
    return r;
}

std::string_view quadrant_id(Quadrant q) noexcept {
    switch (q) {
        case Quadrant::QuickWins: return "QuickWins";
        case Quadrant::MajorProjects: return "MajorProjects";
        case Quadrant::FillIns: return "FillIns";
        case Quadrant::ThanklessTasks: return "ThanklessTasks";
    }
    return "QuickWins";
}

std::string_view quadrant_title(Quadrant q) noexcept {
    switch (q) {
        case Quadrant::QuickWins: return "Quick Wins";
        case Quadrant::MajorProjects: return "Major Projects";
        case Quadrant::FillIns: return "Fill-ins";
        case Quadrant::ThanklessTasks: return "Thankless Tasks";
    }
    return "Quick Wins";
}

Quadrant classify_quadrant(int impact, int effort, Thresholds t) {
    auto check = [](int v, const char* what) {
        if (v < kMinImpactEffort || v > kMaxImpactEffort) {
            throw Error(errc::value_out_of_range, std::string(what) + " " + std::to_string(v) + " is outside 1-10");
        }
    };
    check(impact, "impact");
    check(effort, "effort");
    if (t.impact < 0 || t.impact > kMaxImpactEffort || t.effort < 0 || t.effort > kMaxImpactEffort) {
        throw Error(errc::value_out_of_range, "thresholds must lie within 0-10");
    }
    bool high_impact = impact > t.impact;
    bool high_effort = effort > t.effort;
    if (high_impact) return high_effort ? Quadrant::MajorProjects : Quadrant::QuickWins;
    return high_effort ? Quadrant::ThanklessTasks : Quadrant::FillIns;
}

json to_json(const ImprovementRoadmap& r) {
    json items = json::array();
    for (const auto& item : r.items) {
        items.push_back({{"id", item.point.id},
                         {"areaCode", item.point.area_code},
                         {"description", item.point.description},
                         {"impact", *item.point.impact},
                         {"effort", *item.point.effort},
                         {"status", std::string(point_status_name(item.point.status))},
                         {"quadrant", std::string(quadrant_id(item.quadrant))}});
    }
    return {{"assessmentId", r.assessment_id},
            {"thresholds", {{"impact", r.thresholds.impact}, {"effort", r.thresholds.effort}}},
            {"tieRule", "a value equal to its threshold counts as low"},
            {"items", std::move(items)}};
}

ImprovementRoadmap build_roadmap(const Assessment& a, Thresholds thresholds) {
    ImprovementRoadmap r;
    r.assessment_id = a.id;
    r.thresholds = thresholds;
    for (const auto& p : a.improvement_points) {
        if (p.status == PointStatus::Proposed) continue;
        if (!p.impact || !p.effort) {
            throw Error(errc::missing_impact_effort, "point " + p.id + " lacks impact or effort",
                        "improvement-points/" + p.id);
        }
        r.items.push_back({p, classify_quadrant(*p.impact, *p.effort, thresholds)});
    }
    if (r.items.empty()) {
        throw Error(errc::nothing_to_classify, "assessment " + a.id + " has no prioritized improvement points",
                    "assessment/" + a.id);
    }
    std::stable_sort(r.items.begin(), r.items.end(), [](const RoadmapItem& x, const RoadmapItem& y) {
        if (x.quadrant != y.quadrant) return x.quadrant < y.quadrant;
        if (*x.point.impact != *y.point.impact) return *x.point.impact > *y.point.impact;
        if (*x.point.effort != *y.point.effort) return *x.point.effort < *y.point.effort;
        return x.point.id < y.point.id;
    });
    return r;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

std::string fmt2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s = buf;
    if (s == "-0.00") s = "0.00";
    return s;
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(ch);
        }
    }
    return out;
}

// XML comments may not contain "--".
std::string comment_safe(std::string_view s) {
    std::string out;
    for (char ch : s) {
        if (ch == '-' && !out.empty() && out.back() == '-') out.push_back(' ');
        out.push_back(ch);
    }
    return out;
}

struct Point2 {
    double x;
    double y;
};

}  // namespace

std::string render_radar_svg(const MaturityReport& report, const RadarOptions& options) {
    const double size = options.size;
    const double cx = size / 2.0;
    const double cy = size / 2.0 + 10.0;
    const double radius = size * 0.32;
    const std::size_t n = report.axes.size();

    auto angle = [&](std::size_t i) { return -std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * double(i) / double(n); };
    auto at = [&](std::size_t i, double level) {
        double r = radius * std::clamp(level, 0.0, double(kMaxRating)) / double(kMaxRating);
        return Point2{cx + r * std::cos(angle(i)), cy + r * std::sin(angle(i))};
    };

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << options.size << "\" height=\""
        << options.size + 40 << "\" viewBox=\"0 0 " << options.size << " " << options.size + 40 << "\">\n";
    out << "<!-- refa-maturity-report assessment=\"" << comment_safe(report.assessment_id) << "\" granularity=\""
        << comment_safe(granularity_name(report.granularity)) << "\" filter=\"" << rater_filter_name(report.filter)
        << "\" axes=\"" << n << "\" -->\n";
    out << "<style>.ring{fill:none;stroke:#cccccc;stroke-width:1}.axis{stroke:#999999;stroke-width:1}"
           ".axis-label{font:12px sans-serif;fill:#222222}.ring-label{font:10px sans-serif;fill:#777777}"
           ".legend{font:12px sans-serif;fill:#222222}.title{font:bold 14px sans-serif;fill:#222222}</style>\n";
    out << "<rect x=\"0\" y=\"0\" width=\"" << options.size << "\" height=\"" << options.size + 40
        << "\" fill=\"#ffffff\"/>\n";

    std::string title = options.title.empty() ? "Security maturity: " + granularity_name(report.granularity) : options.title;
    out << "<text class=\"title\" x=\"" << fmt2(cx) << "\" y=\"22\" text-anchor=\"middle\">" << xml_escape(title)
        << "</text>\n";

    out << "<g class=\"rings\">\n";
    for (int level = kMinRating; level <= kMaxRating; ++level) {
        double r = radius * level / double(kMaxRating);
        out << "  <circle class=\"ring\" data-level=\"" << level << "\" cx=\"" << fmt2(cx) << "\" cy=\"" << fmt2(cy)
            << "\" r=\"" << fmt2(r) << "\"/>\n";
        out << "  <text class=\"ring-label\" x=\"" << fmt2(cx + 3.0) << "\" y=\"" << fmt2(cy - r - 2.0) << "\">"
            << level << " " << level_info(level).name << "</text>\n";
    }
    out << "</g>\n";

    out << "<g class=\"axes\">\n";
    for (std::size_t i = 0; i < n; ++i) {
        Point2 end = at(i, kMaxRating);
        out << "  <line class=\"axis\" x1=\"" << fmt2(cx) << "\" y1=\"" << fmt2(cy) << "\" x2=\"" << fmt2(end.x)
            << "\" y2=\"" << fmt2(end.y) << "\"/>\n";
    }
    for (std::size_t i = 0; i < n; ++i) {
        double a = angle(i);
        double lx = cx + (radius + 18.0) * std::cos(a);
        double ly = cy + (radius + 18.0) * std::sin(a) + 4.0;
        double c = std::cos(a);
        const char* anchor = std::fabs(c) < 0.2 ? "middle" : (c > 0 ? "start" : "end");
        out << "  <text class=\"axis-label\" x=\"" << fmt2(lx) << "\" y=\"" << fmt2(ly) << "\" text-anchor=\""
            << anchor << "\">" << xml_escape(report.axes[i]) << "</text>\n";
    }
    out << "</g>\n";

    auto polygon = [&](const char* cls, const std::vector<double>& curve, const std::string& color, const char* dash) {
        out << "<polygon class=\"curve " << cls << "\" points=\"";
        for (std::size_t i = 0; i < n; ++i) {
            Point2 p = at(i, curve[i]);
            if (i) out << ' ';
            out << fmt2(p.x) << ',' << fmt2(p.y);
        }
        out << "\" fill=\"" << color << "\" fill-opacity=\"0.15\" stroke=\"" << color << "\" stroke-width=\"2\"";
        if (dash) out << " stroke-dasharray=\"" << dash << "\"";
        out << "/>\n";
    };
    polygon("target", report.target_curve, options.target_color, "6,4");
    polygon("current", report.current_curve, options.current_color, nullptr);

    double ly = options.size + 22.0;
    out << "<g class=\"legend\">\n";
    out << "  <line x1=\"20\" y1=\"" << fmt2(ly - 4) << "\" x2=\"44\" y2=\"" << fmt2(ly - 4) << "\" stroke=\""
        << options.current_color << "\" stroke-width=\"2\"/>\n";
    out << "  <text class=\"legend\" x=\"50\" y=\"" << fmt2(ly) << "\">Current status</text>\n";
    out << "  <line x1=\"170\" y1=\"" << fmt2(ly - 4) << "\" x2=\"194\" y2=\"" << fmt2(ly - 4) << "\" stroke=\""
        << options.target_color << "\" stroke-width=\"2\" stroke-dasharray=\"6,4\"/>\n";
    out << "  <text class=\"legend\" x=\"200\" y=\"" << fmt2(ly) << "\">Target status</text>\n";
    out << "</g>\n";
    out << "</svg>\n";
    return out.str();
}

std::string render_maturity_table(const MaturityReport& report) {
    std::size_t width = 8;
    for (const auto& a : report.axes) width = std::max(width, a.size());
    std::ostringstream out;
    out << "Maturity report (" << granularity_name(report.granularity) << ", filter " << rater_filter_name(report.filter)
        << ")\n";
    auto pad = [&](const std::string& s) { return s + std::string(width - s.size(), ' '); };
    out << pad("axis") << "  current  target\n";
    for (std::size_t i = 0; i < report.axes.size(); ++i) {
        out << pad(report.axes[i]) << "  " << fmt2(report.current_curve[i]) << "     " << fmt2(report.target_curve[i])
            << "\n";
    }
    return out.str();
}

namespace {

std::string roadmap_markdown(const ImprovementRoadmap& r) {
    std::ostringstream out;
    out << "# Improvement Roadmap\n\n";
    out << "Assessment: " << r.assessment_id << "\n\n";
    out << "High impact: impact > " << r.thresholds.impact << ". High effort: effort > " << r.thresholds.effort
        << ". A value equal to its threshold counts as low.\n";
    for (Quadrant q : kQuadrantOrder) {
        out << "\n## " << quadrant_title(q) << "\n\n";
        bool any = false;
        for (const auto& item : r.items) {
            if (item.quadrant != q) continue;
            any = true;
            out << "- **" << item.point.id << "** (" << item.point.area_code << ", impact " << *item.point.impact
                << ", effort " << *item.point.effort << ", " << point_status_name(item.point.status) << ")";
            if (!item.point.description.empty()) out << ": " << item.point.description;
            out << "\n";
        }
        if (!any) out << "_No improvement points._\n";
    }
    return out.str();
}

std::string roadmap_svg(const ImprovementRoadmap& r) {
    constexpr double left = 80.0, top = 50.0, plot = 500.0;
    constexpr double width = left + plot + 40.0, height = top + plot + 70.0;
    auto x_of = [&](double effort) { return left + (effort - 0.5) / 10.0 * plot; };
    auto y_of = [&](double impact) { return top + plot - (impact - 0.5) / 10.0 * plot; };
    const double split_x = left + r.thresholds.effort / 10.0 * plot;
    const double split_y = top + plot - r.thresholds.impact / 10.0 * plot;

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<!-- refa-improvement-roadmap assessment=\"" << comment_safe(r.assessment_id) << "\" impactThreshold=\""
        << r.thresholds.impact << "\" effortThreshold=\"" << r.thresholds.effort
        << "\" ties=\"value equal to threshold counts as low\" items=\"" << r.items.size() << "\" -->\n";
    out << "<style>.cell{stroke:#888888;stroke-width:1}.quadrant-title{font:bold 14px sans-serif;fill:#333333}"
           ".axis-title{font:12px sans-serif;fill:#222222}.item-label{font:11px sans-serif;fill:#111111}</style>\n";
    out << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"#ffffff\"/>\n";

    struct Cell {
        Quadrant q;
        double x, y, w, h;
        const char* fill;
    };
    const Cell cells[] = {
        {Quadrant::QuickWins, left, top, split_x - left, split_y - top, "#e3f2e1"},
        {Quadrant::MajorProjects, split_x, top, left + plot - split_x, split_y - top, "#e1ebf5"},
        {Quadrant::FillIns, left, split_y, split_x - left, top + plot - split_y, "#f5f5e1"},
        {Quadrant::ThanklessTasks, split_x, split_y, left + plot - split_x, top + plot - split_y, "#f5e3e1"},
    };
    for (const auto& c : cells) {
        out << "<rect class=\"cell\" data-quadrant=\"" << quadrant_id(c.q) << "\" x=\"" << fmt2(c.x) << "\" y=\""
            << fmt2(c.y) << "\" width=\"" << fmt2(c.w) << "\" height=\"" << fmt2(c.h) << "\" fill=\"" << c.fill
            << "\"/>\n";
    }
    for (const auto& c : cells) {
        out << "<text class=\"quadrant-title\" x=\"" << fmt2(c.x + 8.0) << "\" y=\"" << fmt2(c.y + 20.0) << "\">"
            << quadrant_title(c.q) << "</text>\n";
    }
    out << "<text class=\"axis-title\" x=\"" << fmt2(left + plot / 2.0) << "\" y=\"" << fmt2(top + plot + 40.0)
        << "\" text-anchor=\"middle\">Effort (low to high)</text>\n";
    out << "<text class=\"axis-title\" x=\"30\" y=\"" << fmt2(top + plot / 2.0) << "\" text-anchor=\"middle\" "
        << "transform=\"rotate(-90 30 " << fmt2(top + plot / 2.0) << ")\">Impact (low to high)</text>\n";
    for (int v = 1; v <= 10; ++v) {
        out << "<text class=\"axis-title\" x=\"" << fmt2(x_of(v)) << "\" y=\"" << fmt2(top + plot + 18.0)
            << "\" text-anchor=\"middle\">" << v << "</text>\n";
        out << "<text class=\"axis-title\" x=\"" << fmt2(left - 10.0) << "\" y=\"" << fmt2(y_of(v) + 4.0)
            << "\" text-anchor=\"end\">" << v << "</text>\n";
    }

    std::map<std::pair<int, int>, int> stacked;
    for (const auto& item : r.items) {
        int impact = *item.point.impact;
        int effort = *item.point.effort;
        int k = stacked[{impact, effort}]++;
        double x = x_of(effort);
        double y = y_of(impact);
        out << "<g class=\"item\" data-id=\"" << xml_escape(item.point.id) << "\" data-quadrant=\""
            << quadrant_id(item.quadrant) << "\" data-impact=\"" << impact << "\" data-effort=\"" << effort << "\">"
            << "<circle cx=\"" << fmt2(x) << "\" cy=\"" << fmt2(y) << "\" r=\"5\" fill=\"#333333\"/>"
            << "<text class=\"item-label\" x=\"" << fmt2(x + 8.0) << "\" y=\"" << fmt2(y + 4.0 + 12.0 * k) << "\">"
            << xml_escape(item.point.id) << "</text></g>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace

std::string render_roadmap(const ImprovementRoadmap& roadmap, RoadmapFormat format) {
    return format == RoadmapFormat::Svg ? roadmap_svg(roadmap) : roadmap_markdown(roadmap);
}

}  // namespace refa
