#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "refa/assessment.hpp"

namespace refa {

struct Granularity {
    enum class Kind { PerPhase, PerLifecycle };
    Kind kind = Kind::PerLifecycle;
    Phase phase = Phase::Plan;  // PerPhase only

    static Granularity per_phase(Phase p) { return {Kind::PerPhase, p}; }
    static Granularity per_lifecycle() { return {Kind::PerLifecycle, Phase::Plan}; }
    bool operator==(const Granularity&) const = default;
};

/// "phase:<Name>" or "lifecycle".
std::optional<Granularity> parse_granularity(std::string_view s);
std::string granularity_name(const Granularity& g);

struct MaturityReport {
    std::string assessment_id;
    Granularity granularity;
    RaterFilter filter = RaterFilter::All;
    std::vector<std::string> axes;
    std::vector<double> current_curve;
    std::vector<double> target_curve;
};

nlohmann::json to_json(const MaturityReport& r);

/// Per phase: one axis per scored practice area of that phase, in code order.
/// Per lifecycle: one axis per scored phase, in phase order.
MaturityReport build_maturity_report(const Assessment& a, Granularity granularity,
                                     RaterFilter filter = RaterFilter::All);

enum class Quadrant { QuickWins, MajorProjects, FillIns, ThanklessTasks };

inline constexpr std::array<Quadrant, 4> kQuadrantOrder = {Quadrant::QuickWins, Quadrant::MajorProjects,
                                                           Quadrant::FillIns, Quadrant::ThanklessTasks};

std::string_view quadrant_id(Quadrant q) noexcept;     // "QuickWins"
std::string_view quadrant_title(Quadrant q) noexcept;  // "Quick Wins"

struct Thresholds {
    int impact = 5;
    int effort = 5;
    bool operator==(const Thresholds&) const = default;
};

/// High impact means impact > threshold, high effort means effort > threshold;
/// a value equal to its threshold counts as low.
Quadrant classify_quadrant(int impact, int effort, Thresholds thresholds = {});

struct RoadmapItem {
    ImprovementPoint point;
    Quadrant quadrant = Quadrant::QuickWins;
};

struct ImprovementRoadmap {
    std::string assessment_id;
    Thresholds thresholds;
    std::vector<RoadmapItem> items;  // quadrant order, then impact desc, effort asc, id
};

nlohmann::json to_json(const ImprovementRoadmap& r);

/// Classifies every point whose status is prioritized or planned.
ImprovementRoadmap build_roadmap(const Assessment& a, Thresholds thresholds = {});

struct RadarOptions {
    int size = 520;
    std::string current_color = "#1f77b4";
    std::string target_color = "#d62728";
    std::string title;
};

std::string render_radar_svg(const MaturityReport& report, const RadarOptions& options = {});

/// Plain-text table of the curves, two decimals.
std::string render_maturity_table(const MaturityReport& report);

enum class RoadmapFormat { Svg, Markdown };

std::string render_roadmap(const ImprovementRoadmap& roadmap, RoadmapFormat format);

}  // namespace refa
