#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace refa {

enum class Phase : int { Plan = 0, Code, Build, Test, Release, Deploy, Operate, Monitor };

inline constexpr std::array<Phase, 8> kAllPhases = {Phase::Plan,    Phase::Code,   Phase::Build,
                                                    Phase::Test,    Phase::Release, Phase::Deploy,
                                                    Phase::Operate, Phase::Monitor};

std::string_view phase_name(Phase p) noexcept;
constexpr int phase_ordinal(Phase p) noexcept { return static_cast<int>(p); }
// Accepts the canonical name in any letter case.
std::optional<Phase> parse_phase(std::string_view name) noexcept;
std::optional<Phase> phase_from_ordinal(int ordinal) noexcept;

/// Split form of an area code ("A-B10") or artefact code ("C-12", "PP9").
/// The tag names the phase flow: PP program-level plan, P team-level plan,
/// C, B, T, R, D, O, M for the remaining phases.
struct CodeParts {
    std::string tag;
    int index = 0;
};

std::optional<CodeParts> parse_area_code(std::string_view code);
std::optional<CodeParts> parse_artefact_code(std::string_view code);
std::optional<Phase> phase_for_tag(std::string_view tag) noexcept;

/// Listing order for codes: tag, then numeric index, then raw text.
/// "A-B3" < "A-B5" < "A-B10".
bool code_less(std::string_view a, std::string_view b);

enum class PracticeDomain { SoftwareEngineering, SecureSoftwareEngineering };

std::string_view domain_name(PracticeDomain d) noexcept;
std::optional<PracticeDomain> parse_domain(std::string_view s) noexcept;

struct PhaseEntry {
    int ordinal = 0;
    std::string name;
    bool operator==(const PhaseEntry&) const = default;
};

struct StandardRef {
    std::string standard_id;
    std::string practice_code;
    std::optional<std::string> clause;
    bool operator==(const StandardRef&) const = default;
};

struct PracticeArea {
    std::string code;
    std::string name;
    Phase phase = Phase::Plan;
    PracticeDomain domain = PracticeDomain::SecureSoftwareEngineering;
    std::string description;
    std::string source;  // "paper-table" | "lifecycle-narrative" | empty
    bool operator==(const PracticeArea&) const = default;
};

struct Artefact {
    std::string code;
    std::string name;
    std::string owning_area;
    bool is_compliance_evidence = true;
    std::vector<StandardRef> standard_refs;
    std::string source;
    bool operator==(const Artefact&) const = default;
};

enum class FlowKind { Produces, Consumes, Feedback };

std::string_view flow_kind_name(FlowKind k) noexcept;
std::optional<FlowKind> parse_flow_kind(std::string_view s) noexcept;

struct ArtefactFlowEdge {
    std::string from;  // artefact code
    std::string to;    // artefact or practice-area code
    FlowKind kind = FlowKind::Produces;
    bool operator==(const ArtefactFlowEdge&) const = default;
};

struct Catalogue {
    std::string id;
    std::string version;
    std::vector<PhaseEntry> phases;
    std::vector<PracticeArea> areas;
    std::vector<Artefact> artefacts;
    std::vector<ArtefactFlowEdge> edges;

    const PracticeArea* find_area(std::string_view code) const;
    const Artefact* find_artefact(std::string_view code) const;
    bool operator==(const Catalogue&) const = default;
};

/// The canonical eight phases, in ordinal order.
std::vector<PhaseEntry> canonical_phases();

struct Finding {
    std::string entity_ref;
    std::string rule_id;
    std::string message;
    bool operator==(const Finding&) const = default;
};

struct ValidationReport {
    std::vector<Finding> errors;
    std::vector<Finding> warnings;

    bool ok() const noexcept { return errors.empty(); }
    // Orders both lists by (entity_ref, rule_id), keeping insertion order on ties.
    void sort();
};

nlohmann::json to_json(const ValidationReport& r);

// Parsing only checks shape; referential rules are left to validate_catalogue.
Catalogue catalogue_from_json(const nlohmann::json& j);
nlohmann::json catalogue_to_json(const Catalogue& c);

Catalogue parse_catalogue_file(const std::filesystem::path& path);
/// Parses and validates; throws refa::Error if any error finding exists.
Catalogue load_catalogue(const std::filesystem::path& path);

ValidationReport validate_catalogue(const Catalogue& c);

std::vector<PracticeArea> areas_for_phase(const Catalogue& c, Phase p);
std::vector<Artefact> artefacts_for_area(const Catalogue& c, std::string_view area_code);

/// DOT digraph of the artefacts view. Areas render as boxes, artefacts as
/// notes; an edge is in scope when both of its endpoints are.
std::string export_flow_graph(const Catalogue& c, std::optional<Phase> phase = std::nullopt);

}  // namespace refa
