#include "refa/catalogue.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "json_fields.hpp"
#include "refa/error.hpp"
#include "refa/io.hpp"

namespace refa {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 8> kPhaseNames = {"Plan",    "Code",   "Build",   "Test",
                                                         "Release", "Deploy", "Operate", "Monitor"};

// Longest tags first so "PP" wins over "P".
constexpr std::array<std::pair<std::string_view, Phase>, 9> kTags = {{{"PP", Phase::Plan},
                                                                      {"P", Phase::Plan},
                                                                      {"C", Phase::Code},
                                                                      {"B", Phase::Build},
                                                                      {"T", Phase::Test},
                                                                      {"R", Phase::Release},
                                                                      {"D", Phase::Deploy},
                                                                      {"O", Phase::Operate},
                                                                      {"M", Phase::Monitor}}};

std::optional<CodeParts> split_tag_index(std::string_view s, bool allow_dash) {
    for (const auto& [tag, phase] : kTags) {
        if (s.substr(0, tag.size()) != tag) continue;
        auto rest = s.substr(tag.size());
        if (allow_dash && !rest.empty() && rest.front() == '-') rest.remove_prefix(1);
        if (rest.empty() || rest.size() > 6) continue;
        if (!std::all_of(rest.begin(), rest.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
            continue;
        }
        return CodeParts{std::string(tag), std::stoi(std::string(rest))};
    }
    return std::nullopt;
}

// Sort key usable for any code: area codes drop their "A-" prefix first.
std::tuple<int, std::string, int, std::string> code_key(std::string_view code) {
    std::optional<CodeParts> parts;
    int family = 2;
    if (code.substr(0, 2) == "A-") {
        parts = parse_area_code(code);
        family = 0;
    } else {
        parts = parse_artefact_code(code);
        family = 1;
    }
    if (!parts) return {2, std::string(code), 0, std::string(code)};
    return {family, parts->tag, parts->index, std::string(code)};
}

}  // namespace

std::string_view phase_name(Phase p) noexcept { return kPhaseNames[static_cast<std::size_t>(p)]; }

std::optional<Phase> parse_phase(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kPhaseNames.size(); ++i) {
        const auto& n = kPhaseNames[i];
        if (n.size() != name.size()) continue;
        bool eq = true;
        for (std::size_t k = 0; k < n.size(); ++k) {
            if (std::tolower(static_cast<unsigned char>(n[k])) != std::tolower(static_cast<unsigned char>(name[k]))) {
                eq = false;
                break;
            }
        }
        if (eq) return static_cast<Phase>(i);
    }
    return std::nullopt;
}

std::optional<Phase> phase_from_ordinal(int ordinal) noexcept {
    if (ordinal < 0 || ordinal > 7) return std::nullopt;
    return static_cast<Phase>(ordinal);
}

std::optional<CodeParts> parse_area_code(std::string_view code) {
    if (code.substr(0, 2) != "A-") return std::nullopt;
    return split_tag_index(code.substr(2), false);
}

std::optional<CodeParts> parse_artefact_code(std::string_view code) { return split_tag_index(code, true); }

std::optional<Phase> phase_for_tag(std::string_view tag) noexcept {
    for (const auto& [t, phase] : kTags) {
        if (t == tag) return phase;
    }
    return std::nullopt;
}

bool code_less(std::string_view a, std::string_view b) { return code_key(a) < code_key(b); }

std::string_view domain_name(PracticeDomain d) noexcept {
    return d == PracticeDomain::SoftwareEngineering ? "software-engineering" : "secure-software-engineering";
}

std::optional<PracticeDomain> parse_domain(std::string_view s) noexcept {
    if (s == "software-engineering") return PracticeDomain::SoftwareEngineering;
    if (s == "secure-software-engineering") return PracticeDomain::SecureSoftwareEngineering;
    return std::nullopt;
}

std::string_view flow_kind_name(FlowKind k) noexcept {
    switch (k) {
        case FlowKind::Produces: return "produces";
        case FlowKind::Consumes: return "consumes";
        case FlowKind::Feedback: return "feedback";
    }
    return "produces";
}

std::optional<FlowKind> parse_flow_kind(std::string_view s) noexcept {
    if (s == "produces") return FlowKind::Produces;
    if (s == "consumes") return FlowKind::Consumes;
    if (s == "feedback") return FlowKind::Feedback;
    return std::nullopt;
}

const PracticeArea* Catalogue::find_area(std::string_view code) const {
    auto it = std::find_if(areas.begin(), areas.end(), [&](const PracticeArea& a) { return a.code == code; });
    return it == areas.end() ? nullptr : &*it;
}

const Artefact* Catalogue::find_artefact(std::string_view code) const {
    auto it = std::find_if(artefacts.begin(), artefacts.end(), [&](const Artefact& a) { return a.code == code; });
    return it == artefacts.end() ? nullptr : &*it;
}

std::vector<PhaseEntry> canonical_phases() {
    std::vector<PhaseEntry> out;
    for (Phase p : kAllPhases) out.push_back({phase_ordinal(p), std::string(phase_name(p))});
    return out;
}

void ValidationReport::sort() {
    auto by_key = [](const Finding& a, const Finding& b) {
        return std::tie(a.entity_ref, a.rule_id) < std::tie(b.entity_ref, b.rule_id);
    };
    std::stable_sort(errors.begin(), errors.end(), by_key);
    std::stable_sort(warnings.begin(), warnings.end(), by_key);
}

json to_json(const ValidationReport& r) {
    auto list = [](const std::vector<Finding>& fs) {
        json arr = json::array();
        for (const auto& f : fs) {
            arr.push_back({{"entityRef", f.entity_ref}, {"ruleId", f.rule_id}, {"message", f.message}});
        }
        return arr;
    };
    return {{"errors", list(r.errors)}, {"warnings", list(r.warnings)}};
}

// ---------------------------------------------------------------------------
// JSON mapping

namespace {

// Entries may be given as an array of objects carrying "code", or as an
// object keyed by code.
std::vector<std::pair<std::string, json>> keyed_entries(const json& doc, const char* key) {
    std::vector<std::pair<std::string, json>> out;
    auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) return out;
    if (it->is_array()) {
        for (std::size_t i = 0; i < it->size(); ++i) {
            out.emplace_back(std::string(key) + "[" + std::to_string(i) + "]", (*it)[i]);
        }
    } else if (it->is_object()) {
        for (const auto& [code, body] : it->items()) {
            json entry = body;
            if (!entry.is_object()) throw Error(errc::parse_error, std::string(key) + "." + code + " must be an object");
            if (!entry.contains("code")) entry["code"] = code;
            out.emplace_back(std::string(key) + "." + code, std::move(entry));
        }
    } else {
        throw Error(errc::parse_error, std::string(key) + " must be an array or object", key);
    }
    return out;
}

}  // namespace

Catalogue catalogue_from_json(const json& doc) {
    using namespace detail;
    if (!doc.is_object()) throw Error(errc::parse_error, "catalogue document must be an object");
    Catalogue c;
    c.id = get_string(doc, "id", "catalogue");
    c.version = opt_string(doc, "version", "catalogue");

    const auto& phases = get_array(doc, "phases", "catalogue");
    for (std::size_t i = 0; i < phases.size(); ++i) {
        std::string path = "phases[" + std::to_string(i) + "]";
        c.phases.push_back({static_cast<int>(get_int(phases[i], "ordinal", path)), get_string(phases[i], "name", path)});
    }

    for (const auto& [path, a] : keyed_entries(doc, "areas")) {
        PracticeArea area;
        area.code = get_string(a, "code", path);
        area.name = opt_string(a, "name", path);
        auto phase_text = get_string(a, "phase", path);
        auto phase = parse_phase(phase_text);
        if (!phase) {
            throw Error(errc::dangling_reference, path + ".phase \"" + phase_text + "\" is not a DevOps phase",
                        "areas/" + area.code);
        }
        area.phase = *phase;
        auto dom_text = opt_string(a, "domain", path, "secure-software-engineering");
        auto dom = parse_domain(dom_text);
        if (!dom) throw Error(errc::parse_error, path + ".domain \"" + dom_text + "\" is not a practice domain", path);
        area.domain = *dom;
        area.description = opt_string(a, "description", path);
        area.source = opt_string(a, "source", path);
        c.areas.push_back(std::move(area));
    }

    for (const auto& [path, a] : keyed_entries(doc, "artefacts")) {
        Artefact art;
        art.code = get_string(a, "code", path);
        art.name = opt_string(a, "name", path);
        art.owning_area = get_string(a, "owningArea", path);
        art.is_compliance_evidence = opt_bool(a, "isComplianceEvidence", path, true);
        if (auto it = a.find("standardRefs"); it != a.end() && !it->is_null()) {
            if (!it->is_array()) throw Error(errc::parse_error, path + ".standardRefs must be an array", path);
            for (std::size_t i = 0; i < it->size(); ++i) {
                std::string rp = path + ".standardRefs[" + std::to_string(i) + "]";
                const auto& r = (*it)[i];
                art.standard_refs.push_back(
                    {get_string(r, "standardId", rp), opt_string(r, "practiceCode", rp), maybe_string(r, "clause", rp)});
            }
        }
        art.source = opt_string(a, "source", path);
        c.artefacts.push_back(std::move(art));
    }

    if (auto it = doc.find("edges"); it != doc.end() && !it->is_null()) {
        if (!it->is_array()) throw Error(errc::parse_error, "edges must be an array", "edges");
        for (std::size_t i = 0; i < it->size(); ++i) {
            std::string path = "edges[" + std::to_string(i) + "]";
            const auto& e = (*it)[i];
            ArtefactFlowEdge edge;
            edge.from = get_string(e, "from", path);
            edge.to = get_string(e, "to", path);
            auto kind_text = get_string(e, "kind", path);
            auto kind = parse_flow_kind(kind_text);
            if (!kind) throw Error(errc::parse_error, path + ".kind \"" + kind_text + "\" is not an edge kind", path);
            edge.kind = *kind;
            c.edges.push_back(std::move(edge));
        }
    }
    return c;
}

json catalogue_to_json(const Catalogue& c) {
    json phases = json::array();
    for (const auto& p : c.phases) phases.push_back({{"ordinal", p.ordinal}, {"name", p.name}});

    json areas = json::array();
    for (const auto& a : c.areas) {
        json j = {{"code", a.code},
                  {"name", a.name},
                  {"phase", std::string(phase_name(a.phase))},
                  {"domain", std::string(domain_name(a.domain))},
                  {"description", a.description}};
        if (!a.source.empty()) j["source"] = a.source;
        areas.push_back(std::move(j));
    }

    json artefacts = json::array();
    for (const auto& a : c.artefacts) {
        json refs = json::array();
        for (const auto& r : a.standard_refs) {
            json rj = {{"standardId", r.standard_id}, {"practiceCode", r.practice_code}};
            if (r.clause) rj["clause"] = *r.clause;
            refs.push_back(std::move(rj));
        }
        json j = {{"code", a.code},
                  {"name", a.name},
                  {"owningArea", a.owning_area},
                  {"isComplianceEvidence", a.is_compliance_evidence},
                  {"standardRefs", std::move(refs)}};
        if (!a.source.empty()) j["source"] = a.source;
        artefacts.push_back(std::move(j));
    }

    json edges = json::array();
    for (const auto& e : c.edges) {
        edges.push_back({{"from", e.from}, {"to", e.to}, {"kind", std::string(flow_kind_name(e.kind))}});
    }

    return {{"id", c.id},         {"version", c.version},     {"phases", std::move(phases)},
            {"areas", std::move(areas)}, {"artefacts", std::move(artefacts)}, {"edges", std::move(edges)}};
}

Catalogue parse_catalogue_file(const std::filesystem::path& path) {
    return catalogue_from_json(io::read_json_file(path));
}

namespace {

bool is_resolution_rule(const std::string& rule) {
    return rule == "area-phase-resolves" || rule == "artefact-owner-resolves" || rule == "edge-endpoint-resolves";
}

}  // namespace

Catalogue load_catalogue(const std::filesystem::path& path) {
    Catalogue c = parse_catalogue_file(path);
    auto report = validate_catalogue(c);
    if (!report.ok()) {
        const auto& first = report.errors.front();
        bool dangling = std::any_of(report.errors.begin(), report.errors.end(),
                                    [](const Finding& f) { return is_resolution_rule(f.rule_id); });
        std::ostringstream msg;
        msg << path.string() << ": " << report.errors.size() << " error(s); first: " << first.entity_ref << " ["
            << first.rule_id << "] " << first.message;
        throw Error(dangling ? errc::dangling_reference : errc::validation_failed, msg.str(), first.entity_ref);
    }
    return c;
}

ValidationReport validate_catalogue(const Catalogue& c) {
    ValidationReport r;
    auto err = [&](std::string ref, std::string rule, std::string msg) {
        r.errors.push_back({std::move(ref), std::move(rule), std::move(msg)});
    };
    auto warn = [&](std::string ref, std::string rule, std::string msg) {
        r.warnings.push_back({std::move(ref), std::move(rule), std::move(msg)});
    };

    if (c.id.empty()) err("catalogue", "catalogue-id", "catalogue id is empty");
    if (c.phases != canonical_phases()) {
        err("catalogue", "phase-set",
            "phases must be exactly Plan, Code, Build, Test, Release, Deploy, Operate, Monitor with ordinals 0-7");
    }

    std::map<std::string, int> area_count;
    for (const auto& a : c.areas) ++area_count[a.code];
    std::set<std::string> reported;
    for (const auto& a : c.areas) {
        std::string ref = "areas/" + a.code;
        auto parts = parse_area_code(a.code);
        if (!parts) {
            err(ref, "area-code-format", "area code \"" + a.code + "\" does not match A-<PhaseTag><index>");
        } else if (phase_for_tag(parts->tag) != a.phase) {
            err(ref, "area-phase-tag",
                "tag " + parts->tag + " is inconsistent with phase " + std::string(phase_name(a.phase)));
        }
        if (area_count[a.code] > 1 && reported.insert(a.code).second) {
            err(ref, "unique-area-code", "area code " + a.code + " appears " + std::to_string(area_count[a.code]) + " times");
        }
    }

    std::map<std::string, int> artefact_count;
    for (const auto& a : c.artefacts) ++artefact_count[a.code];
    reported.clear();
    for (const auto& a : c.artefacts) {
        std::string ref = "artefacts/" + a.code;
        auto parts = parse_artefact_code(a.code);
        if (!parts) err(ref, "artefact-code-format", "artefact code \"" + a.code + "\" does not match <PhaseTag><index>");
        if (artefact_count[a.code] > 1 && reported.insert(a.code).second) {
            err(ref, "unique-artefact-code",
                "artefact code " + a.code + " appears " + std::to_string(artefact_count[a.code]) + " times");
        }
        const PracticeArea* owner = c.find_area(a.owning_area);
        if (!owner) {
            err(ref, "artefact-owner-resolves", "owning area " + a.owning_area + " does not resolve");
        } else if (parts && phase_for_tag(parts->tag) != owner->phase) {
            warn(ref, "artefact-phase-tag",
                 "artefact tag " + parts->tag + " differs from owner phase " + std::string(phase_name(owner->phase)));
        }
        for (const auto& s : a.standard_refs) {
            if (s.standard_id.empty()) err(ref, "standard-id-nonempty", "standard reference with empty standardId");
        }
    }

    for (std::size_t i = 0; i < c.edges.size(); ++i) {
        const auto& e = c.edges[i];
        std::string ref = "edges/" + e.from + "->" + e.to;
        if (!c.find_artefact(e.from)) {
            err(ref, "edge-endpoint-resolves", "edge source " + e.from + " is not an artefact");
        }
        if (!c.find_artefact(e.to) && !c.find_area(e.to)) {
            err(ref, "edge-endpoint-resolves", "edge target " + e.to + " is neither an artefact nor an area");
        }
        if (e.kind == FlowKind::Produces && e.from == e.to) {
            err(ref, "no-produce-self-loop", "artefact " + e.from + " cannot produce itself");
        }
    }

    r.sort();
    return r;
}

std::vector<PracticeArea> areas_for_phase(const Catalogue& c, Phase p) {
    if (phase_ordinal(p) < 0 || phase_ordinal(p) > 7) {
        throw Error(errc::unknown_phase, "phase ordinal " + std::to_string(phase_ordinal(p)) + " is not in the catalogue");
    }
    std::vector<PracticeArea> out;
    for (const auto& a : c.areas) {
        if (a.phase == p) out.push_back(a);
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return code_less(a.code, b.code); });
    return out;
}

std::vector<Artefact> artefacts_for_area(const Catalogue& c, std::string_view area_code) {
    if (!c.find_area(area_code)) {
        throw Error(errc::unknown_area, "practice area " + std::string(area_code) + " is not in the catalogue",
                    "areas/" + std::string(area_code));
    }
    std::vector<Artefact> out;
    for (const auto& a : c.artefacts) {
        if (a.owning_area == area_code) out.push_back(a);
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return code_less(a.code, b.code); });
    return out;
}

namespace {

std::string dot_escape(std::string_view s) {
    std::string out;
    for (char ch : s) {
        if (ch == '"' || ch == '\\') out.push_back('\\');
        if (ch == '\n') {
            out += "\\n";
            continue;
        }
        out.push_back(ch);
    }
    return out;
}

}  // namespace

std::string export_flow_graph(const Catalogue& c, std::optional<Phase> phase) {
    std::vector<const PracticeArea*> areas;
    for (const auto& a : c.areas) {
        if (!phase || a.phase == *phase) areas.push_back(&a);
    }
    std::set<std::string> area_codes;
    for (auto* a : areas) area_codes.insert(a->code);

    std::vector<const Artefact*> artefacts;
    for (const auto& a : c.artefacts) {
        if (area_codes.count(a.owning_area)) artefacts.push_back(&a);
    }
    auto by_code = [](auto* a, auto* b) { return code_less(a->code, b->code); };
    std::stable_sort(areas.begin(), areas.end(), by_code);
    std::stable_sort(artefacts.begin(), artefacts.end(), by_code);

    std::set<std::string> in_scope = area_codes;
    for (auto* a : artefacts) in_scope.insert(a->code);

    std::vector<const ArtefactFlowEdge*> edges;
    for (const auto& e : c.edges) {
        if (in_scope.count(e.from) && in_scope.count(e.to)) edges.push_back(&e);
    }
    std::stable_sort(edges.begin(), edges.end(), [](auto* a, auto* b) {
        if (a->from != b->from) return code_less(a->from, b->from);
        if (a->to != b->to) return code_less(a->to, b->to);
        return a->kind < b->kind;
    });

    std::ostringstream out;
    std::string title = c.id + (phase ? "-" + std::string(phase_name(*phase)) : std::string());
    out << "digraph \"" << dot_escape(title) << "\" {\n";
    out << "  rankdir=LR;\n";
    for (auto* a : areas) {
        out << "  \"" << dot_escape(a->code) << "\" [shape=box, class=\"area\", label=\"" << dot_escape(a->code)
            << "\\n" << dot_escape(a->name) << "\"];\n";
    }
    for (auto* a : artefacts) {
        out << "  \"" << dot_escape(a->code) << "\" [shape=note, class=\"artefact\", label=\"" << dot_escape(a->code)
            << "\\n" << dot_escape(a->name) << "\"];\n";
    }
    for (auto* e : edges) {
        out << "  \"" << dot_escape(e->from) << "\" -> \"" << dot_escape(e->to) << "\" [label=\""
            << flow_kind_name(e->kind) << "\"";
        if (e->kind == FlowKind::Feedback) out << ", style=dashed";
        out << "];\n";
    }
    out << "}\n";
    return out.str();
}

}  // namespace refa
