#include "refa/assessment.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "json_fields.hpp"
#include "refa/csv.hpp"
#include "refa/error.hpp"
#include "refa/io.hpp"

namespace refa {

using nlohmann::json;

std::string_view point_status_name(PointStatus s) noexcept {
    switch (s) {
        case PointStatus::Proposed: return "proposed";
        case PointStatus::Prioritized: return "prioritized";
        case PointStatus::Planned: return "planned";
    }
    return "proposed";
}

std::optional<PointStatus> parse_point_status(std::string_view s) noexcept {
    if (s == "proposed") return PointStatus::Proposed;
    if (s == "prioritized") return PointStatus::Prioritized;
    if (s == "planned") return PointStatus::Planned;
    return std::nullopt;
}

std::string_view session_kind_name(SessionKind k) noexcept {
    return k == SessionKind::Evaluation ? "evaluation" : "summary";
}

std::string_view session_state_name(SessionState s) noexcept {
    switch (s) {
        case SessionState::Planned: return "planned";
        case SessionState::Open: return "open";
        case SessionState::Closed: return "closed";
    }
    return "planned";
}

std::vector<EvaluationSession> standard_sessions() {
    return {
        {1, SessionKind::Evaluation, {Phase::Plan, Phase::Code}, kEvaluationMinutes, SessionState::Planned},
        {2, SessionKind::Evaluation, {Phase::Build, Phase::Test}, kEvaluationMinutes, SessionState::Planned},
        {3, SessionKind::Evaluation, {Phase::Release, Phase::Deploy}, kEvaluationMinutes, SessionState::Planned},
        {4, SessionKind::Evaluation, {Phase::Operate, Phase::Monitor}, kEvaluationMinutes, SessionState::Planned},
        {5, SessionKind::Summary, {}, kSummaryMinutes, SessionState::Planned},
        {6, SessionKind::Summary, {}, kSummaryMinutes, SessionState::Planned},
    };
}

const Respondent* Assessment::find_respondent(std::string_view rid) const {
    auto it = std::find_if(roster.begin(), roster.end(), [&](const Respondent& r) { return r.id == rid; });
    return it == roster.end() ? nullptr : &*it;
}

const QuestionBinding* Assessment::find_binding(std::string_view qid) const {
    auto it = std::find_if(bindings.begin(), bindings.end(), [&](const QuestionBinding& b) { return b.question_id == qid; });
    return it == bindings.end() ? nullptr : &*it;
}

const ImprovementPoint* Assessment::find_point(std::string_view pid) const {
    auto it = std::find_if(improvement_points.begin(), improvement_points.end(),
                           [&](const ImprovementPoint& p) { return p.id == pid; });
    return it == improvement_points.end() ? nullptr : &*it;
}

const EvaluationSession& Assessment::session(int index) const {
    if (index < 1 || index > static_cast<int>(sessions.size())) {
        throw Error(errc::unknown_session, "session " + std::to_string(index) + " does not exist",
                    "session/" + std::to_string(index));
    }
    return sessions[static_cast<std::size_t>(index - 1)];
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json opt_int_json(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }

std::optional<int> checked_opt_int(const json& obj, const char* key, const std::string& path) {
    auto v = detail::maybe_int(obj, key, path);
    if (!v) return std::nullopt;
    if (*v < -1000000 || *v > 1000000) throw Error(errc::parse_error, path + "." + key + " is out of range", path);
    return static_cast<int>(*v);
}

std::vector<std::string> string_list(const json& obj, const char* key, const std::string& path) {
    std::vector<std::string> out;
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return out;
    if (!it->is_array()) throw Error(errc::parse_error, path + "." + key + " must be an array", path);
    for (const auto& s : *it) {
        if (!s.is_string()) throw Error(errc::parse_error, path + "." + key + " entries must be strings", path);
        out.push_back(s.get<std::string>());
    }
    return out;
}

Phase required_phase(const json& obj, const char* key, const std::string& path) {
    auto text = detail::get_string(obj, key, path);
    auto p = parse_phase(text);
    if (!p) throw Error(errc::parse_error, path + "." + key + " \"" + text + "\" is not a DevOps phase", path);
    return *p;
}

}  // namespace

json assessment_to_json(const Assessment& a) {
    json roster = json::array();
    for (const auto& r : a.roster) {
        roster.push_back({{"id", r.id},
                          {"displayName", r.display_name},
                          {"role", r.role},
                          {"isSecurityProfessional", r.is_security_professional}});
    }
    json sessions = json::array();
    for (const auto& s : a.sessions) {
        json phases = json::array();
        for (Phase p : s.phases) phases.push_back(std::string(phase_name(p)));
        sessions.push_back({{"index", s.index},
                            {"kind", std::string(session_kind_name(s.kind))},
                            {"phases", std::move(phases)},
                            {"plannedMinutes", s.planned_minutes},
                            {"state", std::string(session_state_name(s.state))}});
    }
    json responses = json::array();
    for (const auto& r : a.responses) {
        responses.push_back({{"questionId", r.question_id},
                             {"respondentId", r.respondent_id},
                             {"currentRating", r.current},
                             {"targetRating", opt_int_json(r.target)},
                             {"notes", r.notes},
                             {"evidenceRefs", r.evidence_refs}});
    }
    json points = json::array();
    for (const auto& p : a.improvement_points) {
        points.push_back({{"id", p.id},
                          {"areaCode", p.area_code},
                          {"description", p.description},
                          {"impact", opt_int_json(p.impact)},
                          {"effort", opt_int_json(p.effort)},
                          {"status", std::string(point_status_name(p.status))}});
    }
    json bindings = json::array();
    for (const auto& b : a.bindings) {
        bindings.push_back(
            {{"questionId", b.question_id}, {"areaCode", b.area_code}, {"phase", std::string(phase_name(b.phase))}});
    }
    json areas = json::object();
    for (const auto& [code, phase] : a.area_phases) areas[code] = std::string(phase_name(phase));

    json j = {{"id", a.id},
              {"catalogueId", a.catalogue_id},
              {"questionnaireId", a.questionnaire_id},
              {"options", {{"strictOrder", a.options.strict_order}, {"collectTargets", a.options.collect_targets}}},
              {"roster", std::move(roster)},
              {"sessions", std::move(sessions)},
              {"responses", std::move(responses)},
              {"improvementPoints", std::move(points)},
              {"questionBindings", std::move(bindings)},
              {"areaPhases", std::move(areas)},
              {"createdAt", a.created_at},
              {"closedAt", a.closed_at ? json(*a.closed_at) : json(nullptr)}};
    if (!a.access_tokens.empty()) j["accessTokens"] = a.access_tokens;
    return j;
}

Assessment assessment_from_json(const json& doc) {
    using namespace detail;
    if (!doc.is_object()) throw Error(errc::parse_error, "assessment document must be an object");
    Assessment a;
    a.id = get_string(doc, "id", "assessment");
    a.catalogue_id = get_string(doc, "catalogueId", "assessment");
    a.questionnaire_id = get_string(doc, "questionnaireId", "assessment");
    if (auto it = doc.find("options"); it != doc.end() && it->is_object()) {
        a.options.strict_order = opt_bool(*it, "strictOrder", "options", true);
        a.options.collect_targets = opt_bool(*it, "collectTargets", "options", true);
    }

    const auto& roster = get_array(doc, "roster", "assessment");
    for (std::size_t i = 0; i < roster.size(); ++i) {
        std::string path = "roster[" + std::to_string(i) + "]";
        const auto& r = roster[i];
        a.roster.push_back({get_string(r, "id", path), opt_string(r, "displayName", path), opt_string(r, "role", path),
                            opt_bool(r, "isSecurityProfessional", path, false)});
    }

    const auto& sessions = get_array(doc, "sessions", "assessment");
    for (std::size_t i = 0; i < sessions.size(); ++i) {
        std::string path = "sessions[" + std::to_string(i) + "]";
        const auto& s = sessions[i];
        EvaluationSession session;
        session.index = static_cast<int>(get_int(s, "index", path));
        auto kind = get_string(s, "kind", path);
        if (kind == "evaluation") session.kind = SessionKind::Evaluation;
        else if (kind == "summary") session.kind = SessionKind::Summary;
        else throw Error(errc::parse_error, path + ".kind \"" + kind + "\" is not a session kind", path);
        for (const auto& p : string_list(s, "phases", path)) {
            auto phase = parse_phase(p);
            if (!phase) throw Error(errc::parse_error, path + ".phases has unknown phase " + p, path);
            session.phases.push_back(*phase);
        }
        session.planned_minutes = static_cast<int>(get_int(s, "plannedMinutes", path));
        auto state = get_string(s, "state", path);
        if (state == "planned") session.state = SessionState::Planned;
        else if (state == "open") session.state = SessionState::Open;
        else if (state == "closed") session.state = SessionState::Closed;
        else throw Error(errc::parse_error, path + ".state \"" + state + "\" is not a session state", path);
        a.sessions.push_back(std::move(session));
    }

    if (auto it = doc.find("responses"); it != doc.end() && !it->is_null()) {
        if (!it->is_array()) throw Error(errc::parse_error, "responses must be an array", "responses");
        for (std::size_t i = 0; i < it->size(); ++i) {
            std::string path = "responses[" + std::to_string(i) + "]";
            const auto& r = (*it)[i];
            Response resp;
            resp.question_id = get_string(r, "questionId", path);
            resp.respondent_id = get_string(r, "respondentId", path);
            resp.current = static_cast<int>(get_int(r, "currentRating", path));
            resp.target = checked_opt_int(r, "targetRating", path);
            resp.notes = opt_string(r, "notes", path);
            resp.evidence_refs = string_list(r, "evidenceRefs", path);
            a.responses.push_back(std::move(resp));
        }
    }

    if (auto it = doc.find("improvementPoints"); it != doc.end() && !it->is_null()) {
        if (!it->is_array()) throw Error(errc::parse_error, "improvementPoints must be an array", "improvementPoints");
        for (std::size_t i = 0; i < it->size(); ++i) {
            std::string path = "improvementPoints[" + std::to_string(i) + "]";
            const auto& p = (*it)[i];
            ImprovementPoint point;
            point.id = get_string(p, "id", path);
            point.area_code = get_string(p, "areaCode", path);
            point.description = opt_string(p, "description", path);
            point.impact = checked_opt_int(p, "impact", path);
            point.effort = checked_opt_int(p, "effort", path);
            auto status = opt_string(p, "status", path, "proposed");
            auto parsed = parse_point_status(status);
            if (!parsed) throw Error(errc::parse_error, path + ".status \"" + status + "\" is not a point status", path);
            point.status = *parsed;
            a.improvement_points.push_back(std::move(point));
        }
    }

    if (auto it = doc.find("questionBindings"); it != doc.end() && !it->is_null()) {
        if (!it->is_array()) throw Error(errc::parse_error, "questionBindings must be an array", "questionBindings");
        for (std::size_t i = 0; i < it->size(); ++i) {
            std::string path = "questionBindings[" + std::to_string(i) + "]";
            const auto& b = (*it)[i];
            a.bindings.push_back({get_string(b, "questionId", path), get_string(b, "areaCode", path),
                                  required_phase(b, "phase", path)});
        }
    }
    if (auto it = doc.find("areaPhases"); it != doc.end() && it->is_object()) {
        for (const auto& [code, phase] : it->items()) {
            if (!phase.is_string()) throw Error(errc::parse_error, "areaPhases." + code + " must be a phase name");
            auto p = parse_phase(phase.get<std::string>());
            if (!p) throw Error(errc::parse_error, "areaPhases." + code + " is not a DevOps phase");
            a.area_phases[code] = *p;
        }
    }
    if (auto it = doc.find("accessTokens"); it != doc.end() && it->is_object()) {
        for (const auto& [token, role] : it->items()) {
            if (!role.is_string()) throw Error(errc::parse_error, "accessTokens values must be strings");
            a.access_tokens[token] = role.get<std::string>();
        }
    }
    a.created_at = opt_string(doc, "createdAt", "assessment");
    a.closed_at = maybe_string(doc, "closedAt", "assessment");
    return a;
}

// ---------------------------------------------------------------------------
// Validation

ValidationReport validate_assessment(const Assessment& a) {
    ValidationReport r;
    auto err = [&](std::string ref, std::string rule, std::string msg) {
        r.errors.push_back({std::move(ref), std::move(rule), std::move(msg)});
    };

    if (a.id.empty()) err("assessment", "assessment-id", "assessment id is empty");
    if (a.roster.empty()) err("assessment", "non-empty-roster", "roster is empty");

    auto expected = standard_sessions();
    if (a.sessions.size() != expected.size()) {
        err("assessment", "session-structure", "expected 6 sessions, found " + std::to_string(a.sessions.size()));
    } else {
        int open = 0;
        for (std::size_t i = 0; i < expected.size(); ++i) {
            const auto& s = a.sessions[i];
            const auto& e = expected[i];
            if (s.index != e.index || s.kind != e.kind || s.phases != e.phases || s.planned_minutes != e.planned_minutes) {
                err("session/" + std::to_string(i + 1), "session-structure",
                    "session does not match the standard six-session workflow");
            }
            if (s.state == SessionState::Open) ++open;
        }
        if (open > 1) err("assessment", "single-open-session", std::to_string(open) + " sessions are open at once");
        bool all_closed = std::all_of(a.sessions.begin(), a.sessions.end(),
                                      [](const EvaluationSession& s) { return s.state == SessionState::Closed; });
        if (a.closed_at && !all_closed) err("assessment", "closed-at", "closedAt is set while sessions remain open");
    }

    std::set<std::string> ids;
    for (const auto& p : a.roster) {
        if (!ids.insert(p.id).second) err("roster/" + p.id, "unique-respondent-id", "respondent id repeats");
    }

    for (const auto& b : a.bindings) {
        auto it = a.area_phases.find(b.area_code);
        if (it == a.area_phases.end()) {
            err("questions/" + b.question_id, "binding-area-resolves", "area " + b.area_code + " is not captured");
        } else if (it->second != b.phase) {
            err("questions/" + b.question_id, "binding-phase", "question phase differs from area phase");
        }
    }

    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& resp : a.responses) {
        std::string ref = "responses/" + resp.question_id + "/" + resp.respondent_id;
        if (!pairs.insert({resp.question_id, resp.respondent_id}).second) {
            err(ref, "single-response-per-pair", "more than one response for this question and respondent");
        }
        if (!a.find_binding(resp.question_id)) err(ref, "response-question-resolves", "unknown question");
        if (!a.find_respondent(resp.respondent_id)) err(ref, "response-respondent-resolves", "unknown respondent");
        if (resp.current < kMinRating || resp.current > kMaxRating) err(ref, "rating-range", "current rating outside 0-5");
        if (resp.target && (*resp.target < kMinRating || *resp.target > kMaxRating)) {
            err(ref, "rating-range", "target rating outside 0-5");
        }
    }

    ids.clear();
    auto in_range = [](const std::optional<int>& v) { return !v || (*v >= kMinImpactEffort && *v <= kMaxImpactEffort); };
    for (const auto& p : a.improvement_points) {
        std::string ref = "improvement-points/" + p.id;
        if (!ids.insert(p.id).second) err(ref, "unique-point-id", "improvement point id repeats");
        if (!a.area_phases.count(p.area_code)) err(ref, "point-area-resolves", "area " + p.area_code + " does not resolve");
        if (!in_range(p.impact) || !in_range(p.effort)) err(ref, "impact-effort-range", "impact/effort outside 1-10");
        if (p.status != PointStatus::Proposed && (!p.impact || !p.effort)) {
            err(ref, "prioritized-needs-impact-effort", "status beyond proposed requires impact and effort");
        }
    }
    r.sort();
    return r;
}

// ---------------------------------------------------------------------------
// Workflow

namespace {

EvaluationSession& session_mut(Assessment& a, int index) {
    a.session(index);  // range check
    return a.sessions[static_cast<std::size_t>(index - 1)];
}

std::string session_ref(int index) { return "session/" + std::to_string(index); }

void require_open(const EvaluationSession& s) {
    if (s.state != SessionState::Open) {
        throw Error(errc::session_not_open,
                    "session " + std::to_string(s.index) + " is " + std::string(session_state_name(s.state)),
                    session_ref(s.index));
    }
}

void check_rating(int value, const char* what, const std::string& ref) {
    if (value < kMinRating || value > kMaxRating) {
        throw Error(errc::rating_out_of_range,
                    std::string(what) + " rating " + std::to_string(value) + " is outside 0 (Sit) to 5 (Fly)", ref);
    }
}

void check_impact_effort(const std::optional<int>& v, const char* what, const std::string& ref) {
    if (v && (*v < kMinImpactEffort || *v > kMaxImpactEffort)) {
        throw Error(errc::value_out_of_range, std::string(what) + " " + std::to_string(*v) + " is outside 1-10", ref);
    }
}

}  // namespace

Assessment create_assessment(const Catalogue& c, const Questionnaire& q, std::vector<Respondent> roster,
                             std::string id, AssessmentOptions options, std::string created_at) {
    if (roster.empty()) throw Error(errc::empty_roster, "an assessment needs at least one respondent");
    if (q.catalogue_id != c.id) {
        throw Error(errc::catalogue_mismatch,
                    "questionnaire " + q.id + " is bound to catalogue " + q.catalogue_id + ", not " + c.id,
                    "questionnaire/" + q.id);
    }
    auto creport = validate_catalogue(c);
    if (!creport.ok()) {
        throw Error(errc::validation_failed, "catalogue " + c.id + " has " + std::to_string(creport.errors.size()) +
                                                 " validation error(s)", "catalogue/" + c.id);
    }
    auto qreport = validate_questionnaire(q, c);
    if (!qreport.ok()) {
        const auto& f = qreport.errors.front();
        throw Error(f.rule_id == "catalogue-id" ? errc::catalogue_mismatch : errc::validation_failed,
                    "questionnaire " + q.id + ": " + f.message, f.entity_ref);
    }

    Assessment a;
    a.id = std::move(id);
    a.catalogue_id = c.id;
    a.questionnaire_id = q.id;
    a.options = options;
    a.roster = std::move(roster);
    a.sessions = standard_sessions();
    for (const auto& question : q.questions) a.bindings.push_back({question.id, question.area_code, question.phase});
    for (const auto& area : c.areas) a.area_phases[area.code] = area.phase;
    a.created_at = created_at.empty() ? io::utc_timestamp() : std::move(created_at);

    auto report = validate_assessment(a);
    if (!report.ok()) {
        const auto& f = report.errors.front();
        throw Error(errc::validation_failed, f.message, f.entity_ref);
    }
    return a;
}

void open_session(Assessment& a, int index) {
    EvaluationSession& s = session_mut(a, index);
    for (const auto& other : a.sessions) {
        if (other.index != index && other.state == SessionState::Open) {
            throw Error(errc::session_still_open,
                        "session-" + std::to_string(other.index) + "-still-open: close session " +
                            std::to_string(other.index) + " before opening session " + std::to_string(index),
                        session_ref(other.index));
        }
    }
    if (s.state != SessionState::Planned) {
        throw Error(errc::session_not_planned,
                    "session " + std::to_string(index) + " is already " + std::string(session_state_name(s.state)),
                    session_ref(index));
    }
    if (a.options.strict_order) {
        for (const auto& earlier : a.sessions) {
            if (earlier.index < index && earlier.state != SessionState::Closed) {
                throw Error(errc::out_of_order,
                            "session " + std::to_string(index) + " cannot open before session " +
                                std::to_string(earlier.index) + " is closed",
                            session_ref(index));
            }
        }
    }
    s.state = SessionState::Open;
}

void close_session(Assessment& a, int index, std::string closed_at) {
    EvaluationSession& s = session_mut(a, index);
    require_open(s);
    s.state = SessionState::Closed;
    bool all_closed = std::all_of(a.sessions.begin(), a.sessions.end(),
                                  [](const EvaluationSession& x) { return x.state == SessionState::Closed; });
    if (all_closed) a.closed_at = closed_at.empty() ? io::utc_timestamp() : std::move(closed_at);
}

void record_response(Assessment& a, int session_index, Response response) {
    const EvaluationSession& s = a.session(session_index);
    require_open(s);
    std::string ref = "responses/" + response.question_id + "/" + response.respondent_id;
    if (s.kind != SessionKind::Evaluation) {
        throw Error(errc::wrong_session_kind,
                    "responses are recorded in evaluation sessions; session " + std::to_string(s.index) + " is a summary",
                    session_ref(s.index));
    }
    const QuestionBinding* b = a.find_binding(response.question_id);
    if (!b) throw Error(errc::unknown_question, "question " + response.question_id + " is not in the questionnaire", ref);
    if (std::find(s.phases.begin(), s.phases.end(), b->phase) == s.phases.end()) {
        throw Error(errc::question_outside_session,
                    "question " + b->question_id + " belongs to phase " + std::string(phase_name(b->phase)) +
                        ", not covered by session " + std::to_string(s.index),
                    ref);
    }
    if (!a.find_respondent(response.respondent_id)) {
        throw Error(errc::unknown_respondent, "respondent " + response.respondent_id + " is not on the roster", ref);
    }
    check_rating(response.current, "current", ref);
    if (a.options.collect_targets) {
        if (!response.target) throw Error(errc::missing_target, "target rating is required", ref);
        check_rating(*response.target, "target", ref);
    } else if (response.target) {
        throw Error(errc::wrong_session_kind, "target ratings are deferred to summary sessions", ref);
    }

    auto it = std::find_if(a.responses.begin(), a.responses.end(), [&](const Response& r) {
        return r.question_id == response.question_id && r.respondent_id == response.respondent_id;
    });
    if (it != a.responses.end()) {
        *it = std::move(response);
    } else {
        a.responses.push_back(std::move(response));
    }
}

void set_target(Assessment& a, int session_index, std::string_view question_id, std::string_view respondent_id,
                int target) {
    const EvaluationSession& s = a.session(session_index);
    require_open(s);
    std::string ref = "responses/" + std::string(question_id) + "/" + std::string(respondent_id);
    if (s.kind != SessionKind::Summary) {
        throw Error(errc::wrong_session_kind, "deferred targets are set in summary sessions", session_ref(s.index));
    }
    check_rating(target, "target", ref);
    auto it = std::find_if(a.responses.begin(), a.responses.end(), [&](const Response& r) {
        return r.question_id == question_id && r.respondent_id == respondent_id;
    });
    if (it == a.responses.end()) throw Error(errc::not_found, "no current rating recorded yet", ref);
    it->target = target;
}

std::string record_improvement_point(Assessment& a, int session_index, ImprovementPoint point) {
    const EvaluationSession& s = a.session(session_index);
    require_open(s);
    if (point.id.empty()) {
        int n = static_cast<int>(a.improvement_points.size()) + 1;
        while (a.find_point("IP-" + std::to_string(n))) ++n;
        point.id = "IP-" + std::to_string(n);
    }
    std::string ref = "improvement-points/" + point.id;
    if (!a.area_phases.count(point.area_code)) {
        throw Error(errc::unknown_area, "practice area " + point.area_code + " is not in the catalogue", ref);
    }
    check_impact_effort(point.impact, "impact", ref);
    check_impact_effort(point.effort, "effort", ref);

    const ImprovementPoint* existing = a.find_point(point.id);
    if (s.kind == SessionKind::Evaluation) {
        bool scoring_changed = existing ? (point.impact != existing->impact || point.effort != existing->effort ||
                                           point.status != existing->status)
                                        : (point.impact || point.effort || point.status != PointStatus::Proposed);
        if (scoring_changed) {
            throw Error(errc::wrong_session_kind,
                        "impact, effort and status are set in summary sessions; evaluation sessions only propose points",
                        ref);
        }
    }
    if (point.status != PointStatus::Proposed && (!point.impact || !point.effort)) {
        throw Error(errc::missing_impact_effort,
                    "point " + point.id + " needs impact and effort before it can be " +
                        std::string(point_status_name(point.status)),
                    ref);
    }

    std::string id = point.id;
    if (existing) {
        auto idx = static_cast<std::size_t>(existing - a.improvement_points.data());
        a.improvement_points[idx] = std::move(point);
    } else {
        a.improvement_points.push_back(std::move(point));
    }
    return id;
}

// ---------------------------------------------------------------------------
// Scoring

std::string_view rater_filter_name(RaterFilter f) noexcept {
    switch (f) {
        case RaterFilter::All: return "all";
        case RaterFilter::SecurityOnly: return "sec";
        case RaterFilter::NonSecurityOnly: return "nonsec";
    }
    return "all";
}

std::optional<RaterFilter> parse_rater_filter(std::string_view s) noexcept {
    if (s == "all") return RaterFilter::All;
    if (s == "sec" || s == "securityOnly") return RaterFilter::SecurityOnly;
    if (s == "nonsec" || s == "nonSecurityOnly") return RaterFilter::NonSecurityOnly;
    return std::nullopt;
}

namespace {

struct Accumulator {
    double current_sum = 0.0;
    int current_n = 0;
    double target_sum = 0.0;
    int target_n = 0;
    int samples = 0;

    void add(double current, std::optional<double> target, int weight) {
        current_sum += current;
        ++current_n;
        if (target) {
            target_sum += *target;
            ++target_n;
        }
        samples += weight;
    }

    ScoreEntry entry() const {
        ScoreEntry e;
        e.current_mean = current_sum / current_n;
        if (target_n > 0) e.target_mean = target_sum / target_n;
        e.sample_size = samples;
        return e;
    }
};

bool matches(const Respondent& r, RaterFilter f) {
    switch (f) {
        case RaterFilter::All: return true;
        case RaterFilter::SecurityOnly: return r.is_security_professional;
        case RaterFilter::NonSecurityOnly: return !r.is_security_professional;
    }
    return true;
}

json entry_json(const ScoreEntry& e) {
    return {{"currentMean", e.current_mean},
            {"targetMean", e.target_mean ? json(*e.target_mean) : json(nullptr)},
            {"sampleSize", e.sample_size}};
}

}  // namespace

ScoreTable compute_scores(const Assessment& a, RaterFilter filter) {
    std::map<std::string, Accumulator, CodeLess> areas;
    for (const auto& resp : a.responses) {
        const Respondent* who = a.find_respondent(resp.respondent_id);
        const QuestionBinding* b = a.find_binding(resp.question_id);
        if (!who || !b || !matches(*who, filter)) continue;
        areas[b->area_code].add(resp.current,
                                resp.target ? std::optional<double>(*resp.target) : std::nullopt, 1);
    }
    if (areas.empty()) {
        throw Error(errc::no_matching_responses,
                    "no responses match filter " + std::string(rater_filter_name(filter)), "assessment/" + a.id);
    }

    ScoreTable t;
    t.filter = filter;
    std::map<Phase, Accumulator> phases;
    for (const auto& [code, acc] : areas) {
        ScoreEntry e = acc.entry();
        t.per_area[code] = e;
        auto it = a.area_phases.find(code);
        Phase p = it != a.area_phases.end() ? it->second : Phase::Plan;
        if (it == a.area_phases.end()) {
            for (const auto& b : a.bindings) {
                if (b.area_code == code) p = b.phase;
            }
        }
        phases[p].add(e.current_mean, e.target_mean, e.sample_size);
    }
    Accumulator life;
    for (const auto& [p, acc] : phases) {
        ScoreEntry e = acc.entry();
        t.per_phase[p] = e;
        life.add(e.current_mean, e.target_mean, e.sample_size);
    }
    t.lifecycle = life.entry();
    return t;
}

json to_json(const ScoreTable& t) {
    json areas = json::object();
    json area_order = json::array();
    for (const auto& [code, e] : t.per_area) {
        areas[code] = entry_json(e);
        area_order.push_back(code);
    }
    json phases = json::array();
    for (const auto& [p, e] : t.per_phase) {
        json j = entry_json(e);
        j["phase"] = std::string(phase_name(p));
        phases.push_back(std::move(j));
    }
    return {{"filter", std::string(rater_filter_name(t.filter))},
            {"perArea", std::move(areas)},
            {"areaOrder", std::move(area_order)},
            {"perPhase", std::move(phases)},
            {"lifecycle", entry_json(t.lifecycle)}};
}

GroupComparison compare_rater_groups(const Assessment& a) {
    GroupComparison g;
    g.security = compute_scores(a, RaterFilter::SecurityOnly);
    g.non_security = compute_scores(a, RaterFilter::NonSecurityOnly);

    std::set<std::string, CodeLess> all;
    for (const auto& [code, e] : g.security.per_area) all.insert(code);
    for (const auto& [code, e] : g.non_security.per_area) all.insert(code);

    double sum = 0.0;
    for (const auto& code : all) {
        auto s = g.security.per_area.find(code);
        auto n = g.non_security.per_area.find(code);
        if (s == g.security.per_area.end() || n == g.non_security.per_area.end()) {
            g.excluded_areas.push_back(code);
            continue;
        }
        g.shared_areas.push_back(code);
        sum += std::fabs(s->second.current_mean - n->second.current_mean);
    }
    if (g.shared_areas.empty()) {
        throw Error(errc::no_data, "security and non-security respondents rated no common practice area",
                    "assessment/" + a.id);
    }
    g.mean_absolute_difference = sum / static_cast<double>(g.shared_areas.size());
    return g;
}

json to_json(const GroupComparison& g) {
    return {{"security", to_json(g.security)},
            {"nonSecurity", to_json(g.non_security)},
            {"meanAbsoluteDifference", g.mean_absolute_difference},
            {"sharedAreas", g.shared_areas},
            {"excludedAreas", g.excluded_areas}};
}

std::string responses_to_csv(const Assessment& a) {
    std::string out = csv::format_row({"questionId", "respondentId", "isSecurityProfessional", "current", "target"});
    for (const auto& r : a.responses) {
        const Respondent* who = a.find_respondent(r.respondent_id);
        out += csv::format_row({r.question_id, r.respondent_id,
                                who && who->is_security_professional ? "true" : "false", std::to_string(r.current),
                                r.target ? std::to_string(*r.target) : std::string()});
    }
    return out;
}

}  // namespace refa
