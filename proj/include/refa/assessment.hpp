#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "refa/catalogue.hpp"
#include "refa/maturity.hpp"
#include "refa/questionnaire.hpp"

namespace refa {

struct Respondent {
    std::string id;
    std::string display_name;
    std::string role;
    bool is_security_professional = false;
    bool operator==(const Respondent&) const = default;
};

struct Response {
    std::string question_id;
    std::string respondent_id;
    int current = 0;
    std::optional<int> target;
    std::string notes;
    std::vector<std::string> evidence_refs;
    bool operator==(const Response&) const = default;
};

enum class PointStatus { Proposed, Prioritized, Planned };

std::string_view point_status_name(PointStatus s) noexcept;
std::optional<PointStatus> parse_point_status(std::string_view s) noexcept;

inline constexpr int kMinImpactEffort = 1;
inline constexpr int kMaxImpactEffort = 10;

struct ImprovementPoint {
    std::string id;
    std::string area_code;
    std::string description;
    std::optional<int> impact;
    std::optional<int> effort;
    PointStatus status = PointStatus::Proposed;
    bool operator==(const ImprovementPoint&) const = default;
};

enum class SessionKind { Evaluation, Summary };
enum class SessionState { Planned, Open, Closed };

std::string_view session_kind_name(SessionKind k) noexcept;
std::string_view session_state_name(SessionState s) noexcept;

struct EvaluationSession {
    int index = 1;
    SessionKind kind = SessionKind::Evaluation;
    std::vector<Phase> phases;
    int planned_minutes = 0;
    SessionState state = SessionState::Planned;
    bool operator==(const EvaluationSession&) const = default;
};

inline constexpr int kSessionCount = 6;
inline constexpr int kEvaluationMinutes = 120;
inline constexpr int kSummaryMinutes = 90;

/// Sessions 1-4 evaluate phase pairs (Plan,Code) (Build,Test) (Release,Deploy)
/// (Operate,Monitor) for 120 minutes each; 5-6 are 90-minute summaries.
std::vector<EvaluationSession> standard_sessions();

/// Where a question sits in the catalogue, captured when the assessment is
/// created so records can be scored without the source files.
struct QuestionBinding {
    std::string question_id;
    std::string area_code;
    Phase phase = Phase::Plan;
    bool operator==(const QuestionBinding&) const = default;
};

struct AssessmentOptions {
    bool strict_order = true;     // sessions open in ascending index order
    bool collect_targets = true;  // false defers target ratings to summary sessions
    bool operator==(const AssessmentOptions&) const = default;
};

struct Assessment {
    std::string id;
    std::string catalogue_id;
    std::string questionnaire_id;
    AssessmentOptions options;
    std::vector<Respondent> roster;
    std::vector<EvaluationSession> sessions;
    std::vector<Response> responses;  // at most one per (question, respondent)
    std::vector<ImprovementPoint> improvement_points;
    std::vector<QuestionBinding> bindings;
    std::map<std::string, Phase> area_phases;
    std::map<std::string, std::string> access_tokens;  // token -> role
    std::string created_at;
    std::optional<std::string> closed_at;

    const Respondent* find_respondent(std::string_view id) const;
    const QuestionBinding* find_binding(std::string_view question_id) const;
    const ImprovementPoint* find_point(std::string_view id) const;
    const EvaluationSession& session(int index) const;
    bool operator==(const Assessment&) const = default;
};

nlohmann::json assessment_to_json(const Assessment& a);
Assessment assessment_from_json(const nlohmann::json& j);

/// Intrinsic invariants only (sessions, ratings, ids, references into the
/// captured bindings).
ValidationReport validate_assessment(const Assessment& a);

Assessment create_assessment(const Catalogue& c, const Questionnaire& q, std::vector<Respondent> roster,
                             std::string id, AssessmentOptions options = {}, std::string created_at = {});

void open_session(Assessment& a, int index);
void close_session(Assessment& a, int index, std::string closed_at = {});

/// Stores the response, replacing any earlier one for the same
/// (question, respondent). Strong guarantee: `a` is untouched on error.
void record_response(Assessment& a, int session_index, Response response);

/// With collect_targets off, targets are set during an open summary session
/// on responses that already exist.
void set_target(Assessment& a, int session_index, std::string_view question_id, std::string_view respondent_id,
                int target);

/// Proposes or updates a point; returns its id (generated when empty).
/// Evaluation sessions may only propose; summary sessions set impact,
/// effort and status.
std::string record_improvement_point(Assessment& a, int session_index, ImprovementPoint point);

enum class RaterFilter { All, SecurityOnly, NonSecurityOnly };

std::string_view rater_filter_name(RaterFilter f) noexcept;
/// Accepts all|sec|nonsec and the long forms securityOnly|nonSecurityOnly.
std::optional<RaterFilter> parse_rater_filter(std::string_view s) noexcept;

struct ScoreEntry {
    double current_mean = 0.0;
    std::optional<double> target_mean;
    int sample_size = 0;
    bool operator==(const ScoreEntry&) const = default;
};

struct CodeLess {
    bool operator()(const std::string& a, const std::string& b) const { return code_less(a, b); }
};

struct ScoreTable {
    RaterFilter filter = RaterFilter::All;
    std::map<std::string, ScoreEntry, CodeLess> per_area;
    std::map<Phase, ScoreEntry> per_phase;
    ScoreEntry lifecycle;
};

nlohmann::json to_json(const ScoreTable& t);

/// Area means average the latest response per (question, respondent) over
/// the area's questions; phase means average area means; the lifecycle
/// averages phase means. Unweighted throughout, entries without data absent.
ScoreTable compute_scores(const Assessment& a, RaterFilter filter = RaterFilter::All);

struct GroupComparison {
    ScoreTable security;
    ScoreTable non_security;
    double mean_absolute_difference = 0.0;
    std::vector<std::string> shared_areas;
    std::vector<std::string> excluded_areas;  // scored by one group only
};

nlohmann::json to_json(const GroupComparison& g);

/// Mean over shared areas of |security current mean - non-security current mean|.
GroupComparison compare_rater_groups(const Assessment& a);

/// questionId,respondentId,isSecurityProfessional,current,target
std::string responses_to_csv(const Assessment& a);

}  // namespace refa
