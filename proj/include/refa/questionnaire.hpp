#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "refa/catalogue.hpp"

namespace refa {

struct Question {
    std::string id;
    std::string area_code;
    Phase phase = Phase::Plan;  // derived from the area
    std::string text;
    std::string assessor_guide;
    std::vector<std::string> evidence_artefacts;
    std::string source;  // "paper-excerpt" | "placeholder" | empty
    bool operator==(const Question&) const = default;
};

struct Questionnaire {
    std::string id;
    std::string catalogue_id;
    std::vector<Question> questions;

    const Question* find(std::string_view question_id) const;
    bool operator==(const Questionnaire&) const = default;
};

struct QuestionnaireLoadOptions {
    // Reorder into (phase ordinal, area code) groups when the file is unordered.
    bool normalize_order = true;
};

// `phase` in the document is optional; when absent it is left as Plan and
// resolved against a catalogue by load_questionnaire / resolve_phases.
Questionnaire questionnaire_from_json(const nlohmann::json& j);
nlohmann::json questionnaire_to_json(const Questionnaire& q, bool include_guides = true);

/// Parses without reordering or throwing on catalogue problems: questions
/// with no phase in the document take their area's phase when it resolves,
/// so validate_questionnaire reports everything else as findings.
Questionnaire questionnaire_from_json(const nlohmann::json& j, const Catalogue& c);

/// Fills each question's phase from its area. Throws dangling-reference.
void resolve_phases(Questionnaire& q, const Catalogue& c);

/// Stable reorder by (phase ordinal, area code); true if anything moved.
bool normalize_order(Questionnaire& q);

/// Loads and resolves against `c`. Grouping fixes are appended to `notes`
/// (rule "phase-grouping") when given.
Questionnaire load_questionnaire(const std::filesystem::path& path, const Catalogue& c,
                                 QuestionnaireLoadOptions options = {}, std::vector<Finding>* notes = nullptr);

/// One row per question: id, areaCode, text, guide, evidence codes joined by ';'.
/// A leading header row whose first cell is "id" is skipped.
Questionnaire questionnaire_from_csv(std::string_view csv_text, std::string id, const Catalogue& c,
                                     QuestionnaireLoadOptions options = {}, std::vector<Finding>* notes = nullptr);
std::string questionnaire_to_csv(const Questionnaire& q);

std::vector<Question> questions_for_phases(const Questionnaire& q, const std::set<Phase>& phases);

ValidationReport validate_questionnaire(const Questionnaire& q, const Catalogue& c);

/// Checks that need no catalogue: unique ids and phase grouping.
ValidationReport validate_questionnaire_shape(const Questionnaire& q);

}  // namespace refa
