#include "refa/questionnaire.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <tuple>

#include "json_fields.hpp"
#include "refa/csv.hpp"
#include "refa/error.hpp"
#include "refa/io.hpp"

namespace refa {

using nlohmann::json;

const Question* Questionnaire::find(std::string_view question_id) const {
    auto it = std::find_if(questions.begin(), questions.end(), [&](const Question& q) { return q.id == question_id; });
    return it == questions.end() ? nullptr : &*it;
}

Questionnaire questionnaire_from_json(const json& doc) {
    using namespace detail;
    if (!doc.is_object()) throw Error(errc::parse_error, "questionnaire document must be an object");
    Questionnaire q;
    q.id = get_string(doc, "id", "questionnaire");
    q.catalogue_id = get_string(doc, "catalogueId", "questionnaire");
    const auto& qs = get_array(doc, "questions", "questionnaire");
    for (std::size_t i = 0; i < qs.size(); ++i) {
        std::string path = "questions[" + std::to_string(i) + "]";
        const auto& j = qs[i];
        Question question;
        question.id = get_string(j, "id", path);
        question.area_code = get_string(j, "areaCode", path);
        if (auto p = maybe_string(j, "phase", path)) {
            auto phase = parse_phase(*p);
            if (!phase) throw Error(errc::parse_error, path + ".phase \"" + *p + "\" is not a DevOps phase", path);
            question.phase = *phase;
        }
        question.text = opt_string(j, "text", path);
        question.assessor_guide = opt_string(j, "assessorGuide", path);
        if (auto it = j.find("evidenceArtefacts"); it != j.end() && !it->is_null()) {
            if (!it->is_array()) throw Error(errc::parse_error, path + ".evidenceArtefacts must be an array", path);
            for (const auto& code : *it) {
                if (!code.is_string()) throw Error(errc::parse_error, path + ".evidenceArtefacts entries must be strings", path);
                question.evidence_artefacts.push_back(code.get<std::string>());
            }
        }
        question.source = opt_string(j, "source", path);
        q.questions.push_back(std::move(question));
    }
    return q;
}

json questionnaire_to_json(const Questionnaire& q, bool include_guides) {
    json questions = json::array();
    for (const auto& question : q.questions) {
        json j = {{"id", question.id},
                  {"areaCode", question.area_code},
                  {"phase", std::string(phase_name(question.phase))},
                  {"text", question.text},
                  {"evidenceArtefacts", question.evidence_artefacts}};
        if (include_guides) j["assessorGuide"] = question.assessor_guide;
        if (!question.source.empty()) j["source"] = question.source;
        questions.push_back(std::move(j));
    }
    return {{"id", q.id}, {"catalogueId", q.catalogue_id}, {"questions", std::move(questions)}};
}

void resolve_phases(Questionnaire& q, const Catalogue& c) {
    for (auto& question : q.questions) {
        const PracticeArea* area = c.find_area(question.area_code);
        if (!area) {
            throw Error(errc::dangling_reference,
                        "question " + question.id + " references unknown area " + question.area_code,
                        "questions/" + question.id);
        }
        question.phase = area->phase;
    }
}

namespace {

auto group_key(const Question& q) {
    auto parts = parse_area_code(q.area_code);
    return std::make_tuple(phase_ordinal(q.phase), parts ? parts->tag : q.area_code, parts ? parts->index : 0);
}

void check_references(const Questionnaire& q, const Catalogue& c) {
    if (q.catalogue_id != c.id) {
        throw Error(errc::catalogue_mismatch,
                    "questionnaire " + q.id + " is bound to catalogue " + q.catalogue_id + ", not " + c.id,
                    "questionnaire/" + q.id);
    }
    for (const auto& question : q.questions) {
        for (const auto& code : question.evidence_artefacts) {
            if (!c.find_artefact(code)) {
                throw Error(errc::dangling_reference,
                            "question " + question.id + " cites unknown artefact " + code, "questions/" + question.id);
            }
        }
    }
    auto shape = validate_questionnaire_shape(q);
    if (!shape.ok()) {
        const auto& f = shape.errors.front();
        throw Error(errc::validation_failed, f.entity_ref + " [" + f.rule_id + "] " + f.message, f.entity_ref);
    }
}

Questionnaire finish_load(Questionnaire q, const Catalogue& c, QuestionnaireLoadOptions options,
                          std::vector<Finding>* notes) {
    resolve_phases(q, c);
    check_references(q, c);
    if (options.normalize_order) {
        if (normalize_order(q) && notes) {
            notes->push_back({"questionnaire/" + q.id, "phase-grouping",
                              "questions were reordered by DevOps phase and practice area"});
        }
    } else if (notes) {
        auto shape = validate_questionnaire_shape(q);
        notes->insert(notes->end(), shape.warnings.begin(), shape.warnings.end());
    }
    return q;
}

}  // namespace

bool normalize_order(Questionnaire& q) {
    auto before = q.questions;
    std::stable_sort(q.questions.begin(), q.questions.end(),
                     [](const Question& a, const Question& b) { return group_key(a) < group_key(b); });
    return before != q.questions;
}

Questionnaire questionnaire_from_json(const json& doc, const Catalogue& c) {
    Questionnaire q = questionnaire_from_json(doc);
    for (std::size_t i = 0; i < q.questions.size(); ++i) {
        const PracticeArea* area = c.find_area(q.questions[i].area_code);
        if (area && !doc["questions"][i].contains("phase")) q.questions[i].phase = area->phase;
    }
    return q;
}

Questionnaire load_questionnaire(const std::filesystem::path& path, const Catalogue& c,
                                 QuestionnaireLoadOptions options, std::vector<Finding>* notes) {
    json doc = io::read_json_file(path);
    Questionnaire q = questionnaire_from_json(doc);
    // A phase written in the file must agree with the area's phase.
    for (std::size_t i = 0; i < q.questions.size(); ++i) {
        const auto& j = doc["questions"][i];
        const PracticeArea* area = c.find_area(q.questions[i].area_code);
        if (area && j.contains("phase") && j["phase"].is_string() && q.questions[i].phase != area->phase) {
            throw Error(errc::validation_failed,
                        "question " + q.questions[i].id + " declares phase " + j["phase"].get<std::string>() +
                            " but area " + area->code + " belongs to " + std::string(phase_name(area->phase)),
                        "questions/" + q.questions[i].id);
        }
    }
    return finish_load(std::move(q), c, options, notes);
}

Questionnaire questionnaire_from_csv(std::string_view csv_text, std::string id, const Catalogue& c,
                                     QuestionnaireLoadOptions options, std::vector<Finding>* notes) {
    auto rows = csv::parse(csv_text);
    Questionnaire q;
    q.id = std::move(id);
    q.catalogue_id = c.id;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (r == 0 && !row.empty() && row[0] == "id") continue;
        if (row.size() < 3) {
            throw Error(errc::parse_error, "CSV row " + std::to_string(r + 1) + " needs at least id, areaCode, text",
                        "row " + std::to_string(r + 1));
        }
        Question question;
        question.id = row[0];
        question.area_code = row[1];
        question.text = row[2];
        if (row.size() > 3) question.assessor_guide = row[3];
        if (row.size() > 4) {
            std::stringstream codes(row[4]);
            std::string code;
            while (std::getline(codes, code, ';')) {
                auto b = code.find_first_not_of(" \t");
                auto e = code.find_last_not_of(" \t");
                if (b != std::string::npos) question.evidence_artefacts.push_back(code.substr(b, e - b + 1));
            }
        }
        q.questions.push_back(std::move(question));
    }
    return finish_load(std::move(q), c, options, notes);
}

std::string questionnaire_to_csv(const Questionnaire& q) {
    std::string out = csv::format_row({"id", "areaCode", "text", "guide", "evidence"});
    for (const auto& question : q.questions) {
        std::string evidence;
        for (std::size_t i = 0; i < question.evidence_artefacts.size(); ++i) {
            if (i) evidence.push_back(';');
            evidence += question.evidence_artefacts[i];
        }
        out += csv::format_row({question.id, question.area_code, question.text, question.assessor_guide, evidence});
    }
    return out;
}

std::vector<Question> questions_for_phases(const Questionnaire& q, const std::set<Phase>& phases) {
    if (phases.empty()) throw Error(errc::bad_request, "phase set must not be empty");
    std::vector<Question> out;
    for (const auto& question : q.questions) {
        if (phases.count(question.phase)) out.push_back(question);
    }
    return out;
}

ValidationReport validate_questionnaire_shape(const Questionnaire& q) {
    ValidationReport r;
    std::map<std::string, int> counts;
    for (const auto& question : q.questions) ++counts[question.id];
    for (const auto& [id, n] : counts) {
        if (n > 1) {
            r.errors.push_back({"questions/" + id, "unique-question-id",
                                "question id " + id + " appears " + std::to_string(n) + " times"});
        }
    }
    for (std::size_t i = 1; i < q.questions.size(); ++i) {
        const auto& prev = q.questions[i - 1];
        const auto& cur = q.questions[i];
        if (group_key(cur) < group_key(prev)) {
            r.warnings.push_back({"questions/" + cur.id, "phase-grouping",
                                  "question " + cur.id + " (" + std::string(phase_name(cur.phase)) + ", " +
                                      cur.area_code + ") follows " + prev.id + " (" +
                                      std::string(phase_name(prev.phase)) + ", " + prev.area_code + ")"});
        }
    }
    r.sort();
    return r;
}

ValidationReport validate_questionnaire(const Questionnaire& q, const Catalogue& c) {
    ValidationReport r = validate_questionnaire_shape(q);
    if (q.catalogue_id != c.id) {
        r.errors.push_back({"questionnaire/" + q.id, "catalogue-id",
                            "bound to catalogue " + q.catalogue_id + " but validated against " + c.id});
    }
    for (const auto& question : q.questions) {
        std::string ref = "questions/" + question.id;
        const PracticeArea* area = c.find_area(question.area_code);
        if (!area) {
            r.errors.push_back({ref, "question-area-resolves", "area " + question.area_code + " does not resolve"});
        } else if (area->phase != question.phase) {
            r.errors.push_back({ref, "question-phase-consistency",
                                "question phase " + std::string(phase_name(question.phase)) + " differs from area phase " +
                                    std::string(phase_name(area->phase))});
        }
        for (const auto& code : question.evidence_artefacts) {
            if (!c.find_artefact(code)) {
                r.errors.push_back({ref, "evidence-artefact-resolves", "evidence artefact " + code + " does not resolve"});
            }
        }
    }
    r.sort();
    return r;
}

}  // namespace refa
