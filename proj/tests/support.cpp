#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <unistd.h>

#include "refa/error.hpp"

namespace refa::test {

namespace fs = std::filesystem;

const Catalogue& seed_catalogue() {
    static const Catalogue c = load_catalogue(seed_catalogue_path());
    return c;
}

const Questionnaire& seed_questionnaire() {
    static const Questionnaire q = load_questionnaire(seed_questionnaire_path(), seed_catalogue());
    return q;
}

TempDir::TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("refa-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1)));
    fs::remove_all(path_);
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

Catalogue make_catalogue(const std::vector<std::string>& area_codes, std::string id) {
    Catalogue c;
    c.id = std::move(id);
    c.version = "1";
    c.phases = canonical_phases();
    for (const auto& code : area_codes) {
        auto parts = parse_area_code(code);
        if (!parts) throw std::invalid_argument("bad area code " + code);
        PracticeArea a;
        a.code = code;
        a.name = "Area " + code;
        a.phase = *phase_for_tag(parts->tag);
        c.areas.push_back(a);
    }
    return c;
}

Questionnaire make_questionnaire(const Catalogue& c, const std::vector<std::pair<std::string, std::string>>& questions,
                                 std::string id) {
    Questionnaire q;
    q.id = std::move(id);
    q.catalogue_id = c.id;
    for (const auto& [qid, area] : questions) {
        Question question;
        question.id = qid;
        question.area_code = area;
        question.text = "Question " + qid;
        question.assessor_guide = "Guide " + qid;
        q.questions.push_back(question);
    }
    resolve_phases(q, c);
    return q;
}

Assessment make_assessment(const std::vector<std::string>& area_codes) {
    Catalogue c = make_catalogue(area_codes);
    std::vector<std::pair<std::string, std::string>> qs;
    for (const auto& code : area_codes) qs.emplace_back("Q-" + code, code);
    Questionnaire q = make_questionnaire(c, qs);
    std::vector<Respondent> roster = {
        {"s1", "Sec One", "security", true},
        {"s2", "Sec Two", "security", true},
        {"n1", "Dev One", "developer", false},
        {"n2", "Dev Two", "operations", false},
    };
    AssessmentOptions options;
    options.strict_order = false;
    return create_assessment(c, q, roster, "asm-test", options, "2024-01-01T00:00:00.000Z");
}

void put_response(Assessment& a, const std::string& question, const std::string& respondent, int current,
                  std::optional<int> target) {
    for (auto& r : a.responses) {
        if (r.question_id == question && r.respondent_id == respondent) {
            r.current = current;
            r.target = target;
            return;
        }
    }
    Response r;
    r.question_id = question;
    r.respondent_id = respondent;
    r.current = current;
    r.target = target;
    a.responses.push_back(r);
}

namespace {

const char* tag_for(Phase p, std::mt19937_64& rng) {
    switch (p) {
        case Phase::Plan: return rng() % 2 ? "PP" : "P";
        case Phase::Code: return "C";
        case Phase::Build: return "B";
        case Phase::Test: return "T";
        case Phase::Release: return "R";
        case Phase::Deploy: return "D";
        case Phase::Operate: return "O";
        case Phase::Monitor: return "M";
    }
    return "C";
}

int uniform(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

bool chance(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

std::string random_text(std::mt19937_64& rng) {
    static const std::vector<std::string> pieces = {
        "pipeline", "SAST", "review", "\"quoted\"", "comma, separated", "line\nbreak", "ümlaut", "<tag>",
        "&amp;", "tab\there", "backslash\\", "SBOM", "",
    };
    std::string out;
    int n = uniform(rng, 0, 4);
    for (int i = 0; i < n; ++i) {
        if (i) out += ' ';
        out += pieces[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(pieces.size()) - 1))];
    }
    return out;
}

void add_accumulated(OracleEntry& e, double current, std::optional<double> target, int samples,
                     std::vector<double>& currents, std::vector<double>& targets) {
    currents.push_back(current);
    if (target) targets.push_back(*target);
    e.samples += samples;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

GeneratedAssessment random_assessment(std::mt19937_64& rng, GeneratorLimits limits) {
    GeneratedAssessment g;
    int n_areas = uniform(rng, 1, limits.max_areas);
    std::vector<std::string> codes;
    std::set<std::string> used;
    while (static_cast<int>(codes.size()) < n_areas) {
        Phase p = *phase_from_ordinal(uniform(rng, 0, 7));
        std::string code = std::string("A-") + tag_for(p, rng) + std::to_string(uniform(rng, 1, 12));
        if (!used.insert(code).second) continue;
        codes.push_back(code);
        g.area_phase[code] = p;
    }
    Catalogue c = make_catalogue(codes, "cat-gen");

    int n_questions = uniform(rng, 1, limits.max_questions);
    std::vector<std::pair<std::string, std::string>> qs;
    for (int i = 0; i < n_questions; ++i) {
        const std::string& area = codes[static_cast<std::size_t>(uniform(rng, 0, n_areas - 1))];
        std::string qid = "Q" + std::to_string(i + 1);
        qs.emplace_back(qid, area);
        g.question_area[qid] = area;
    }
    Questionnaire q = make_questionnaire(c, qs, "q-gen");

    int n_respondents = uniform(rng, 1, limits.max_respondents);
    std::vector<Respondent> roster;
    for (int i = 0; i < n_respondents; ++i) {
        Respondent r;
        r.id = "R" + std::to_string(i + 1);
        r.is_security_professional = chance(rng, 0.5);
        g.respondent_is_security[r.id] = r.is_security_professional;
        roster.push_back(r);
    }
    AssessmentOptions options;
    options.strict_order = false;
    g.assessment = create_assessment(c, q, roster, "asm-gen", options, "2024-01-01T00:00:00.000Z");

    for (const auto& [qid, area] : g.question_area) {
        for (const auto& r : roster) {
            if (!chance(rng, limits.response_probability)) continue;
            std::optional<int> target;
            if (chance(rng, limits.target_probability)) target = uniform(rng, 0, 5);
            put_response(g.assessment, qid, r.id, uniform(rng, 0, 5), target);
        }
    }
    // Shuffle so aggregation cannot depend on insertion order.
    std::shuffle(g.assessment.responses.begin(), g.assessment.responses.end(), rng);
    return g;
}

OracleTable oracle_scores(const GeneratedAssessment& g, int filter) {
    OracleTable t;
    // area -> ratings
    std::map<std::string, std::vector<double>> cur, tgt;
    std::map<std::string, int> count;
    for (const auto& r : g.assessment.responses) {
        bool sec = g.respondent_is_security.at(r.respondent_id);
        if (filter == 1 && !sec) continue;
        if (filter == 2 && sec) continue;
        const std::string& area = g.question_area.at(r.question_id);
        cur[area].push_back(r.current);
        if (r.target) tgt[area].push_back(*r.target);
        ++count[area];
    }
    if (cur.empty()) return t;
    t.empty = false;

    std::map<int, std::vector<double>> phase_cur, phase_tgt;
    std::map<int, int> phase_samples;
    for (const auto& [area, values] : cur) {
        OracleEntry e;
        e.current = mean_of(values);
        if (tgt.count(area)) e.target = mean_of(tgt[area]);
        e.samples = count[area];
        t.areas[area] = e;
        int p = phase_ordinal(g.area_phase.at(area));
        phase_cur[p].push_back(e.current);
        if (e.target) phase_tgt[p].push_back(*e.target);
        phase_samples[p] += e.samples;
    }
    std::vector<double> life_cur, life_tgt;
    for (const auto& [p, values] : phase_cur) {
        OracleEntry e;
        e.current = mean_of(values);
        if (phase_tgt.count(p)) e.target = mean_of(phase_tgt[p]);
        e.samples = phase_samples[p];
        t.phases[p] = e;
        add_accumulated(t.lifecycle, e.current, e.target, e.samples, life_cur, life_tgt);
    }
    t.lifecycle.current = mean_of(life_cur);
    if (!life_tgt.empty()) t.lifecycle.target = mean_of(life_tgt);
    return t;
}

OracleMad oracle_mad(const GeneratedAssessment& g) {
    OracleTable sec = oracle_scores(g, 1);
    OracleTable non = oracle_scores(g, 2);
    OracleMad m;
    if (sec.empty || non.empty) return m;
    double sum = 0.0;
    int n = 0;
    for (const auto& [area, e] : sec.areas) {
        auto it = non.areas.find(area);
        if (it == non.areas.end()) continue;
        sum += std::fabs(e.current - it->second.current);
        ++n;
    }
    if (n == 0) return m;
    m.defined = true;
    m.value = sum / n;
    return m;
}

namespace {

std::string compare_entry(const std::string& what, const ScoreEntry& s, const OracleEntry& o, double tol) {
    if (std::fabs(s.current_mean - o.current) > tol) {
        return what + " current " + std::to_string(s.current_mean) + " vs oracle " + std::to_string(o.current);
    }
    if (s.target_mean.has_value() != o.target.has_value()) return what + " target presence differs";
    if (o.target && std::fabs(*s.target_mean - *o.target) > tol) {
        return what + " target " + std::to_string(*s.target_mean) + " vs oracle " + std::to_string(*o.target);
    }
    if (s.sample_size != o.samples) return what + " sample size differs";
    return {};
}

}  // namespace

std::string compare_with_oracle(const ScoreTable& t, const OracleTable& o, double tol) {
    if (t.per_area.size() != o.areas.size()) return "area count differs";
    for (const auto& [area, e] : o.areas) {
        auto it = t.per_area.find(area);
        if (it == t.per_area.end()) return "area " + area + " missing";
        if (auto d = compare_entry("area " + area, it->second, e, tol); !d.empty()) return d;
    }
    if (t.per_phase.size() != o.phases.size()) return "phase count differs";
    for (const auto& [p, e] : o.phases) {
        auto it = t.per_phase.find(*phase_from_ordinal(p));
        if (it == t.per_phase.end()) return "phase " + std::to_string(p) + " missing";
        if (auto d = compare_entry("phase " + std::to_string(p), it->second, e, tol); !d.empty()) return d;
    }
    return compare_entry("lifecycle", t.lifecycle, o.lifecycle, tol);
}

Catalogue random_catalogue(std::mt19937_64& rng, int serial) {
    Catalogue c;
    c.id = "cat-" + std::to_string(serial);
    c.version = std::to_string(uniform(rng, 1, 3)) + "." + std::to_string(uniform(rng, 0, 9)) + ".0";
    c.phases = canonical_phases();
    std::set<std::string> area_codes, artefact_codes;
    int n_areas = uniform(rng, 0, 10);
    for (int i = 0; i < n_areas; ++i) {
        Phase p = *phase_from_ordinal(uniform(rng, 0, 7));
        std::string tag = tag_for(p, rng);
        std::string code = "A-" + tag + std::to_string(uniform(rng, 1, 20));
        if (!area_codes.insert(code).second) continue;
        PracticeArea a;
        a.code = code;
        a.name = "Area " + random_text(rng);
        a.phase = p;
        a.domain = chance(rng, 0.5) ? PracticeDomain::SoftwareEngineering : PracticeDomain::SecureSoftwareEngineering;
        a.description = random_text(rng);
        a.source = chance(rng, 0.5) ? "paper-table" : "lifecycle-narrative";
        c.areas.push_back(a);

        int n_art = uniform(rng, 0, 3);
        for (int k = 0; k < n_art; ++k) {
            std::string acode = tag + (chance(rng, 0.5) ? "-" : "") + std::to_string(uniform(rng, 1, 30));
            auto parts = parse_artefact_code(acode);
            std::string key = parts->tag + std::to_string(parts->index);
            if (!artefact_codes.insert(key).second) continue;
            Artefact art;
            art.code = acode;
            art.name = "Artefact " + random_text(rng);
            art.owning_area = code;
            art.is_compliance_evidence = chance(rng, 0.7);
            if (chance(rng, 0.5)) {
                StandardRef ref;
                ref.standard_id = "IEC 62443-4-1";
                ref.practice_code = "SI-" + std::to_string(uniform(rng, 1, 2));
                if (chance(rng, 0.5)) ref.clause = std::to_string(uniform(rng, 1, 12)) + ".1";
                art.standard_refs.push_back(ref);
            }
            art.source = a.source;
            c.artefacts.push_back(art);
        }
    }
    if (!c.artefacts.empty()) {
        int n_edges = uniform(rng, 0, 6);
        for (int i = 0; i < n_edges; ++i) {
            const auto& from = c.artefacts[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(c.artefacts.size()) - 1))];
            ArtefactFlowEdge e;
            e.from = from.code;
            e.kind = static_cast<FlowKind>(uniform(rng, 0, 2));
            if (chance(rng, 0.5) || c.areas.empty()) {
                e.to = c.artefacts[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(c.artefacts.size()) - 1))].code;
            } else {
                e.to = c.areas[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(c.areas.size()) - 1))].code;
            }
            if (e.kind == FlowKind::Produces && e.to == e.from) e.kind = FlowKind::Consumes;
            c.edges.push_back(e);
        }
    }
    return c;
}

Questionnaire random_questionnaire(std::mt19937_64& rng, const Catalogue& c, int serial) {
    Questionnaire q;
    q.id = "q-" + std::to_string(serial);
    q.catalogue_id = c.id;
    if (c.areas.empty()) return q;
    int n = uniform(rng, 0, 8);
    for (int i = 0; i < n; ++i) {
        const auto& area = c.areas[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(c.areas.size()) - 1))];
        Question question;
        question.id = "Q-" + std::to_string(serial) + "-" + std::to_string(i);
        question.area_code = area.code;
        question.phase = area.phase;
        question.text = "Question " + random_text(rng);
        question.assessor_guide = random_text(rng);
        for (const auto& art : c.artefacts) {
            if (art.owning_area == area.code && chance(rng, 0.5)) question.evidence_artefacts.push_back(art.code);
        }
        question.source = chance(rng, 0.5) ? "placeholder" : "";
        q.questions.push_back(question);
    }
    normalize_order(q);
    return q;
}

Assessment random_workflow_assessment(std::mt19937_64& rng, int serial) {
    const Catalogue& c = seed_catalogue();
    const Questionnaire& q = seed_questionnaire();
    std::vector<Respondent> roster;
    int n = uniform(rng, 1, 6);
    for (int i = 0; i < n; ++i) {
        roster.push_back({"R" + std::to_string(i + 1), random_text(rng), random_text(rng), chance(rng, 0.5)});
    }
    AssessmentOptions options;
    options.strict_order = chance(rng, 0.5);
    options.collect_targets = chance(rng, 0.7);
    Assessment a = create_assessment(c, q, roster, "asm-" + std::to_string(serial), options,
                                     "2024-05-0" + std::to_string(uniform(rng, 1, 9)) + "T10:00:00.000Z");
    if (chance(rng, 0.5)) {
        a.access_tokens["tok" + std::to_string(serial)] = "assessor";
    }

    int last = uniform(rng, 0, kSessionCount);
    for (int s = 1; s <= last; ++s) {
        open_session(a, s);
        const auto& session = a.session(s);
        if (session.kind == SessionKind::Evaluation) {
            std::set<Phase> phases(session.phases.begin(), session.phases.end());
            for (const auto& question : questions_for_phases(q, phases)) {
                for (const auto& r : roster) {
                    if (!chance(rng, 0.6)) continue;
                    Response resp;
                    resp.question_id = question.id;
                    resp.respondent_id = r.id;
                    resp.current = uniform(rng, 0, 5);
                    if (options.collect_targets) resp.target = uniform(rng, resp.current, 5);
                    resp.notes = random_text(rng);
                    if (chance(rng, 0.3)) resp.evidence_refs.push_back("doc-" + std::to_string(uniform(rng, 1, 99)));
                    record_response(a, s, resp);
                }
                if (chance(rng, 0.3)) {
                    ImprovementPoint p;
                    p.area_code = question.area_code;
                    p.description = random_text(rng);
                    record_improvement_point(a, s, p);
                }
            }
        } else {
            if (!options.collect_targets) {
                for (auto r : a.responses) {
                    if (chance(rng, 0.5)) set_target(a, s, r.question_id, r.respondent_id, uniform(rng, 0, 5));
                }
            }
            for (auto p : a.improvement_points) {
                if (!chance(rng, 0.7)) continue;
                p.impact = uniform(rng, 1, 10);
                p.effort = uniform(rng, 1, 10);
                p.status = static_cast<PointStatus>(uniform(rng, 0, 2));
                record_improvement_point(a, s, p);
            }
        }
        if (s < last || chance(rng, 0.5)) {
            close_session(a, s, "2024-06-01T12:00:00.000Z");
        }
    }
    return a;
}

}  // namespace refa::test
