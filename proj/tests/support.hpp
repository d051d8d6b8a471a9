#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "refa/assessment.hpp"
#include "refa/catalogue.hpp"
#include "refa/questionnaire.hpp"

namespace refa::test {

inline std::filesystem::path data_dir() { return REFA_DATA_DIR; }
inline std::filesystem::path seed_catalogue_path() { return data_dir() / "catalogue.seed.json"; }
inline std::filesystem::path seed_questionnaire_path() { return data_dir() / "questionnaire.seed.json"; }

const Catalogue& seed_catalogue();
const Questionnaire& seed_questionnaire();

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

// Minimal catalogue with the 8 canonical phases and the given areas, each
// area named after its code. Area codes must be well formed.
Catalogue make_catalogue(const std::vector<std::string>& area_codes, std::string id = "cat-test");

Questionnaire make_questionnaire(const Catalogue& c, const std::vector<std::pair<std::string, std::string>>& questions,
                                 std::string id = "q-test");

// Two respondents per group ("s1","s2" security; "n1","n2" not), sessions
// unordered, one question per given area.
Assessment make_assessment(const std::vector<std::string>& area_codes);

// Puts a rating straight into the record, bypassing the session workflow.
void put_response(Assessment& a, const std::string& question, const std::string& respondent, int current,
                  std::optional<int> target = std::nullopt);

/// Random assessment for property checks. The generator keeps its own view
/// of which question belongs to which area and phase so the oracle never
/// reads the bindings stored in the record.
struct GeneratedAssessment {
    Assessment assessment;
    std::map<std::string, std::string> question_area;
    std::map<std::string, Phase> area_phase;
    std::map<std::string, bool> respondent_is_security;
};

struct GeneratorLimits {
    int max_areas = 5;
    int max_questions = 8;
    int max_respondents = 6;
    double response_probability = 0.7;
    double target_probability = 1.0;
};

GeneratedAssessment random_assessment(std::mt19937_64& rng, GeneratorLimits limits = {});

/// Independent brute-force aggregation straight from the generator's tables.
struct OracleEntry {
    double current = 0.0;
    std::optional<double> target;
    int samples = 0;
};

struct OracleTable {
    bool empty = true;
    std::map<std::string, OracleEntry> areas;
    std::map<int, OracleEntry> phases;  // phase ordinal
    OracleEntry lifecycle;
};

// filter: 0 all, 1 security, 2 non-security
OracleTable oracle_scores(const GeneratedAssessment& g, int filter);

struct OracleMad {
    bool defined = false;
    double value = 0.0;
};

OracleMad oracle_mad(const GeneratedAssessment& g);

/// Compares a ScoreTable with the oracle; returns an empty string when every
/// mean agrees within `tol`, otherwise a description of the first mismatch.
std::string compare_with_oracle(const ScoreTable& t, const OracleTable& o, double tol);

// Random catalogue/questionnaire/assessment entities for persistence checks.
Catalogue random_catalogue(std::mt19937_64& rng, int serial);
Questionnaire random_questionnaire(std::mt19937_64& rng, const Catalogue& c, int serial);
Assessment random_workflow_assessment(std::mt19937_64& rng, int serial);

}  // namespace refa::test
