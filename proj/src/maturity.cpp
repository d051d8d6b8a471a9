#include "refa/maturity.hpp"

#include <string>

#include "refa/error.hpp"

namespace refa {

namespace {

// Cells spanning several criterion columns repeat their text in each column.
// Trailing sentence periods are dropped.
const std::array<MaturityLevel, 6> kScale = {{
    {0, "Sit", {"SP is not executed", "SP is not executed", "", "", ""}},
    {1,
     "Crawl",
     {"SP is executed in an ad-hoc manner", "SP is executed in an ad-hoc manner", "SP's goals remain undefined",
      "SP's goals remain undefined", "SP's goals remain undefined"}},
    {2,
     "Walk",
     {"SP is executed: a) following defined elements (inputs/outputs), b) at least for business-relevant projects",
      "SP elements are somehow defined. For example, people: roles; or process: workflow; or technology: tools to "
      "support workflow",
      "SP's goal is to fulfill a requirement typically demanded by external stakeholders, for example, quality teams, "
      "or auditors",
      "SP is implemented: - mostly to the right - somehow automated - somehow iteratively / incrementally",
      "SP outcome is somehow used as input for other engineering practices. This is primarily driven by individuals, "
      "or isolated teams"}},
    {3,
     "Run",
     {"SP is executed: a) following a defined structure (inputs/outputs/flow), and b) consistently, for most of the "
      "products, projects, and components",
      "SP structure is well-defined. SP is defined as a standard practice",
      "SP's goal is to fulfil business and customer needs. The mindset is to implement explicit requirements",
      "SP improvement is visible through (i) a shift-left approach, (ii) automation, or (iii) iterative/incremental "
      "outcomes",
      "SP outcome is often used as input for other engineering practices. This is a consequence of teams interacting "
      "for example retrospectives between Dev-Sec and Ops-Sec"}},
    {4,
     "Jump",
     {"SP is executed: a) following the defined structure, b) consistently for all products, projects, and "
      "components, and c) consistently by all teams",
      "SP's structure is well-known to the team. SP is perceived as a good/best practice. Teams understand the "
      "benefits and identify the drawbacks of the practice's structure",
      "SP's goal is to reduce risk. The mindset is \"risk reduction provides value to the customer or business\"",
      "SP's improvement is tracked and made visible to teams, who can provide feedback on the shift-left approach and "
      "automation roadmap",
      "SP outcomes are used as input for other engineering practices. SP prerequisites are linked to the outcome of "
      "other engineering practices. Dev-Sec-Ops teams track SP's outcomes vs. risk reduction. Cross-functional teams "
      "learn from tracking dashboards"}},
    {5,
     "Fly",
     {"SP is engrained in the teams and the behavior of business stakeholders",
      "SP structure is well-known to teams and related business and management. SP is considered as a best practice. "
      "Teams and business stakeholders are aware of the benefits/drawbacks of the practice's structure",
      "SP's goal is to reduce risk effectively and efficiently. The mindset is \"effective and efficient risk "
      "reduction produces value for the customer and business\"",
      "SP is constantly optimized as a result of a culture of continuous improvement. SP is implemented as early as "
      "possible in the product lifecycle. SP is automated as fully as possible. SP follows the continuous everything "
      "approach",
      "SP prerequisites and outcomes are well connected to engineering practices. SP influence on the software "
      "engineering process is tracked and allows one to predict and adapt the SP towards efficient risk reduction. "
      "Cross-functional teams perform well with continuous experimentation practices involving individuals from "
      "DevSecOps as needed"}},
}};

}  // namespace

const MaturityLevel& level_info(int ordinal) {
    if (ordinal < kMinRating || ordinal > kMaxRating) {
        throw Error(errc::value_out_of_range, "maturity level " + std::to_string(ordinal) + " is outside 0-5");
    }
    return kScale[static_cast<std::size_t>(ordinal)];
}

const std::array<MaturityLevel, 6>& maturity_scale() { return kScale; }

}  // namespace refa
