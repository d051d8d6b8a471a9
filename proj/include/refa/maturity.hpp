#pragma once

#include <array>
#include <string>
#include <string_view>

namespace refa {

inline constexpr int kMinRating = 0;
inline constexpr int kMaxRating = 5;

/// Criteria text for one maturity level, one entry per criterion column.
/// Empty text means the scale leaves that criterion blank at this level.
struct MaturityCriteria {
    std::string_view execution;
    std::string_view structure;
    std::string_view goal_alignment;
    std::string_view continuous_improvement;
    std::string_view collaboration;
};

struct MaturityLevel {
    int ordinal = 0;
    std::string_view name;
    MaturityCriteria criteria;
};

/// Sit, Crawl, Walk, Run, Jump, Fly. Throws value-out-of-range outside 0..5.
const MaturityLevel& level_info(int ordinal);

const std::array<MaturityLevel, 6>& maturity_scale();

}  // namespace refa
