#pragma once

#include <stdexcept>
#include <string>

namespace refa {

// Every failure raised by the library carries a machine code from a closed
// set (see docs in README "Error codes") plus the entity it concerns.
class Error : public std::runtime_error {
public:
    Error(std::string code, std::string message, std::string entity_ref = {})
        : std::runtime_error(code + ": " + message),
          code_(std::move(code)),
          detail_(std::move(message)),
          entity_ref_(std::move(entity_ref)) {}

    const std::string& code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }
    const std::string& entity_ref() const noexcept { return entity_ref_; }

private:
    std::string code_;
    std::string detail_;
    std::string entity_ref_;
};

namespace errc {
inline constexpr const char* parse_error = "parse-error";
inline constexpr const char* dangling_reference = "dangling-reference";
inline constexpr const char* validation_failed = "validation-failed";
inline constexpr const char* catalogue_mismatch = "catalogue-mismatch";
inline constexpr const char* unknown_phase = "unknown-phase";
inline constexpr const char* unknown_area = "unknown-area";
inline constexpr const char* unknown_question = "unknown-question";
inline constexpr const char* unknown_respondent = "unknown-respondent";
inline constexpr const char* unknown_session = "unknown-session";
inline constexpr const char* unknown_point = "unknown-improvement-point";
inline constexpr const char* empty_roster = "empty-roster";
inline constexpr const char* out_of_order = "out-of-order";
inline constexpr const char* session_still_open = "session-still-open";
inline constexpr const char* session_not_planned = "session-not-planned";
inline constexpr const char* session_not_open = "session-not-open";
inline constexpr const char* wrong_session_kind = "wrong-session-kind";
inline constexpr const char* question_outside_session = "question-outside-session";
inline constexpr const char* rating_out_of_range = "rating-out-of-range";
inline constexpr const char* value_out_of_range = "value-out-of-range";
inline constexpr const char* missing_impact_effort = "missing-impact-effort";
inline constexpr const char* no_matching_responses = "no-matching-responses";
inline constexpr const char* missing_target = "missing-target";
inline constexpr const char* no_data = "no-data";
inline constexpr const char* nothing_to_classify = "nothing-to-classify";
inline constexpr const char* io_error = "io-error";
inline constexpr const char* checksum_mismatch = "checksum-mismatch";
inline constexpr const char* unsupported_version = "unsupported-schema-version";
inline constexpr const char* not_found = "not-found";
inline constexpr const char* unauthorized = "unauthorized";
inline constexpr const char* forbidden = "forbidden";
inline constexpr const char* bad_request = "bad-request";
inline constexpr const char* internal = "internal-error";
}  // namespace errc

}  // namespace refa
