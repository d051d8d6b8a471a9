#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "refa/assessment.hpp"
#include "refa/catalogue.hpp"
#include "refa/error.hpp"
#include "refa/questionnaire.hpp"

namespace refa::store {

inline constexpr std::string_view kSchemaVersion = "1";

enum class EntityKind { Catalogue, Questionnaire, Assessment };

std::string_view kind_name(EntityKind k) noexcept;

using Entity = std::variant<Catalogue, Questionnaire, Assessment>;

EntityKind kind_of(const Entity& e) noexcept;
const std::string& id_of(const Entity& e) noexcept;

/// Files live at <root>/<kind>/<id>.json:
///   {"schemaVersion", "kind", "savedAt", "checksum", "payload"}
/// where checksum is the hex SHA-256 of the compact payload serialization.
struct RecordEnvelope {
    std::string schema_version;
    EntityKind kind = EntityKind::Catalogue;
    nlohmann::json payload;
    std::string saved_at;
    std::string checksum;
};

std::string sha256_hex(std::string_view bytes);

nlohmann::json payload_of(const Entity& e);
RecordEnvelope make_envelope(const Entity& e, std::string saved_at = {});
nlohmann::json envelope_to_json(const RecordEnvelope& env);
/// Verifies version and checksum; does not decode the payload.
RecordEnvelope envelope_from_json(const nlohmann::json& j);
Entity decode(const RecordEnvelope& env);

std::filesystem::path entity_path(const std::filesystem::path& root, EntityKind kind, std::string_view id);

/// Validates, then writes atomically. Returns the file written.
std::filesystem::path save(const Entity& entity, const std::filesystem::path& root);

/// Reads, verifies the checksum and validates the entity.
Entity load(const std::filesystem::path& path);

template <class T>
T load_as(const std::filesystem::path& path) {
    Entity e = load(path);
    if (auto* v = std::get_if<T>(&e)) return std::move(*v);
    throw Error(errc::validation_failed, path.string() + " holds a different entity kind", path.string());
}

struct AssessmentSummary {
    std::string id;
    bool closed = false;
    std::string saved_at;
    bool operator==(const AssessmentSummary&) const = default;
};

/// Ordered by savedAt, then id. Files that are not assessment envelopes are skipped.
std::vector<AssessmentSummary> list_assessments(const std::filesystem::path& root);

}  // namespace refa::store
