#include "refa/store.hpp"

#include <algorithm>
#include <cctype>

#include <openssl/evp.h>

#include "json_fields.hpp"
#include "refa/error.hpp"
#include "refa/io.hpp"

namespace refa::store {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view kind_name(EntityKind k) noexcept {
    switch (k) {
        case EntityKind::Catalogue: return "catalogue";
        case EntityKind::Questionnaire: return "questionnaire";
        case EntityKind::Assessment: return "assessment";
    }
    return "catalogue";
}

namespace {

std::optional<EntityKind> parse_kind(std::string_view s) {
    if (s == "catalogue") return EntityKind::Catalogue;
    if (s == "questionnaire") return EntityKind::Questionnaire;
    if (s == "assessment") return EntityKind::Assessment;
    return std::nullopt;
}

void check_id(std::string_view id) {
    bool ok = !id.empty() && id.size() <= 128 && id.front() != '.' &&
              std::all_of(id.begin(), id.end(), [](char ch) {
                  return std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.';
              });
    if (!ok) {
        throw Error(errc::validation_failed, "id \"" + std::string(id) + "\" is not a valid file name (use [A-Za-z0-9._-])",
                    std::string(id));
    }
}

void throw_if_invalid(const ValidationReport& r, const std::string& what) {
    if (r.ok()) return;
    const auto& f = r.errors.front();
    throw Error(errc::validation_failed, what + ": " + f.entity_ref + " [" + f.rule_id + "] " + f.message, f.entity_ref);
}

// Questionnaires are checked against their catalogue when the store holds it.
void validate_entity(const Entity& e, const fs::path& root) {
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Catalogue>) {
                throw_if_invalid(validate_catalogue(v), "catalogue " + v.id);
            } else if constexpr (std::is_same_v<T, Questionnaire>) {
                throw_if_invalid(validate_questionnaire_shape(v), "questionnaire " + v.id);
                if (!root.empty()) {
                    auto cpath = entity_path(root, EntityKind::Catalogue, v.catalogue_id);
                    std::error_code ec;
                    if (fs::exists(cpath, ec)) {
                        auto c = catalogue_from_json(envelope_from_json(io::read_json_file(cpath)).payload);
                        throw_if_invalid(validate_questionnaire(v, c), "questionnaire " + v.id);
                    }
                }
            } else {
                throw_if_invalid(validate_assessment(v), "assessment " + v.id);
            }
        },
        e);
}

}  // namespace

EntityKind kind_of(const Entity& e) noexcept { return static_cast<EntityKind>(e.index()); }

const std::string& id_of(const Entity& e) noexcept {
    return std::visit([](const auto& v) -> const std::string& { return v.id; }, e);
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error(errc::internal, "SHA-256 computation failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

json payload_of(const Entity& e) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Catalogue>) return catalogue_to_json(v);
            else if constexpr (std::is_same_v<T, Questionnaire>) return questionnaire_to_json(v);
            else return assessment_to_json(v);
        },
        e);
}

RecordEnvelope make_envelope(const Entity& e, std::string saved_at) {
    RecordEnvelope env;
    env.schema_version = std::string(kSchemaVersion);
    env.kind = kind_of(e);
    env.payload = payload_of(e);
    env.saved_at = saved_at.empty() ? io::utc_timestamp() : std::move(saved_at);
    env.checksum = sha256_hex(env.payload.dump());
    return env;
}

json envelope_to_json(const RecordEnvelope& env) {
    return {{"schemaVersion", env.schema_version},
            {"kind", std::string(kind_name(env.kind))},
            {"savedAt", env.saved_at},
            {"checksum", env.checksum},
            {"payload", env.payload}};
}

RecordEnvelope envelope_from_json(const json& j) {
    using namespace detail;
    RecordEnvelope env;
    env.schema_version = get_string(j, "schemaVersion", "envelope");
    if (env.schema_version != kSchemaVersion) {
        throw Error(errc::unsupported_version,
                    "schemaVersion \"" + env.schema_version + "\" is not supported (expected \"" +
                        std::string(kSchemaVersion) + "\")",
                    "envelope");
    }
    auto kind_text = get_string(j, "kind", "envelope");
    auto kind = parse_kind(kind_text);
    if (!kind) throw Error(errc::parse_error, "unknown envelope kind \"" + kind_text + "\"", "envelope");
    env.kind = *kind;
    env.saved_at = opt_string(j, "savedAt", "envelope");
    env.checksum = get_string(j, "checksum", "envelope");
    env.payload = require(j, "payload", "envelope");
    auto actual = sha256_hex(env.payload.dump());
    if (actual != env.checksum) {
        throw Error(errc::checksum_mismatch, "payload checksum " + actual + " does not match recorded " + env.checksum,
                    "envelope");
    }
    return env;
}

Entity decode(const RecordEnvelope& env) {
    switch (env.kind) {
        case EntityKind::Catalogue: return catalogue_from_json(env.payload);
        case EntityKind::Questionnaire: return questionnaire_from_json(env.payload);
        case EntityKind::Assessment: return assessment_from_json(env.payload);
    }
    throw Error(errc::internal, "unreachable entity kind");
}

fs::path entity_path(const fs::path& root, EntityKind kind, std::string_view id) {
    check_id(id);
    return root / std::string(kind_name(kind)) / (std::string(id) + ".json");
}

fs::path save(const Entity& entity, const fs::path& root) {
    auto path = entity_path(root, kind_of(entity), id_of(entity));
    validate_entity(entity, root);
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) {
        throw Error(errc::io_error, "cannot create " + path.parent_path().string() + ": " + ec.message(),
                    path.string());
    }
    io::write_file_atomic(path, io::dump_pretty(envelope_to_json(make_envelope(entity))));
    return path;
}

Entity load(const fs::path& path) {
    auto env = envelope_from_json(io::read_json_file(path));
    Entity e = decode(env);
    // Questionnaire files under <root>/questionnaire/ are checked against <root>/catalogue/.
    fs::path root;
    if (path.parent_path().filename() == kind_name(env.kind)) root = path.parent_path().parent_path();
    validate_entity(e, root);
    return e;
}

std::vector<AssessmentSummary> list_assessments(const fs::path& root) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw Error(errc::io_error, root.string() + " is not a directory", root.string());
    }
    std::vector<AssessmentSummary> out;
    auto dir = root / "assessment";
    if (!fs::is_directory(dir, ec)) return out;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        try {
            auto env = envelope_from_json(io::read_json_file(entry.path()));
            if (env.kind != EntityKind::Assessment) continue;
            auto a = assessment_from_json(env.payload);
            out.push_back({a.id, a.closed_at.has_value(), env.saved_at});
        } catch (const std::exception&) {
            continue;
        }
    }
    if (ec) throw Error(errc::io_error, "cannot list " + dir.string() + ": " + ec.message(), dir.string());
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
        return std::tie(x.saved_at, x.id) < std::tie(y.saved_at, y.id);
    });
    return out;
}

}  // namespace refa::store
