#include "refa/service.hpp"

#include <condition_variable>
#include <cstdlib>
#include <map>
#include <mutex>
#include <thread>

#include <openssl/rand.h>
#include <sys/socket.h>

#include "httplib.h"
#include "json.hpp"
#include "refa/assessment.hpp"
#include "refa/error.hpp"
#include "refa/reporting.hpp"
#include "refa/store.hpp"

namespace refa {

using nlohmann::json;
namespace fs = std::filesystem;

ServiceConfig config_from_env(ServiceConfig base) {
    if (const char* v = std::getenv("REFA_ROOT"); v && *v) base.root = v;
    if (const char* v = std::getenv("REFA_BIND"); v && *v) base.bind_address = v;
    if (const char* v = std::getenv("REFA_PORT"); v && *v) base.port = std::atoi(v);
    if (const char* v = std::getenv("REFA_ADMIN_TOKEN"); v && *v) base.admin_token = v;
    return base;
}

namespace {

constexpr const char* kRoleAssessor = "assessor";
constexpr const char* kRoleAssessee = "assessee";
constexpr const char* kRoleObserver = "observer";

std::string random_hex(std::size_t bytes) {
    std::vector<unsigned char> buf(bytes);
    if (RAND_bytes(buf.data(), static_cast<int>(buf.size())) != 1) {
        throw Error(errc::internal, "random source unavailable");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned char b : buf) {
        out.push_back(hex[b >> 4]);
        out.push_back(hex[b & 0xF]);
    }
    return out;
}

int http_status(const std::string& code) {
    static const std::map<std::string, int> table = {
        {errc::not_found, 404},
        {errc::unknown_session, 404},
        {errc::unauthorized, 401},
        {errc::forbidden, 403},
        {errc::bad_request, 400},
        {errc::parse_error, 400},
        {errc::out_of_order, 409},
        {errc::session_still_open, 409},
        {errc::session_not_planned, 409},
        {errc::session_not_open, 409},
        {errc::wrong_session_kind, 409},
        {errc::io_error, 500},
        {errc::internal, 500},
        {errc::checksum_mismatch, 500},
        {errc::unsupported_version, 500},
    };
    auto it = table.find(code);
    return it == table.end() ? 422 : it->second;
}

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(2) + "\n", "application/json");
}

void send_error(httplib::Response& res, const Error& e) {
    json body = {{"error", {{"code", e.code()}, {"message", e.detail()}}}};
    if (!e.entity_ref().empty()) body["error"]["entityRef"] = e.entity_ref();
    send_json(res, http_status(e.code()), body);
}

json parse_body(const httplib::Request& req) {
    try {
        json j = json::parse(req.body);
        if (!j.is_object()) throw Error(errc::bad_request, "request body must be a JSON object");
        return j;
    } catch (const json::parse_error& e) {
        throw Error(errc::bad_request, std::string("request body is not JSON: ") + e.what());
    }
}

std::string token_of(const httplib::Request& req) {
    auto t = req.get_header_value("X-Refa-Token");
    if (!t.empty()) return t;
    auto auth = req.get_header_value("Authorization");
    constexpr std::string_view bearer = "Bearer ";
    if (auth.substr(0, bearer.size()) == bearer) return auth.substr(bearer.size());
    return {};
}

int session_param(const std::string& s) {
    try {
        std::size_t used = 0;
        int v = std::stoi(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw Error(errc::unknown_session, "session \"" + s + "\" does not exist", "session/" + s);
}

std::optional<int> body_int(const json& body, const char* key) {
    auto it = body.find(key);
    if (it == body.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer()) throw Error(errc::bad_request, std::string(key) + " must be an integer");
    return it->get<int>();
}

std::optional<std::string> body_string(const json& body, const char* key) {
    auto it = body.find(key);
    if (it == body.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw Error(errc::bad_request, std::string(key) + " must be a string");
    return it->get<std::string>();
}

json public_view(const Assessment& a) {
    json j = assessment_to_json(a);
    j.erase("accessTokens");
    return j;
}

json point_view(const ImprovementPoint& p, Thresholds t) {
    json j = {{"id", p.id},
              {"areaCode", p.area_code},
              {"description", p.description},
              {"impact", p.impact ? json(*p.impact) : json(nullptr)},
              {"effort", p.effort ? json(*p.effort) : json(nullptr)},
              {"status", std::string(point_status_name(p.status))}};
    if (p.impact && p.effort) j["quadrant"] = std::string(quadrant_id(classify_quadrant(*p.impact, *p.effort, t)));
    return j;
}

int open_session_index(const Assessment& a) {
    for (const auto& s : a.sessions) {
        if (s.state == SessionState::Open) return s.index;
    }
    throw Error(errc::session_not_open, "no session is open", "assessment/" + a.id);
}

Thresholds thresholds_from(const httplib::Request& req) {
    Thresholds t;
    auto read = [&](const char* key, int& out) {
        if (!req.has_param(key)) return;
        try {
            out = std::stoi(req.get_param_value(key));
        } catch (const std::exception&) {
            throw Error(errc::bad_request, std::string(key) + " must be an integer");
        }
    };
    read("impactThreshold", t.impact);
    read("effortThreshold", t.effort);
    return t;
}

// FIFO admission: commands run one at a time in arrival order.
class CommandQueue {
public:
    template <class F>
    void run(F&& f) {
        std::unique_lock lock(mutex_);
        const std::uint64_t ticket = next_++;
        cv_.wait(lock, [&] { return serving_ == ticket; });
        lock.unlock();
        struct Advance {
            CommandQueue* q;
            ~Advance() {
                std::lock_guard g(q->mutex_);
                ++q->serving_;
                q->cv_.notify_all();
            }
        } advance{this};
        f();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::uint64_t next_ = 0;
    std::uint64_t serving_ = 0;
};

struct Slot {
    CommandQueue queue;
    std::mutex snapshot_mutex;
    std::shared_ptr<const Assessment> committed;

    std::shared_ptr<const Assessment> snapshot() {
        std::lock_guard g(snapshot_mutex);
        return committed;
    }
    void publish(std::shared_ptr<const Assessment> next) {
        std::lock_guard g(snapshot_mutex);
        committed = std::move(next);
    }
};

}  // namespace

struct Service::Impl {
    ServiceConfig config;
    httplib::Server server;
    std::thread worker;
    int bound_port = -1;

    std::mutex registry_mutex;
    std::map<std::string, std::shared_ptr<Slot>> slots;
    std::map<std::string, std::shared_ptr<const Catalogue>> catalogues;
    std::map<std::string, std::shared_ptr<const Questionnaire>> questionnaires;

    explicit Impl(ServiceConfig c) : config(std::move(c)) {
        std::error_code ec;
        if (config.root.empty()) throw Error(errc::io_error, "service root directory is not set");
        if (fs::exists(config.root, ec) && !fs::is_directory(config.root, ec)) {
            throw Error(errc::io_error, config.root.string() + " is not a directory", config.root.string());
        }
        fs::create_directories(config.root, ec);
        if (ec) throw Error(errc::io_error, "cannot create " + config.root.string() + ": " + ec.message());
        server.set_socket_options([](socket_t sock) {
            int yes = 1;
            setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
        });
        routes();
    }

    std::shared_ptr<const Catalogue> catalogue(const std::string& id) {
        std::lock_guard g(registry_mutex);
        if (auto it = catalogues.find(id); it != catalogues.end()) return it->second;
        auto path = store::entity_path(config.root, store::EntityKind::Catalogue, id);
        if (!fs::exists(path)) throw Error(errc::not_found, "catalogue " + id + " not found", "catalogues/" + id);
        auto c = std::make_shared<const Catalogue>(store::load_as<Catalogue>(path));
        catalogues[id] = c;
        return c;
    }

    std::shared_ptr<const Questionnaire> questionnaire(const std::string& id) {
        std::shared_ptr<const Questionnaire> q;
        {
            std::lock_guard g(registry_mutex);
            if (auto it = questionnaires.find(id); it != questionnaires.end()) return it->second;
        }
        auto path = store::entity_path(config.root, store::EntityKind::Questionnaire, id);
        if (!fs::exists(path)) {
            throw Error(errc::not_found, "questionnaire " + id + " not found", "questionnaires/" + id);
        }
        Questionnaire loaded = store::load_as<Questionnaire>(path);
        resolve_phases(loaded, *catalogue(loaded.catalogue_id));
        q = std::make_shared<const Questionnaire>(std::move(loaded));
        std::lock_guard g(registry_mutex);
        questionnaires[id] = q;
        return q;
    }

    std::shared_ptr<Slot> slot(const std::string& id) {
        std::lock_guard g(registry_mutex);
        if (auto it = slots.find(id); it != slots.end()) return it->second;
        auto path = store::entity_path(config.root, store::EntityKind::Assessment, id);
        if (!fs::exists(path)) throw Error(errc::not_found, "assessment " + id + " not found", "assessments/" + id);
        auto s = std::make_shared<Slot>();
        s->committed = std::make_shared<const Assessment>(store::load_as<Assessment>(path));
        slots[id] = s;
        return s;
    }

    std::string role_for(const Assessment& a, const httplib::Request& req) {
        auto token = token_of(req);
        if (token.empty()) throw Error(errc::unauthorized, "missing access token", "assessments/" + a.id);
        auto it = a.access_tokens.find(token);
        if (it == a.access_tokens.end()) throw Error(errc::unauthorized, "access token not valid for this assessment");
        return it->second;
    }

    void require_role(const std::string& role, std::initializer_list<const char*> allowed) {
        for (const char* r : allowed) {
            if (role == r) return;
        }
        throw Error(errc::forbidden, "role " + role + " may not perform this operation");
    }

    // Runs `op` on a private copy inside the command queue, saves it, then
    // publishes it as the committed state.
    template <class Op>
    std::shared_ptr<const Assessment> mutate(const std::string& id, const httplib::Request& req,
                                             std::initializer_list<const char*> roles, Op&& op) {
        auto s = slot(id);
        std::shared_ptr<const Assessment> result;
        s->queue.run([&] {
            auto current = s->snapshot();
            require_role(role_for(*current, req), roles);
            Assessment next = *current;
            op(next);
            store::save(next, config.root);
            result = std::make_shared<const Assessment>(std::move(next));
            s->publish(result);
        });
        return result;
    }

    std::shared_ptr<const Assessment> read(const std::string& id, const httplib::Request& req,
                                           std::string* role = nullptr) {
        auto a = slot(id)->snapshot();
        auto r = role_for(*a, req);
        if (role) *role = r;
        return a;
    }

    template <class F>
    static httplib::Server::Handler guarded(F f) {
        return [f](const httplib::Request& req, httplib::Response& res) {
            try {
                f(req, res);
            } catch (const Error& e) {
                send_error(res, e);
            } catch (const std::exception&) {
                send_error(res, Error(errc::internal, "internal error"));
            }
        };
    }

    void routes() {
        server.Get("/health", guarded([](const httplib::Request&, httplib::Response& res) {
                       send_json(res, 200, {{"status", "ok"}});
                   }));

        server.Get(R"(/catalogues/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                       send_json(res, 200, catalogue_to_json(*catalogue(req.matches[1])));
                   }));

        server.Get(R"(/catalogues/([^/]+)/phases/([^/]+)/areas)",
                   guarded([this](const httplib::Request& req, httplib::Response& res) {
                       auto c = catalogue(req.matches[1]);
                       std::string name = req.matches[2];
                       auto phase = parse_phase(name);
                       if (!phase) throw Error(errc::unknown_phase, "unknown phase " + name, "phases/" + name);
                       Catalogue view;
                       view.areas = areas_for_phase(*c, *phase);
                       json areas = catalogue_to_json(view)["areas"];
                       send_json(res, 200, {{"phase", std::string(phase_name(*phase))}, {"areas", areas}});
                   }));

        server.Get(R"(/questionnaires/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                       send_json(res, 200, questionnaire_to_json(*questionnaire(req.matches[1]), false));
                   }));

        server.Get("/assessments", guarded([this](const httplib::Request&, httplib::Response& res) {
                       json out = json::array();
                       for (const auto& s : store::list_assessments(config.root)) {
                           out.push_back({{"id", s.id}, {"closed", s.closed}, {"savedAt", s.saved_at}});
                       }
                       send_json(res, 200, {{"assessments", out}});
                   }));

        server.Post("/assessments", guarded([this](const httplib::Request& req, httplib::Response& res) {
                        create(req, res);
                    }));

        server.Get(R"(/assessments/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                       send_json(res, 200, public_view(*read(req.matches[1], req)));
                   }));

        server.Post(R"(/assessments/([^/]+)/sessions/([^/]+)/(open|close))",
                    guarded([this](const httplib::Request& req, httplib::Response& res) {
                        int index = session_param(req.matches[2]);
                        bool open = req.matches[3] == "open";
                        auto a = mutate(req.matches[1], req, {kRoleAssessor}, [&](Assessment& next) {
                            if (open) open_session(next, index);
                            else close_session(next, index);
                        });
                        const auto& s = a->session(index);
                        send_json(res, 200,
                                  {{"assessmentId", a->id},
                                   {"session", index},
                                   {"state", std::string(session_state_name(s.state))},
                                   {"assessmentClosed", a->closed_at.has_value()}});
                    }));

        server.Get(R"(/assessments/([^/]+)/sessions/([^/]+)/questions)",
                   guarded([this](const httplib::Request& req, httplib::Response& res) {
                       std::string role;
                       auto a = read(req.matches[1], req, &role);
                       int index = session_param(req.matches[2]);
                       const auto& s = a->session(index);
                       auto q = questionnaire(a->questionnaire_id);
                       bool guides = role == kRoleAssessor;
                       json out = json::array();
                       if (!s.phases.empty()) {
                           std::set<Phase> phases(s.phases.begin(), s.phases.end());
                           Questionnaire view{q->id, q->catalogue_id, questions_for_phases(*q, phases)};
                           out = questionnaire_to_json(view, guides)["questions"];
                       }
                       json phases = json::array();
                       for (Phase p : s.phases) phases.push_back(std::string(phase_name(p)));
                       send_json(res, 200,
                                 {{"session", index},
                                  {"kind", std::string(session_kind_name(s.kind))},
                                  {"phases", phases},
                                  {"guidesIncluded", guides},
                                  {"questions", out}});
                   }));

        server.Put(R"(/assessments/([^/]+)/responses)",
                   guarded([this](const httplib::Request& req, httplib::Response& res) {
                       json body = parse_body(req);
                       Response r;
                       r.question_id = body_string(body, "questionId").value_or("");
                       r.respondent_id = body_string(body, "respondentId").value_or("");
                       if (r.question_id.empty() || r.respondent_id.empty()) {
                           throw Error(errc::bad_request, "questionId and respondentId are required");
                       }
                       auto current = body_int(body, "currentRating");
                       r.target = body_int(body, "targetRating");
                       r.notes = body_string(body, "notes").value_or("");
                       if (auto it = body.find("evidenceRefs"); it != body.end() && it->is_array()) {
                           for (const auto& e : *it) {
                               if (e.is_string()) r.evidence_refs.push_back(e.get<std::string>());
                           }
                       }
                       auto session = body_int(body, "sessionIndex");
                       auto a = mutate(req.matches[1], req, {kRoleAssessor, kRoleAssessee}, [&](Assessment& next) {
                           int index = session ? *session : open_session_index(next);
                           const auto& s = next.session(index);
                           if (s.kind == SessionKind::Summary && !next.options.collect_targets && !current) {
                               if (!r.target) throw Error(errc::bad_request, "targetRating is required");
                               set_target(next, index, r.question_id, r.respondent_id, *r.target);
                               return;
                           }
                           if (!current) throw Error(errc::bad_request, "currentRating is required");
                           r.current = *current;
                           record_response(next, index, r);
                       });
                       for (const auto& stored : a->responses) {
                           if (stored.question_id == r.question_id && stored.respondent_id == r.respondent_id) {
                               send_json(res, 200,
                                         {{"questionId", stored.question_id},
                                          {"respondentId", stored.respondent_id},
                                          {"currentRating", stored.current},
                                          {"targetRating", stored.target ? json(*stored.target) : json(nullptr)}});
                               return;
                           }
                       }
                       throw Error(errc::internal, "stored response not found after write");
                   }));

        server.Post(R"(/assessments/([^/]+)/improvement-points)",
                    guarded([this](const httplib::Request& req, httplib::Response& res) {
                        json body = parse_body(req);
                        ImprovementPoint p;
                        p.id = body_string(body, "id").value_or("");
                        p.area_code = body_string(body, "areaCode").value_or("");
                        p.description = body_string(body, "description").value_or("");
                        p.impact = body_int(body, "impact");
                        p.effort = body_int(body, "effort");
                        if (auto st = body_string(body, "status")) {
                            auto parsed = parse_point_status(*st);
                            if (!parsed) throw Error(errc::bad_request, "unknown status " + *st);
                            p.status = *parsed;
                        }
                        auto session = body_int(body, "sessionIndex");
                        std::string id;
                        auto a = mutate(req.matches[1], req, {kRoleAssessor, kRoleAssessee}, [&](Assessment& next) {
                            if (!p.id.empty() && next.find_point(p.id)) {
                                throw Error(errc::bad_request, "improvement point " + p.id + " already exists; use PATCH");
                            }
                            id = record_improvement_point(next, session ? *session : open_session_index(next), p);
                        });
                        send_json(res, 201, point_view(*a->find_point(id), thresholds_from(req)));
                    }));

        server.Patch(R"(/assessments/([^/]+)/improvement-points/([^/]+))",
                     guarded([this](const httplib::Request& req, httplib::Response& res) {
                         json body = parse_body(req);
                         std::string pid = req.matches[2];
                         auto session = body_int(body, "sessionIndex");
                         auto a = mutate(req.matches[1], req, {kRoleAssessor, kRoleAssessee}, [&](Assessment& next) {
                             const ImprovementPoint* existing = next.find_point(pid);
                             if (!existing) {
                                 throw Error(errc::not_found, "improvement point " + pid + " not found",
                                             "improvement-points/" + pid);
                             }
                             ImprovementPoint p = *existing;
                             if (auto v = body_string(body, "areaCode")) p.area_code = *v;
                             if (auto v = body_string(body, "description")) p.description = *v;
                             if (body.contains("impact")) p.impact = body_int(body, "impact");
                             if (body.contains("effort")) p.effort = body_int(body, "effort");
                             if (auto st = body_string(body, "status")) {
                                 auto parsed = parse_point_status(*st);
                                 if (!parsed) throw Error(errc::bad_request, "unknown status " + *st);
                                 p.status = *parsed;
                             }
                             record_improvement_point(next, session ? *session : open_session_index(next), p);
                         });
                         send_json(res, 200, point_view(*a->find_point(pid), thresholds_from(req)));
                     }));

        server.Get(R"(/assessments/([^/]+)/scores)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                       auto a = read(req.matches[1], req);
                       std::string f = req.has_param("filter") ? req.get_param_value("filter") : "all";
                       if (req.has_param("compare") && req.get_param_value("compare") == "true") {
                           send_json(res, 200, to_json(compare_rater_groups(*a)));
                           return;
                       }
                       auto filter = parse_rater_filter(f);
                       if (!filter) throw Error(errc::bad_request, "filter must be all, sec or nonsec");
                       send_json(res, 200, to_json(compute_scores(*a, *filter)));
                   }));

        server.Get(R"(/assessments/([^/]+)/reports/maturity)",
                   guarded([this](const httplib::Request& req, httplib::Response& res) {
                       auto a = read(req.matches[1], req);
                       std::string g = req.has_param("granularity") ? req.get_param_value("granularity") : "lifecycle";
                       auto granularity = parse_granularity(g);
                       if (!granularity) throw Error(errc::bad_request, "granularity must be phase:<Phase> or lifecycle");
                       std::string f = req.has_param("filter") ? req.get_param_value("filter") : "all";
                       auto filter = parse_rater_filter(f);
                       if (!filter) throw Error(errc::bad_request, "filter must be all, sec or nonsec");
                       auto report = build_maturity_report(*a, *granularity, *filter);
                       std::string format = req.has_param("format") ? req.get_param_value("format") : "json";
                       if (format == "svg") {
                           res.status = 200;
                           res.set_content(render_radar_svg(report), "image/svg+xml");
                       } else if (format == "json") {
                           send_json(res, 200, to_json(report));
                       } else {
                           throw Error(errc::bad_request, "format must be json or svg");
                       }
                   }));

        server.Get(R"(/assessments/([^/]+)/reports/roadmap)",
                   guarded([this](const httplib::Request& req, httplib::Response& res) {
                       auto a = read(req.matches[1], req);
                       auto roadmap = build_roadmap(*a, thresholds_from(req));
                       std::string format = req.has_param("format") ? req.get_param_value("format") : "json";
                       res.status = 200;
                       if (format == "svg") {
                           res.set_content(render_roadmap(roadmap, RoadmapFormat::Svg), "image/svg+xml");
                       } else if (format == "markdown") {
                           res.set_content(render_roadmap(roadmap, RoadmapFormat::Markdown), "text/markdown");
                       } else if (format == "json") {
                           send_json(res, 200, to_json(roadmap));
                       } else {
                           throw Error(errc::bad_request, "format must be json, svg or markdown");
                       }
                   }));

        server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (res.status == 404 && res.body.empty()) {
                send_json(res, 404, {{"error", {{"code", errc::not_found}, {"message", "no such endpoint"}}}});
            }
        });
    }

    void create(const httplib::Request& req, httplib::Response& res) {
        if (!config.admin_token.empty() && token_of(req) != config.admin_token) {
            throw Error(errc::unauthorized, "creating assessments requires the admin token");
        }
        json body = parse_body(req);
        auto catalogue_id = body_string(body, "catalogueId");
        auto questionnaire_id = body_string(body, "questionnaireId");
        if (!catalogue_id || !questionnaire_id) {
            throw Error(errc::bad_request, "catalogueId and questionnaireId are required");
        }
        auto c = catalogue(*catalogue_id);
        auto q = questionnaire(*questionnaire_id);

        std::vector<Respondent> roster;
        if (auto it = body.find("roster"); it != body.end()) {
            if (!it->is_array()) throw Error(errc::bad_request, "roster must be an array");
            for (const auto& r : *it) {
                if (!r.is_object() || !r.contains("id") || !r["id"].is_string()) {
                    throw Error(errc::bad_request, "roster entries need a string id");
                }
                roster.push_back({r["id"].get<std::string>(), r.value("displayName", std::string()),
                                  r.value("role", std::string()), r.value("isSecurityProfessional", false)});
            }
        }
        AssessmentOptions options;
        if (auto it = body.find("options"); it != body.end() && it->is_object()) {
            options.strict_order = it->value("strictOrder", true);
            options.collect_targets = it->value("collectTargets", true);
        }
        std::string id = body_string(body, "id").value_or("asm-" + random_hex(6));

        Assessment a = create_assessment(*c, *q, std::move(roster), id, options);
        json tokens;
        for (const char* role : {kRoleAssessor, kRoleAssessee, kRoleObserver}) {
            std::string token = random_hex(16);
            a.access_tokens[token] = role;
            tokens[role] = token;
        }

        auto s = std::make_shared<Slot>();
        {
            std::lock_guard g(registry_mutex);
            auto path = store::entity_path(config.root, store::EntityKind::Assessment, id);
            if (slots.count(id) || fs::exists(path)) {
                throw Error(errc::bad_request, "assessment " + id + " already exists", "assessments/" + id);
            }
            store::save(a, config.root);
            s->committed = std::make_shared<const Assessment>(a);
            slots[id] = s;
        }
        json out = public_view(a);
        out["tokens"] = tokens;
        send_json(res, 201, out);
    }
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Service::~Service() { stop(); }

int Service::bind() {
    if (impl_->bound_port > 0) return impl_->bound_port;
    const auto& cfg = impl_->config;
    if (cfg.port == 0) {
        impl_->bound_port = impl_->server.bind_to_any_port(cfg.bind_address);
    } else if (impl_->server.bind_to_port(cfg.bind_address, cfg.port)) {
        impl_->bound_port = cfg.port;
    }
    if (impl_->bound_port <= 0) {
        impl_->bound_port = -1;
        throw Error(errc::io_error,
                    "cannot bind " + cfg.bind_address + ":" + std::to_string(cfg.port), "bind");
    }
    return impl_->bound_port;
}

void Service::run() {
    bind();
    impl_->server.listen_after_bind();
}

void Service::start() {
    bind();
    impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void Service::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->worker.joinable()) impl_->worker.join();
}

int Service::port() const { return impl_->bound_port; }

}  // namespace refa
