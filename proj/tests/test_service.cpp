#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "refa/error.hpp"
#include "refa/service.hpp"
#include "refa/store.hpp"
#include "support.hpp"

using namespace refa;
using nlohmann::json;

namespace {

struct Running {
    test::TempDir dir;
    std::unique_ptr<Service> service;
    std::unique_ptr<httplib::Client> client;

    explicit Running(std::string admin_token = {}) {
        store::save(test::seed_catalogue(), dir.path());
        store::save(test::seed_questionnaire(), dir.path());
        start(std::move(admin_token));
    }

    void start(std::string admin_token = {}) {
        ServiceConfig cfg;
        cfg.root = dir.path();
        cfg.port = 0;
        cfg.admin_token = std::move(admin_token);
        service = std::make_unique<Service>(cfg);
        service->start();
        client = std::make_unique<httplib::Client>("127.0.0.1", service->port());
        client->set_read_timeout(10, 0);
    }

    void restart() {
        service->stop();
        service.reset();
        start();
    }
};

httplib::Headers with_token(const std::string& token) { return {{"X-Refa-Token", token}}; }

json body_of(const httplib::Result& r) {
    REQUIRE(r);
    return json::parse(r->body);
}

std::string error_code(const httplib::Result& r) { return body_of(r)["error"]["code"].get<std::string>(); }

json create(Running& s, const std::string& id, bool strict = true, bool collect_targets = true,
            const std::string& token = {}) {
    json req = {{"id", id},
                {"catalogueId", "refa-seed"},
                {"questionnaireId", "refa-aq-seed"},
                {"roster",
                 {{{"id", "alice"}, {"isSecurityProfessional", true}},
                  {{"id", "bob"}, {"isSecurityProfessional", false}}}},
                {"options", {{"strictOrder", strict}, {"collectTargets", collect_targets}}}};
    auto r = s.client->Post("/assessments", with_token(token), req.dump(), "application/json");
    REQUIRE(r);
    REQUIRE_MESSAGE(r->status == 201, r->body);
    return json::parse(r->body);
}

httplib::Result put_rating(Running& s, const std::string& id, const std::string& token, const std::string& question,
                           const std::string& who, int current, int target = 4) {
    json req = {{"questionId", question}, {"respondentId", who}, {"currentRating", current}, {"targetRating", target}};
    return s.client->Put("/assessments/" + id + "/responses", with_token(token), req.dump(), "application/json");
}

httplib::Result open(Running& s, const std::string& id, const std::string& token, int n) {
    return s.client->Post("/assessments/" + id + "/sessions/" + std::to_string(n) + "/open", with_token(token), "",
                          "application/json");
}

httplib::Result close(Running& s, const std::string& id, const std::string& token, int n) {
    return s.client->Post("/assessments/" + id + "/sessions/" + std::to_string(n) + "/close", with_token(token), "",
                          "application/json");
}

}  // namespace

TEST_CASE("health and catalogue reads") {
    Running s;
    auto h = s.client->Get("/health");
    REQUIRE(h);
    CHECK(h->status == 200);

    auto c = s.client->Get("/catalogues/refa-seed");
    CHECK(c->status == 200);
    CHECK(catalogue_from_json(body_of(c)) == test::seed_catalogue());

    auto areas = body_of(s.client->Get("/catalogues/refa-seed/phases/Build/areas"));
    std::vector<std::string> codes;
    for (const auto& a : areas["areas"]) codes.push_back(a["code"]);
    CHECK(codes == std::vector<std::string>{"A-B3", "A-B5", "A-B7", "A-B10"});

    auto bad_phase = s.client->Get("/catalogues/refa-seed/phases/Ship/areas");
    CHECK(bad_phase->status == 422);
    CHECK(error_code(bad_phase) == "unknown-phase");
    CHECK(s.client->Get("/catalogues/nope")->status == 404);

    auto q = body_of(s.client->Get("/questionnaires/refa-aq-seed"));
    CHECK(q["questions"].size() == test::seed_questionnaire().questions.size());
    for (const auto& question : q["questions"]) CHECK_FALSE(question.contains("assessorGuide"));

    auto missing = s.client->Get("/no/such/route");
    CHECK(missing->status == 404);
    CHECK(error_code(missing) == "not-found");
}

TEST_CASE("binding an occupied port fails at startup") {
    Running s;
    test::TempDir other;
    ServiceConfig cfg;
    cfg.root = other.path();
    cfg.port = s.service->port();
    Service second(cfg);
    try {
        second.bind();
        FAIL("expected a bind failure");
    } catch (const Error& e) {
        CHECK(e.code() == errc::io_error);
    }
}

TEST_CASE("create, open session 2, rate A-B3, read scores") {
    Running s;
    json created = create(s, "flow", false);
    std::string assessor = created["tokens"]["assessor"];
    std::string assessee = created["tokens"]["assessee"];
    CHECK_FALSE(created.contains("accessTokens"));

    auto o = open(s, "flow", assessor, 2);
    REQUIRE(o);
    CHECK(o->status == 200);

    auto put = put_rating(s, "flow", assessee, "Q-A-B3-1", "alice", 3, 5);
    REQUIRE(put);
    CHECK(put->status == 200);

    auto scores = body_of(s.client->Get("/assessments/flow/scores?filter=all", with_token(assessee)));
    CHECK(scores["perArea"]["A-B3"]["currentMean"] == 3.0);
    CHECK(scores["perArea"]["A-B3"]["targetMean"] == 5.0);

    put_rating(s, "flow", assessor, "Q-A-B3-1", "alice", 1, 5);
    scores = body_of(s.client->Get("/assessments/flow/scores", with_token(assessor)));
    CHECK(scores["perArea"]["A-B3"]["currentMean"] == 1.0);
    CHECK(scores["perArea"]["A-B3"]["sampleSize"] == 1);

    auto sec = s.client->Get("/assessments/flow/scores?filter=nonsec", with_token(assessor));
    CHECK(sec->status == 422);
    CHECK(error_code(sec) == "no-matching-responses");
}

TEST_CASE("out-of-order open returns the documented code") {
    Running s;
    json created = create(s, "strict");
    auto r = open(s, "strict", created["tokens"]["assessor"], 2);
    REQUIRE(r);
    CHECK(r->status == 409);
    CHECK(error_code(r) == "out-of-order");
    json err = body_of(r)["error"];
    CHECK(err.contains("message"));
    CHECK(err["entityRef"] == "session/2");
}

TEST_CASE("tokens and roles") {
    Running s;
    json created = create(s, "roles");
    std::string assessor = created["tokens"]["assessor"];
    std::string assessee = created["tokens"]["assessee"];
    std::string observer = created["tokens"]["observer"];

    CHECK(s.client->Get("/assessments/roles")->status == 401);
    CHECK(s.client->Get("/assessments/roles", with_token("wrong"))->status == 401);
    CHECK(s.client->Get("/assessments/roles", with_token(observer))->status == 200);
    CHECK(open(s, "roles", assessee, 1)->status == 403);
    CHECK(open(s, "roles", observer, 1)->status == 403);
    CHECK(open(s, "roles", assessor, 1)->status == 200);
    auto denied = put_rating(s, "roles", observer, "Q-A-C8-1", "alice", 2);
    CHECK(denied->status == 403);
    CHECK(error_code(denied) == "forbidden");

    auto as_assessor = body_of(s.client->Get("/assessments/roles/sessions/1/questions", with_token(assessor)));
    auto as_assessee = body_of(s.client->Get("/assessments/roles/sessions/1/questions", with_token(assessee)));
    REQUIRE(as_assessor["questions"].size() == as_assessee["questions"].size());
    bool any_guide = false;
    for (const auto& q : as_assessor["questions"]) any_guide |= q.contains("assessorGuide");
    CHECK(any_guide);
    for (const auto& q : as_assessee["questions"]) CHECK_FALSE(q.contains("assessorGuide"));
    for (const auto& q : as_assessor["questions"]) {
        std::string phase = q["phase"];
        CHECK((phase == "Plan" || phase == "Code"));
    }
    auto summary = body_of(s.client->Get("/assessments/roles/sessions/5/questions", with_token(assessor)));
    CHECK(summary["questions"].empty());
    CHECK(s.client->Get("/assessments/roles/sessions/9/questions", with_token(assessor))->status == 404);
}

TEST_CASE("error mapping") {
    Running s;
    json created = create(s, "errs");
    std::string assessor = created["tokens"]["assessor"];
    open(s, "errs", assessor, 1);

    auto range = put_rating(s, "errs", assessor, "Q-A-C8-1", "alice", 9);
    CHECK(range->status == 422);
    CHECK(error_code(range) == "rating-out-of-range");

    auto outside = put_rating(s, "errs", assessor, "Q-A-B3-1", "alice", 2);
    CHECK(error_code(outside) == "question-outside-session");

    auto bad = s.client->Put("/assessments/errs/responses", with_token(assessor), "{nope", "application/json");
    CHECK(bad->status == 400);
    CHECK(error_code(bad) == "bad-request");

    auto still_open = open(s, "errs", assessor, 2);
    CHECK(still_open->status == 409);
    CHECK(error_code(still_open) == "session-still-open");

    CHECK(s.client->Get("/assessments/ghost", with_token(assessor))->status == 404);

    auto dup = s.client->Post("/assessments", json{{"id", "errs"}, {"catalogueId", "refa-seed"},
                                                   {"questionnaireId", "refa-aq-seed"},
                                                   {"roster", {{{"id", "x"}}}}}.dump(),
                              "application/json");
    CHECK(dup->status == 400);

    auto empty = s.client->Post("/assessments", json{{"catalogueId", "refa-seed"}, {"questionnaireId", "refa-aq-seed"},
                                                     {"roster", json::array()}}.dump(),
                                "application/json");
    CHECK(empty->status == 422);
    CHECK(error_code(empty) == "empty-roster");
    for (const auto* r : {&range, &outside, &bad, &still_open}) {
        CHECK((*r)->body.find("what()") == std::string::npos);
    }
}

TEST_CASE("admin token guards creation when configured") {
    Running s("sekrit");
    json req = {{"catalogueId", "refa-seed"}, {"questionnaireId", "refa-aq-seed"}, {"roster", {{{"id", "a"}}}}};
    CHECK(s.client->Post("/assessments", req.dump(), "application/json")->status == 401);
    create(s, "guarded", true, true, "sekrit");
}

TEST_CASE("improvement points, reports and listing") {
    Running s;
    json created = create(s, "full");
    std::string t = created["tokens"]["assessor"];
    open(s, "full", t, 1);
    put_rating(s, "full", t, "Q-A-C8-1", "alice", 2, 4);
    put_rating(s, "full", t, "Q-A-C8-1", "bob", 3, 4);
    close(s, "full", t, 1);
    open(s, "full", t, 2);
    put_rating(s, "full", t, "Q-A-B3-1", "alice", 1, 3);
    put_rating(s, "full", t, "Q-A-B3-1", "bob", 2, 4);

    auto post = s.client->Post("/assessments/full/improvement-points", with_token(t),
                               json{{"areaCode", "A-B3"}, {"description", "adopt SAST in CI"}}.dump(),
                               "application/json");
    REQUIRE(post);
    CHECK(post->status == 201);
    std::string pid = body_of(post)["id"];
    CHECK(body_of(post)["status"] == "proposed");

    auto early = s.client->Patch("/assessments/full/improvement-points/" + pid, with_token(t),
                                 json{{"impact", 8}, {"effort", 2}}.dump(), "application/json");
    CHECK(early->status == 409);
    CHECK(error_code(early) == "wrong-session-kind");

    auto roadmap_none = s.client->Get("/assessments/full/reports/roadmap?format=markdown", with_token(t));
    CHECK(roadmap_none->status == 422);
    CHECK(error_code(roadmap_none) == "nothing-to-classify");

    close(s, "full", t, 2);
    for (int i = 3; i <= 4; ++i) {
        open(s, "full", t, i);
        close(s, "full", t, i);
    }
    open(s, "full", t, 5);
    auto patch = s.client->Patch("/assessments/full/improvement-points/" + pid, with_token(t),
                                 json{{"impact", 8}, {"effort", 2}, {"status", "prioritized"}}.dump(),
                                 "application/json");
    REQUIRE(patch);
    CHECK(patch->status == 200);
    CHECK(body_of(patch)["quadrant"] == "QuickWins");
    CHECK(s.client->Patch("/assessments/full/improvement-points/IP-99", with_token(t), "{}", "application/json")
              ->status == 404);

    auto md = s.client->Get("/assessments/full/reports/roadmap?format=markdown", with_token(t));
    CHECK(md->status == 200);
    CHECK(md->get_header_value("Content-Type").find("markdown") != std::string::npos);
    CHECK(md->body.find("adopt SAST in CI") != std::string::npos);
    auto rj = body_of(s.client->Get("/assessments/full/reports/roadmap", with_token(t)));
    CHECK(rj["items"].size() == 1);
    auto tight = body_of(s.client->Get("/assessments/full/reports/roadmap?impactThreshold=9", with_token(t)));
    CHECK(tight["items"][0]["quadrant"] == "FillIns");

    auto svg = s.client->Get("/assessments/full/reports/maturity?granularity=lifecycle&format=svg", with_token(t));
    CHECK(svg->status == 200);
    CHECK(svg->get_header_value("Content-Type") == "image/svg+xml");
    CHECK(svg->body.find("<polygon") != std::string::npos);
    auto mj = body_of(s.client->Get("/assessments/full/reports/maturity?granularity=phase:Build", with_token(t)));
    CHECK(mj["axes"] == json::array({"A-B3"}));
    CHECK(s.client->Get("/assessments/full/reports/maturity?granularity=weekly", with_token(t))->status == 400);

    auto cmp = body_of(s.client->Get("/assessments/full/scores?compare=true", with_token(t)));
    CHECK(cmp["meanAbsoluteDifference"] == 1.0);

    auto list = body_of(s.client->Get("/assessments"));
    REQUIRE(list["assessments"].size() == 1);
    CHECK(list["assessments"][0]["id"] == "full");
}

TEST_CASE("deferred targets through PUT in a summary session") {
    Running s;
    json created = create(s, "defer", true, false);
    std::string t = created["tokens"]["assessor"];
    open(s, "defer", t, 1);
    json first = {{"questionId", "Q-A-C8-1"}, {"respondentId", "alice"}, {"currentRating", 2}};
    CHECK(s.client->Put("/assessments/defer/responses", with_token(t), first.dump(), "application/json")->status ==
          200);
    close(s, "defer", t, 1);
    for (int i = 2; i <= 4; ++i) {
        open(s, "defer", t, i);
        close(s, "defer", t, i);
    }
    open(s, "defer", t, 5);
    json target = {{"questionId", "Q-A-C8-1"}, {"respondentId", "alice"}, {"targetRating", 4}};
    auto r = s.client->Put("/assessments/defer/responses", with_token(t), target.dump(), "application/json");
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(body_of(r)["targetRating"] == 4);
    CHECK(body_of(r)["currentRating"] == 2);
}

TEST_CASE("state survives a restart") {
    Running s;
    json created = create(s, "persist", false);
    std::string t = created["tokens"]["assessor"];
    open(s, "persist", t, 2);
    put_rating(s, "persist", t, "Q-A-T4-1", "bob", 2, 5);
    auto before = body_of(s.client->Get("/assessments/persist", with_token(t)));

    s.restart();
    auto after = body_of(s.client->Get("/assessments/persist", with_token(t)));
    CHECK(before == after);
    CHECK(after["sessions"][1]["state"] == "open");
    CHECK(put_rating(s, "persist", t, "Q-A-T4-1", "alice", 4, 5)->status == 200);
}

TEST_CASE("concurrent PUTs to one (question, respondent) leave one response") {
    Running s;
    json created = create(s, "race", false);
    std::string t = created["tokens"]["assessor"];
    open(s, "race", t, 2);
    const int n = 12;
    std::vector<std::thread> threads;
    std::vector<int> status(n, 0);
    for (int i = 0; i < n; ++i) {
        threads.emplace_back([&, i] {
            httplib::Client c("127.0.0.1", s.service->port());
            json req = {{"questionId", "Q-A-B5-1"}, {"respondentId", "alice"}, {"currentRating", i % 6},
                        {"targetRating", 5}};
            auto r = c.Put("/assessments/race/responses", with_token(t), req.dump(), "application/json");
            status[static_cast<std::size_t>(i)] = r ? r->status : -1;
        });
    }
    for (auto& th : threads) th.join();
    for (int st : status) CHECK(st == 200);

    auto a = body_of(s.client->Get("/assessments/race", with_token(t)));
    REQUIRE(a["responses"].size() == 1);
    int stored = a["responses"][0]["currentRating"];
    CHECK(stored >= 0);
    CHECK(stored <= 5);

    // The file on disk agrees with what readers see.
    auto on_disk = store::load_as<Assessment>(store::entity_path(s.dir.path(), store::EntityKind::Assessment, "race"));
    REQUIRE(on_disk.responses.size() == 1);
    CHECK(on_disk.responses[0].current == stored);
}

TEST_CASE("concurrent PUTs from different respondents are all kept") {
    Running s;
    json created = create(s, "many", false);
    std::string t = created["tokens"]["assessor"];
    open(s, "many", t, 1);
    std::vector<std::thread> threads;
    for (const char* q : {"Q-A-PP2-1", "Q-A-PP4-1", "Q-A-C1-1", "Q-A-C4-1", "Q-A-C8-1"}) {
        for (const char* who : {"alice", "bob"}) {
            threads.emplace_back([&, q, who] {
                httplib::Client c("127.0.0.1", s.service->port());
                json req = {{"questionId", q}, {"respondentId", who}, {"currentRating", 3}, {"targetRating", 4}};
                c.Put("/assessments/many/responses", with_token(t), req.dump(), "application/json");
            });
        }
    }
    for (auto& th : threads) th.join();
    auto a = body_of(s.client->Get("/assessments/many", with_token(t)));
    CHECK(a["responses"].size() == 10);
}

TEST_CASE("config from environment") {
    ::setenv("REFA_ROOT", "/tmp/refa-env-root", 1);
    ::setenv("REFA_PORT", "9123", 1);
    ::setenv("REFA_BIND", "0.0.0.0", 1);
    auto cfg = config_from_env();
    CHECK(cfg.root == "/tmp/refa-env-root");
    CHECK(cfg.port == 9123);
    CHECK(cfg.bind_address == "0.0.0.0");
    ::unsetenv("REFA_ROOT");
    ::unsetenv("REFA_PORT");
    ::unsetenv("REFA_BIND");
}
