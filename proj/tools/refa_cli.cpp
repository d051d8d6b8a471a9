// refa: command-line front end for catalogues, questionnaires, assessment
// records and reports. Exit codes: 0 ok, 1 findings or domain error, 2 usage.

#include <csignal>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "refa/assessment.hpp"
#include "refa/catalogue.hpp"
#include "refa/csv.hpp"
#include "refa/error.hpp"
#include "refa/io.hpp"
#include "refa/questionnaire.hpp"
#include "refa/reporting.hpp"
#include "refa/service.hpp"
#include "refa/store.hpp"

namespace {

using nlohmann::json;
using namespace refa;
using namespace refa::io;

constexpr int kExitOk = 0;
constexpr int kExitFindings = 1;
constexpr int kExitUsage = 2;

// Assessment records on disk are either bare assessment JSON or store
// envelopes; whichever was read is written back.
struct Record {
    Assessment assessment;
    bool enveloped = false;
};

Record read_record(const std::string& path) {
    json j = read_json_file(path);
    Record r;
    if (j.is_object() && j.contains("schemaVersion") && j.contains("payload")) {
        auto env = store::envelope_from_json(j);
        if (env.kind != store::EntityKind::Assessment) {
            throw Error(errc::validation_failed, path + " does not hold an assessment", path);
        }
        r.assessment = std::get<Assessment>(store::decode(env));
        r.enveloped = true;
    } else {
        r.assessment = assessment_from_json(j);
    }
    auto report = validate_assessment(r.assessment);
    if (!report.ok()) {
        const auto& f = report.errors.front();
        throw Error(errc::validation_failed, f.message, f.entity_ref);
    }
    return r;
}

void write_record(const std::string& path, const Record& r) {
    json j = r.enveloped ? store::envelope_to_json(store::make_envelope(r.assessment, utc_timestamp()))
                         : assessment_to_json(r.assessment);
    write_file_atomic(path, dump_pretty(j));
}

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
    } else {
        write_file_atomic(out_path, text);
    }
}

void print_findings(const ValidationReport& r) {
    for (const auto& f : r.errors) std::cout << "error " << f.rule_id << " " << f.entity_ref << ": " << f.message << "\n";
    for (const auto& f : r.warnings) {
        std::cout << "warning " << f.rule_id << " " << f.entity_ref << ": " << f.message << "\n";
    }
    std::cout << r.errors.size() << " errors, " << r.warnings.size() << " warnings\n";
}

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string entry_text(const ScoreEntry& e) {
    std::string s = "current " + fmt2(e.current_mean);
    s += "  target " + (e.target_mean ? fmt2(*e.target_mean) : std::string("-"));
    s += "  n=" + std::to_string(e.sample_size);
    return s;
}

std::string score_table_text(const ScoreTable& t) {
    std::string out = "filter: " + std::string(rater_filter_name(t.filter)) + "\n";
    for (const auto& [code, e] : t.per_area) out += "area " + code + "  " + entry_text(e) + "\n";
    for (const auto& [p, e] : t.per_phase) out += "phase " + std::string(phase_name(p)) + "  " + entry_text(e) + "\n";
    out += "lifecycle  " + entry_text(t.lifecycle) + "\n";
    return out;
}

std::optional<int> parse_optional_int(const std::string& s, const char* what) {
    if (s.empty()) return std::nullopt;
    try {
        std::size_t used = 0;
        int v = std::stoi(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw Error(errc::parse_error, std::string(what) + " \"" + s + "\" is not an integer");
}

int current_open_session(const Assessment& a) {
    for (const auto& s : a.sessions) {
        if (s.state == SessionState::Open) return s.index;
    }
    throw Error(errc::session_not_open, "no session is open; pass --session", "assessment/" + a.id);
}

Respondent parse_respondent(const std::string& spec) {
    // id[:sec]
    Respondent r;
    auto colon = spec.find(':');
    r.id = spec.substr(0, colon);
    if (colon != std::string::npos) {
        std::string flag = spec.substr(colon + 1);
        if (flag == "sec") r.is_security_professional = true;
        else if (flag != "nonsec") throw Error(errc::parse_error, "respondent flag must be sec or nonsec: " + spec);
    }
    return r;
}

std::vector<Respondent> read_roster_csv(const std::string& path) {
    // id,displayName,role,isSecurityProfessional
    std::vector<Respondent> out;
    for (const auto& row : csv::parse(read_file(path))) {
        if (row.empty() || row[0] == "id") continue;
        Respondent r;
        r.id = row[0];
        if (row.size() > 1) r.display_name = row[1];
        if (row.size() > 2) r.role = row[2];
        if (row.size() > 3) r.is_security_professional = row[3] == "true" || row[3] == "1" || row[3] == "yes";
        out.push_back(std::move(r));
    }
    return out;
}

volatile std::sig_atomic_t g_stop = 0;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Security-compliance assessment toolkit", "refa"};
    app.require_subcommand(1);

    // catalogue
    auto* cat = app.add_subcommand("catalogue", "Validate or export a practice catalogue");
    cat->require_subcommand(1);
    std::string cat_file, out_path, phase_name_opt;
    auto* cat_validate = cat->add_subcommand("validate", "Check a catalogue file and list findings");
    cat_validate->add_option("file", cat_file, "Catalogue JSON file")->required();
    auto* cat_graph = cat->add_subcommand("graph", "Export the artefact flow graph as DOT");
    cat_graph->add_option("file", cat_file, "Catalogue JSON file")->required();
    cat_graph->add_option("--phase", phase_name_opt, "Restrict to one phase");
    cat_graph->add_option("-o,--output", out_path, "Output file (default stdout)");

    // questionnaire
    auto* qn = app.add_subcommand("questionnaire", "Validate or import a questionnaire");
    qn->require_subcommand(1);
    std::string qn_file, catalogue_path, qn_id;
    auto* qn_validate = qn->add_subcommand("validate", "Check a questionnaire against a catalogue");
    qn_validate->add_option("file", qn_file, "Questionnaire JSON file")->required();
    qn_validate->add_option("--catalogue", catalogue_path, "Catalogue JSON file")->required();
    auto* qn_import = qn->add_subcommand("import", "Convert a questionnaire CSV to JSON");
    qn_import->add_option("file", qn_file, "CSV: id,areaCode,text,guide,evidence (';'-separated)")->required();
    qn_import->add_option("--id", qn_id, "Questionnaire id")->required();
    qn_import->add_option("--catalogue", catalogue_path, "Catalogue JSON file")->required();
    qn_import->add_option("-o,--output", out_path, "Output file (default stdout)");

    // assess
    auto* as = app.add_subcommand("assess", "Create and run assessment records");
    as->require_subcommand(1);
    std::string record, questionnaire_path, roster_path, assessment_id, batch_path;
    std::vector<std::string> respondents;
    bool no_strict = false, defer_targets = false, envelope = false, compare = false;
    int session = 0;
    std::string question_id, respondent_id, current_s, target_s, notes;
    std::string point_id, area_code, description, impact_s, effort_s, status_s;
    std::string filter_s = "all", format_s;

    auto* as_new = as->add_subcommand("new", "Create an assessment record");
    as_new->add_option("--catalogue", catalogue_path, "Catalogue JSON file")->required();
    as_new->add_option("--questionnaire", questionnaire_path, "Questionnaire JSON file")->required();
    as_new->add_option("--id", assessment_id, "Assessment id")->required();
    as_new->add_option("--respondent", respondents, "Respondent as id or id:sec (repeatable)");
    as_new->add_option("--roster", roster_path, "Roster CSV: id,displayName,role,isSecurityProfessional");
    as_new->add_flag("--no-strict-order", no_strict, "Allow sessions to open in any order");
    as_new->add_flag("--defer-targets", defer_targets, "Collect target ratings in summary sessions");
    as_new->add_flag("--envelope", envelope, "Write a store envelope instead of bare JSON");
    as_new->add_option("-o,--output", out_path, "Record file to write")->required();

    auto* as_open = as->add_subcommand("open-session", "Open a session");
    as_open->add_option("record", record, "Assessment record")->required();
    as_open->add_option("--session", session, "Session index 1-6")->required();
    auto* as_close = as->add_subcommand("close-session", "Close the open session");
    as_close->add_option("record", record, "Assessment record")->required();
    as_close->add_option("--session", session, "Session index 1-6")->required();

    auto* as_respond = as->add_subcommand("respond", "Record ratings, one at a time or from a CSV batch");
    as_respond->add_option("record", record, "Assessment record")->required();
    as_respond->add_option("--session", session, "Session index (default: the open session)");
    as_respond->add_option("--question", question_id, "Question id");
    as_respond->add_option("--respondent", respondent_id, "Respondent id");
    as_respond->add_option("--current", current_s, "Current rating 0-5");
    as_respond->add_option("--target", target_s, "Target rating 0-5");
    as_respond->add_option("--notes", notes, "Free-text notes");
    as_respond->add_option("--batch", batch_path, "CSV: questionId,respondentId,current,target,notes");

    auto* as_point = as->add_subcommand("point", "Propose or update an improvement point");
    as_point->add_option("record", record, "Assessment record")->required();
    as_point->add_option("--session", session, "Session index (default: the open session)");
    as_point->add_option("--id", point_id, "Existing point id to update");
    as_point->add_option("--area", area_code, "Practice area code");
    as_point->add_option("--description", description, "What should improve");
    as_point->add_option("--impact", impact_s, "Impact 1-10");
    as_point->add_option("--effort", effort_s, "Effort 1-10");
    as_point->add_option("--status", status_s, "proposed|prioritized|planned");

    auto* as_scores = as->add_subcommand("scores", "Print aggregated scores");
    as_scores->add_option("record", record, "Assessment record")->required();
    as_scores->add_option("--filter", filter_s, "all|sec|nonsec")->check(CLI::IsMember({"all", "sec", "nonsec"}));
    as_scores->add_flag("--compare-groups", compare, "Compare security and non-security raters");
    as_scores->add_option("--format", format_s, "text|json")->check(CLI::IsMember({"text", "json"}));

    auto* as_export = as->add_subcommand("export", "Export responses as CSV");
    as_export->add_option("record", record, "Assessment record")->required();
    as_export->add_option("-o,--output", out_path, "Output file (default stdout)");

    // report
    auto* rp = app.add_subcommand("report", "Render maturity and roadmap reports");
    rp->require_subcommand(1);
    std::string granularity_s;
    int impact_threshold = 5, effort_threshold = 5;
    auto* rp_maturity = rp->add_subcommand("maturity", "Radar chart of current and target maturity");
    rp_maturity->add_option("record", record, "Assessment record")->required();
    rp_maturity->add_option("--granularity", granularity_s, "phase:<Phase> or lifecycle")->required();
    rp_maturity->add_option("--filter", filter_s, "all|sec|nonsec")->check(CLI::IsMember({"all", "sec", "nonsec"}));
    rp_maturity->add_option("--format", format_s, "svg|json|table")->check(CLI::IsMember({"svg", "json", "table"}));
    rp_maturity->add_option("-o,--output", out_path, "Output file (default stdout)");
    auto* rp_roadmap = rp->add_subcommand("roadmap", "Impact/effort quadrant roadmap");
    rp_roadmap->add_option("record", record, "Assessment record")->required();
    rp_roadmap->add_option("--format", format_s, "svg|markdown|json")
        ->check(CLI::IsMember({"svg", "markdown", "json"}));
    rp_roadmap->add_option("--impact-threshold", impact_threshold, "Impact above this is high");
    rp_roadmap->add_option("--effort-threshold", effort_threshold, "Effort above this is high");
    rp_roadmap->add_option("-o,--output", out_path, "Output file (default stdout)");

    // serve
    auto* sv = app.add_subcommand("serve", "Run the HTTP service");
    ServiceConfig config = config_from_env();
    std::string root_s = config.root.string();
    bool seed = false;
    sv->add_option("--root", root_s, "Store root directory (REFA_ROOT)");
    sv->add_option("--port", config.port, "Port, 0 for any (REFA_PORT)");
    sv->add_option("--bind", config.bind_address, "Bind address (REFA_BIND)");
    sv->add_flag("--seed", seed, "Save the bundled seed catalogue and questionnaire into the root");
    std::string seed_dir;
    sv->add_option("--seed-dir", seed_dir, "Directory holding catalogue.seed.json and questionnaire.seed.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    auto usage = [](const std::string& msg) {
        std::cerr << "refa: " << msg << "\n";
        return kExitUsage;
    };

    try {
        if (*cat_validate) {
            Catalogue c = parse_catalogue_file(cat_file);
            auto report = validate_catalogue(c);
            report.sort();
            print_findings(report);
            return report.ok() ? kExitOk : kExitFindings;
        }
        if (*cat_graph) {
            std::optional<Phase> phase;
            if (!phase_name_opt.empty()) {
                phase = parse_phase(phase_name_opt);
                if (!phase) return usage("unknown phase " + phase_name_opt);
            }
            emit(out_path, export_flow_graph(load_catalogue(cat_file), phase));
            return kExitOk;
        }
        if (*qn_validate) {
            Catalogue c = load_catalogue(catalogue_path);
            Questionnaire q = questionnaire_from_json(read_json_file(qn_file), c);
            auto report = validate_questionnaire(q, c);
            report.sort();
            print_findings(report);
            return report.ok() ? kExitOk : kExitFindings;
        }
        if (*qn_import) {
            Catalogue c = load_catalogue(catalogue_path);
            std::vector<Finding> notes_out;
            Questionnaire q = questionnaire_from_csv(read_file(qn_file), qn_id, c, {}, &notes_out);
            for (const auto& f : notes_out) std::cerr << "note " << f.rule_id << " " << f.entity_ref << ": " << f.message << "\n";
            auto report = validate_questionnaire(q, c);
            if (!report.ok()) {
                report.sort();
                print_findings(report);
                return kExitFindings;
            }
            emit(out_path, dump_pretty(questionnaire_to_json(q)));
            return kExitOk;
        }
        if (*as_new) {
            Catalogue c = load_catalogue(catalogue_path);
            Questionnaire q = load_questionnaire(questionnaire_path, c);
            std::vector<Respondent> roster;
            if (!roster_path.empty()) roster = read_roster_csv(roster_path);
            for (const auto& spec : respondents) roster.push_back(parse_respondent(spec));
            AssessmentOptions options;
            options.strict_order = !no_strict;
            options.collect_targets = !defer_targets;
            Record r{create_assessment(c, q, std::move(roster), assessment_id, options, utc_timestamp()), envelope};
            write_record(out_path, r);
            return kExitOk;
        }
        if (*as_open || *as_close) {
            Record r = read_record(record);
            if (*as_open) open_session(r.assessment, session);
            else close_session(r.assessment, session, utc_timestamp());
            write_record(record, r);
            std::cout << "session " << session << " " << session_state_name(r.assessment.session(session).state) << "\n";
            return kExitOk;
        }
        if (*as_respond) {
            Record r = read_record(record);
            Assessment& a = r.assessment;
            int index = session ? session : current_open_session(a);
            std::vector<Response> batch;
            if (!batch_path.empty()) {
                int line = 0;
                for (const auto& row : csv::parse(read_file(batch_path))) {
                    ++line;
                    if (row.empty() || row[0] == "questionId") continue;
                    if (row.size() < 3) {
                        throw Error(errc::parse_error, "batch row " + std::to_string(line) + " needs at least 3 fields");
                    }
                    Response resp;
                    resp.question_id = row[0];
                    resp.respondent_id = row[1];
                    auto cur = parse_optional_int(row[2], "current rating");
                    if (!cur) throw Error(errc::parse_error, "batch row " + std::to_string(line) + " has no current rating");
                    resp.current = *cur;
                    if (row.size() > 3) resp.target = parse_optional_int(row[3], "target rating");
                    if (row.size() > 4) resp.notes = row[4];
                    batch.push_back(std::move(resp));
                }
            } else {
                if (question_id.empty() || respondent_id.empty()) {
                    return usage("respond needs --question and --respondent, or --batch");
                }
                Response resp;
                resp.question_id = question_id;
                resp.respondent_id = respondent_id;
                auto cur = parse_optional_int(current_s, "current rating");
                resp.target = parse_optional_int(target_s, "target rating");
                resp.notes = notes;
                const auto& s = a.session(index);
                if (!cur && s.kind == SessionKind::Summary && !a.options.collect_targets && resp.target) {
                    set_target(a, index, question_id, respondent_id, *resp.target);
                    write_record(record, r);
                    std::cout << "1 target recorded\n";
                    return kExitOk;
                }
                if (!cur) return usage("respond needs --current");
                resp.current = *cur;
                batch.push_back(std::move(resp));
            }
            for (auto& resp : batch) record_response(a, index, std::move(resp));
            write_record(record, r);
            std::cout << batch.size() << " responses recorded\n";
            return kExitOk;
        }
        if (*as_point) {
            Record r = read_record(record);
            Assessment& a = r.assessment;
            int index = session ? session : current_open_session(a);
            ImprovementPoint p;
            if (!point_id.empty()) {
                if (const auto* existing = a.find_point(point_id)) p = *existing;
                else p.id = point_id;
            }
            if (!area_code.empty()) p.area_code = area_code;
            if (!description.empty()) p.description = description;
            if (!impact_s.empty()) p.impact = parse_optional_int(impact_s, "impact");
            if (!effort_s.empty()) p.effort = parse_optional_int(effort_s, "effort");
            if (!status_s.empty()) {
                auto st = parse_point_status(status_s);
                if (!st) return usage("status must be proposed, prioritized or planned");
                p.status = *st;
            }
            if (p.area_code.empty()) return usage("point needs --area");
            std::string id = record_improvement_point(a, index, p);
            write_record(record, r);
            std::cout << id << "\n";
            return kExitOk;
        }
        if (*as_scores) {
            Record r = read_record(record);
            bool as_json = format_s == "json";
            if (compare) {
                auto g = compare_rater_groups(r.assessment);
                if (as_json) {
                    std::cout << dump_pretty(to_json(g));
                    return kExitOk;
                }
                std::cout << "security raters\n" << score_table_text(g.security);
                std::cout << "non-security raters\n" << score_table_text(g.non_security);
                for (const auto& code : g.excluded_areas) std::cout << "excluded " << code << " (one group only)\n";
                std::cout << "mean absolute difference: " << fmt2(g.mean_absolute_difference) << "\n";
                return kExitOk;
            }
            auto t = compute_scores(r.assessment, *parse_rater_filter(filter_s));
            std::cout << (as_json ? dump_pretty(to_json(t)) : score_table_text(t));
            return kExitOk;
        }
        if (*as_export) {
            emit(out_path, responses_to_csv(read_record(record).assessment));
            return kExitOk;
        }
        if (*rp_maturity) {
            auto g = parse_granularity(granularity_s);
            if (!g) return usage("granularity must be phase:<Phase> or lifecycle");
            auto report = build_maturity_report(read_record(record).assessment, *g, *parse_rater_filter(filter_s));
            if (format_s == "json") emit(out_path, dump_pretty(to_json(report)));
            else if (format_s == "table") emit(out_path, render_maturity_table(report));
            else emit(out_path, render_radar_svg(report));
            return kExitOk;
        }
        if (*rp_roadmap) {
            auto roadmap = build_roadmap(read_record(record).assessment, {impact_threshold, effort_threshold});
            if (format_s == "json") emit(out_path, dump_pretty(to_json(roadmap)));
            else if (format_s == "markdown") emit(out_path, render_roadmap(roadmap, RoadmapFormat::Markdown));
            else emit(out_path, render_roadmap(roadmap, RoadmapFormat::Svg));
            return kExitOk;
        }
        if (*sv) {
            if (root_s.empty()) return usage("serve needs --root or REFA_ROOT");
            config.root = root_s;
            if (seed) {
                std::filesystem::path dir = seed_dir.empty() ? std::filesystem::path(REFA_DATA_DIR) : std::filesystem::path(seed_dir);
                Catalogue c = load_catalogue(dir / "catalogue.seed.json");
                store::save(c, config.root);
                store::save(load_questionnaire(dir / "questionnaire.seed.json", c), config.root);
            }
            Service service(config);
            int port = service.bind();
            std::cerr << "refa: listening on " << config.bind_address << ":" << port << "\n";
            std::signal(SIGINT, [](int) { g_stop = 1; });
            std::signal(SIGTERM, [](int) { g_stop = 1; });
            service.start();
            while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
            service.stop();
            return kExitOk;
        }
    } catch (const Error& e) {
        std::cerr << "refa: " << e.code() << ": " << e.detail();
        if (!e.entity_ref().empty()) std::cerr << " [" << e.entity_ref() << "]";
        std::cerr << "\n";
        return kExitFindings;
    } catch (const std::exception& e) {
        std::cerr << "refa: " << e.what() << "\n";
        return kExitFindings;
    }
    return kExitUsage;
}
