#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "msite/api.hpp"
#include "msite/config.hpp"
#include "msite/error.hpp"
#include "msite/http_server.hpp"
#include "msite/simulator.hpp"

namespace {

using namespace msite;

struct Loaded {
    EngineConfig engine;
    std::map<std::string, nlohmann::json> flat;
};

Loaded load_config(const std::string& path) {
    Loaded l;
    if (path.empty()) return l;
    l.flat = load_config_file(path);
    l.engine = engine_config_from(l.flat, std::filesystem::path(path).parent_path());
    return l;
}

Engine open_store(const EngineConfig& config, const std::string& store) {
    if (!std::filesystem::exists(store)) return Engine(config);
    const auto events = parse_event_log(read_file(store));
    return Engine::replay(config, events);
}

void append_events(const std::string& store, std::span<const Event> events) {
    if (events.empty()) return;
    if (const auto parent = std::filesystem::path(store).parent_path(); !parent.empty()) {
        std::filesystem::create_directories(parent);
    }
    std::ofstream out(store, std::ios::app | std::ios::binary);
    for (const auto& e : events) out << serialize_event(e) << '\n';
    if (!out) throw Error(ErrorCode::InvalidRequest, "cannot write " + store);
}

Timestamp ceil_to(Timestamp t, Seconds step) {
    const auto rel = t.time_since_epoch();
    auto k = rel / step;
    if (k * step < rel) ++k;
    return Timestamp{k * step};
}

int cmd_simulate(std::uint64_t seed, int weeks, const std::string& personas, const std::string& config_path,
                 const std::string& out, bool traces) {
    StudyConfig sc;
    sc.seed = seed;
    sc.weeks = weeks;
    auto loaded = load_config(config_path);
    sc.engine = loaded.engine;
    apply_sim_config(sc, loaded.flat);
    sc.personas = personas.empty() ? default_personas() : parse_personas(read_file(personas));

    const std::filesystem::path dir(out);
    std::filesystem::create_directories(dir);
    std::map<std::string, std::ofstream> files;
    if (traces) {
        std::filesystem::create_directories(dir / "traces");
        for (const auto& p : sc.personas) {
            files[p.participant_id].open(dir / "traces" / (p.participant_id + ".trace"),
                                         std::ios::trunc | std::ios::binary);
        }
        sc.trace_sink = [&](const std::string& pid, const std::vector<SensorRecord>& recs) {
            files[pid] << serialize_trace(recs);
        };
    }
    const auto result = run_study(sc);
    for (auto& [_, f] : files) f.close();
    write_bundle(result, sc, dir);
    std::cout << "confirmed accuracy "
              << (result.confirmed.accuracy ? format_fixed(*result.confirmed.accuracy, 3) : std::string("n/a"))
              << ", ground truth "
              << (result.ground_truth_accuracy ? format_fixed(*result.ground_truth_accuracy, 3) : std::string("n/a"))
              << "\nwrote " << dir.string() << "\n";
    return 0;
}

struct IngestOptions {
    std::string store;
    std::string trace;
    std::string config;
    std::string enroll_from;
    std::string enroll_to;
    int offset_min = 0;
    bool ticks = true;
};

int cmd_ingest(const IngestOptions& o) {
    const auto config = load_config(o.config).engine;
    auto engine = open_store(config, o.store);
    const auto before = engine.events().size();

    const auto parsed = parse_trace(read_file(o.trace));
    for (const auto& e : parsed.errors) std::cerr << o.trace << ":" << e.line_no << ": " << e.reason << "\n";

    std::set<std::string> pids;
    for (const auto& r : parsed.records) pids.insert(r.participant_id);
    for (const auto& pid : pids) {
        if (engine.enrolled(pid)) continue;
        if (o.enroll_from.empty() || o.enroll_to.empty()) {
            throw Error(ErrorCode::UnknownParticipant, pid + " (pass --enroll-from/--enroll-to to enroll)");
        }
        const auto from = parse_date(o.enroll_from);
        const auto to = parse_date(o.enroll_to);
        if (!from || !to) throw Error(ErrorCode::InvalidParams, "enrollment dates are YYYY-MM-DD");
        engine.enroll({pid, *from, *to, UtcOffset{Seconds{o.offset_min * 60}}, {0}});
    }

    // Devices upload at the next multiple of U after capture.
    const auto upload = config.processing.upload_interval;
    std::map<std::pair<Timestamp, std::string>, UploadBatch> batches;
    for (const auto& r : parsed.records) {
        const auto at = ceil_to(r.captured_at, upload);
        auto& b = batches[{at, r.participant_id}];
        b.participant_id = r.participant_id;
        b.device_sent_at = at;
        b.received_at = at;
        b.records.push_back(r);
    }
    std::int64_t accepted = 0;
    std::int64_t duplicates = 0;
    std::int64_t delivered = 0;
    auto next_tick = batches.empty() ? Timestamp{} : ceil_to(batches.begin()->first.first, config.processing.processing_interval);
    for (const auto& [key, batch] : batches) {
        while (o.ticks && next_tick < key.first) {
            delivered += static_cast<std::int64_t>(engine.process_tick(next_tick).delivered.size());
            next_tick += config.processing.processing_interval;
        }
        const auto ack = engine.ingest(batch);
        accepted += ack.accepted;
        duplicates += ack.duplicates;
    }
    if (o.ticks && !batches.empty()) {
        delivered += static_cast<std::int64_t>(engine.process_tick(next_tick).delivered.size());
    }
    const auto& events = engine.events();
    append_events(o.store, std::span<const Event>(events).subspan(before));
    std::cout << "accepted " << accepted << ", duplicates " << duplicates << ", rejected " << parsed.errors.size()
              << ", sessions delivered " << delivered << "\n";
    return 0;
}

int cmd_report(const std::string& store, const std::string& config_path, const std::string& out) {
    const auto engine = open_store(load_config(config_path).engine, store);
    std::vector<ParticipantReport> reports;
    for (const auto& pid : engine.participants()) reports.push_back(engine.report(pid));
    if (out.empty()) {
        for (const auto& r : reports) std::cout << render_text(r) << "\n";
        return 0;
    }
    const std::filesystem::path dir(out);
    write_file(dir / "report.csv", render_csv(reports));
    std::string txt;
    for (const auto& r : reports) txt += render_text(r) + "\n";
    write_file(dir / "report.txt", txt);
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : reports) j.push_back(to_json(r));
    write_file(dir / "summary.json", j.dump(2) + "\n");
    std::cout << "wrote " << dir.string() << "\n";
    return 0;
}

HttpServer* g_server = nullptr;

int cmd_serve(const std::string& store, const std::string& config_path, const ServeOptions& options) {
    Api api(load_config(config_path).engine,
            [] { return std::chrono::time_point_cast<Seconds>(std::chrono::system_clock::now()); },
            store.empty() ? std::nullopt : std::optional<std::filesystem::path>(store));
    HttpServer server(api, options);
    const int port = server.bind();
    if (port < 0) {
        std::cerr << "cannot bind " << options.host << ":" << options.port << "\n";
        return 1;
    }
    std::cout << "listening on " << options.host << ":" << port << std::endl;
    g_server = &server;
    std::signal(SIGINT, [](int) {
        if (g_server) g_server->stop();
    });
    std::signal(SIGTERM, [](int) {
        if (g_server) g_server->stop();
    });
    server.run();
    g_server = nullptr;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"msite: context-aware EMA engine, simulator and service"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("simulate", "Run a synthetic study and write a report bundle");
    std::uint64_t seed = 1;
    int weeks = 8;
    std::string personas;
    std::string config;
    std::string out;
    bool no_traces = false;
    sim->add_option("--seed", seed, "Root seed")->required();
    sim->add_option("--weeks", weeks, "Study length")->check(CLI::IsMember({8, 24}));
    sim->add_option("--personas", personas, "Persona JSON file (default cohort when omitted)")->check(CLI::ExistingFile);
    sim->add_option("--config", config, "Config JSON file")->check(CLI::ExistingFile);
    sim->add_option("--out", out, "Output directory")->required();
    sim->add_flag("--no-traces", no_traces, "Skip writing sensor traces");

    auto* ing = app.add_subcommand("ingest", "Upload a trace file into an event store");
    IngestOptions io;
    bool no_ticks = false;
    ing->add_option("--store", io.store, "Event log (JSONL)")->required();
    ing->add_option("--trace", io.trace, "Trace file")->required()->check(CLI::ExistingFile);
    ing->add_option("--config", io.config, "Config JSON file")->check(CLI::ExistingFile);
    ing->add_option("--enroll-from", io.enroll_from, "Enroll unknown participants from this date");
    ing->add_option("--enroll-to", io.enroll_to, "Last enrolled date");
    ing->add_option("--utc-offset-min", io.offset_min, "Offset for new enrollments");
    ing->add_flag("--no-ticks", no_ticks, "Store records without running processing ticks");

    auto* rep = app.add_subcommand("report", "Metrics from an event store");
    std::string rep_store;
    std::string rep_config;
    std::string rep_out;
    rep->add_option("--store", rep_store, "Event log (JSONL)")->required()->check(CLI::ExistingFile);
    rep->add_option("--config", rep_config, "Config JSON file")->check(CLI::ExistingFile);
    rep->add_option("--out", rep_out, "Output directory (stdout when omitted)");

    auto* srv = app.add_subcommand("serve", "HTTP API over an event store");
    std::string srv_store;
    std::string srv_config;
    ServeOptions so;
    srv->add_option("--store", srv_store, "Event log (JSONL), replayed at start and appended to");
    srv->add_option("--config", srv_config, "Config JSON file")->check(CLI::ExistingFile);
    srv->add_option("--host", so.host, "Bind address");
    srv->add_option("--port", so.port, "Port, 0 for any");
    srv->add_option("--token", so.token, "Bearer token required on every request");
    srv->add_option("--tick-every", so.tick_every_s, "Seconds between processing ticks, 0 to disable");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*sim) return cmd_simulate(seed, weeks, personas, config, out, !no_traces);
        if (*ing) {
            io.ticks = !no_ticks;
            return cmd_ingest(io);
        }
        if (*rep) return cmd_report(rep_store, rep_config, rep_out);
        if (*srv) return cmd_serve(srv_store, srv_config, so);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
