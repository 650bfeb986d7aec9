#include "msite/config.hpp"

#include <fstream>
#include <sstream>

#include "msite/error.hpp"

namespace msite {

namespace {

using nlohmann::json;

void flatten_into(const json& j, const std::string& prefix, std::map<std::string, json>& out) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) flatten_into(v, prefix.empty() ? k : prefix + "." + k, out);
    } else {
        out[prefix] = j;
    }
}

Seconds parse_clock(const json& v, const std::string& key) {
    const auto s = v.get<std::string>();
    int h = 0, m = 0;
    char colon = 0;
    std::istringstream in(s);
    if (!(in >> h >> colon >> m) || colon != ':' || h < 0 || h > 23 || m < 0 || m > 59 || !in.eof()) {
        throw Error(ErrorCode::InvalidConfig, key + ": expected HH:MM, got " + s);
    }
    return Seconds{h * 3600 + m * 60};
}

ScriptKind parse_kind(const json& v, const std::string& key) {
    const auto k = parse_script_kind(v.get<std::string>());
    if (!k || *k == ScriptKind::Burst) throw Error(ErrorCode::InvalidConfig, key + ": ActionPlan or Contextual");
    return *k;
}

}  // namespace

std::map<std::string, json> flatten_config(const json& j) {
    std::map<std::string, json> out;
    if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
    flatten_into(j, "", out);
    return out;
}

EngineConfig engine_config_from(const std::map<std::string, json>& flat, const std::filesystem::path& base_dir) {
    EngineConfig c;
    const std::map<std::string, std::size_t> slot_of{{"morning", 0}, {"noon", 1}, {"evening", 2}};
    for (const auto& [key, v] : flat) {
        try {
            if (key.starts_with("sim.")) continue;
            if (key == "seed") c.seed = v.get<std::uint64_t>();
            else if (key == "place.eps_m") c.place.eps_m = v.get<double>();
            else if (key == "place.min_pts") c.place.min_pts = v.get<int>();
            else if (key == "place.geofence_radius_m") c.place.geofence_radius_m = v.get<double>();
            else if (key == "place.gap_timeout_min") c.place.gap_timeout = Seconds{v.get<std::int64_t>() * 60};
            else if (key == "place.max_accuracy_m") c.place.max_accuracy_m = v.get<double>();
            else if (key == "place.history_days") c.place.history_days = v.get<int>();
            else if (key == "place.sample_interval_s") c.place.sample_interval = Seconds{v.get<std::int64_t>()};
            else if (key == "audio.period_s") c.audio.cycle.period_s = v.get<std::int64_t>();
            else if (key == "audio.active_s") c.audio.cycle.active_s = v.get<std::int64_t>();
            else if (key == "audio.voicing_min") c.audio.voicing_min = v.get<double>();
            else if (key == "audio.energy_min_db") c.audio.energy_min_db = v.get<double>();
            else if (key == "audio.density_min") c.audio.density_min = v.get<double>();
            else if (key == "audio.window_merge_gap") c.audio.window_merge_gap = v.get<int>();
            else if (key == "context.home_threshold") c.context.home_threshold = v.get<double>();
            else if (key == "context.min_conv_s") c.context.min_conv_s = v.get<std::int64_t>();
            else if (key == "context.max_unknown_fraction") c.context.max_unknown_fraction = v.get<double>();
            else if (key == "processing.upload_interval_min") {
                c.processing.upload_interval = Seconds{v.get<std::int64_t>() * 60};
            } else if (key == "processing.processing_interval_min") {
                c.processing.processing_interval = Seconds{v.get<std::int64_t>() * 60};
            } else if (key == "schedule.expire_after_h") {
                c.schedule.expire_after = Seconds{v.get<std::int64_t>() * 3600};
            } else if (key == "bank.script_file") {
                c.item_bank_jsonl = read_file(base_dir / v.get<std::string>());
            } else if (key == "bank.seed_messages_file") {
                c.seed_messages = read_file(base_dir / v.get<std::string>());
            } else if (key.starts_with("schedule.")) {
                const auto rest = key.substr(9);
                const auto us = rest.find('_');
                const auto slot = us == std::string::npos ? slot_of.end() : slot_of.find(rest.substr(0, us));
                if (slot == slot_of.end()) throw Error(ErrorCode::InvalidConfig, "unknown key " + key);
                auto& spec = c.schedule.slots[slot->second];
                const auto field = rest.substr(us + 1);
                if (field == "at") spec.fire_at = parse_clock(v, key);
                else if (field == "window_from") spec.window_from = parse_clock(v, key);
                else if (field == "kind") spec.kind = parse_kind(v, key);
                else if (field == "phrase") spec.period_phrase = v.get<std::string>();
                else throw Error(ErrorCode::InvalidConfig, "unknown key " + key);
            } else {
                throw Error(ErrorCode::InvalidConfig, "unknown key " + key);
            }
        } catch (const json::exception& e) {
            throw Error(ErrorCode::InvalidConfig, key + ": " + e.what());
        }
    }
    if (c.place.eps_m <= 0 || c.place.min_pts < 1 || c.place.geofence_radius_m <= 0 || c.place.history_days < 1 ||
        c.place.sample_interval <= Seconds{0} || c.place.gap_timeout < Seconds{0}) {
        throw Error(ErrorCode::InvalidConfig, "place parameters");
    }
    if (!c.audio.cycle.valid() || 86400 % c.audio.cycle.period_s != 0) {
        throw Error(ErrorCode::InvalidConfig, "audio duty cycle must divide the day");
    }
    c.schedule.validate();
    c.processing.validate();
    return c;
}

std::map<std::string, json> load_config_file(const std::filesystem::path& path) {
    try {
        return flatten_config(json::parse(read_file(path)));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::InvalidConfig, "cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

}  // namespace msite
