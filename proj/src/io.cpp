#include "anchorloc/io.hpp"

#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace anchorloc::io {

static_assert(std::endian::native == std::endian::little,
              "log sample encoding assumes a little-endian host");

namespace {

constexpr char kB64Alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

struct Issues {
    std::vector<std::string> list;
    void add(std::string s) { list.push_back(std::move(s)); }
    void throw_if_any() {
        if (!list.empty()) throw ValidationError(std::move(list));
    }
};

void check_keys(const json& j, const std::string& ctx,
                std::initializer_list<const char*> allowed, Issues& issues) {
    if (!j.is_object()) {
        issues.add(ctx + ": expected an object");
        return;
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* a : allowed)
            if (it.key() == a) {
                known = true;
                break;
            }
        if (!known) issues.add(ctx + "." + it.key() + ": unknown field");
    }
}

double num_or(const json& j, const std::string& ctx, const char* key, double def,
              Issues& issues) {
    if (!j.is_object() || !j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_number()) {
        issues.add(ctx + "." + key + ": expected a number");
        return def;
    }
    return v.get<double>();
}

std::uint64_t u64_or(const json& j, const std::string& ctx, const char* key, std::uint64_t def,
                     Issues& issues) {
    if (!j.is_object() || !j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_number_unsigned() && !v.is_number_integer()) {
        issues.add(ctx + "." + key + ": expected an integer");
        return def;
    }
    return v.get<std::uint64_t>();
}

bool bool_or(const json& j, const std::string& ctx, const char* key, bool def, Issues& issues) {
    if (!j.is_object() || !j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_boolean()) {
        issues.add(ctx + "." + key + ": expected a boolean");
        return def;
    }
    return v.get<bool>();
}

std::string str_or(const json& j, const std::string& ctx, const char* key, std::string def,
                   Issues& issues) {
    if (!j.is_object() || !j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_string()) {
        issues.add(ctx + "." + key + ": expected a string");
        return def;
    }
    return v.get<std::string>();
}

Point3 vec3_or(const json& j, const std::string& ctx, const char* key, Point3 def,
               Issues& issues) {
    if (!j.is_object() || !j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() ||
        !v[2].is_number()) {
        issues.add(ctx + "." + key + ": expected an array of 3 numbers");
        return def;
    }
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

EulerAngles euler_deg_or(const json& j, const std::string& ctx, const char* key,
                         EulerAngles def, Issues& issues) {
    Point3 asvec = vec3_or(j, ctx, key,
                           {rad2deg(def.roll), rad2deg(def.pitch), rad2deg(def.yaw)}, issues);
    return {deg2rad(asvec.x), deg2rad(asvec.y), deg2rad(asvec.z)};
}

json euler_deg_json(const EulerAngles& e) {
    return json::array({rad2deg(e.roll), rad2deg(e.pitch), rad2deg(e.yaw)});
}

json vec3_json(const Point3& p) { return json::array({p.x, p.y, p.z}); }

json isolation_json(double db) {
    if (std::isinf(db)) return json("inf");
    return json(db);
}

double isolation_or(const json& j, const std::string& ctx, const char* key, double def,
                    Issues& issues) {
    if (!j.is_object() || !j.contains(key)) return def;
    const json& v = j.at(key);
    if (v.is_string() && v.get<std::string>() == "inf")
        return std::numeric_limits<double>::infinity();
    if (v.is_number()) return v.get<double>();
    issues.add(ctx + "." + key + ": expected a number or \"inf\"");
    return def;
}

json radar_to_json(const RadarConfig& r) {
    return json{{"carrier_wavelength_m", r.carrier_wavelength},
                {"chirp_slope_hz_per_s", r.chirp_slope},
                {"chirp_duration_s", r.chirp_duration},
                {"sample_rate_hz", r.sample_rate},
                {"samples_per_frame", r.samples_per_frame},
                {"rx_spacing_m", r.rx_spacing}};
}

RadarConfig radar_from_json(const json& j, const std::string& ctx, const RadarConfig& base,
                            Issues& issues) {
    RadarConfig r = base;
    if (j.is_null()) return r;
    check_keys(j, ctx,
               {"carrier_wavelength_m", "chirp_slope_hz_per_s", "chirp_duration_s",
                "sample_rate_hz", "samples_per_frame", "rx_spacing_m"},
               issues);
    r.carrier_wavelength = num_or(j, ctx, "carrier_wavelength_m", r.carrier_wavelength, issues);
    r.chirp_slope = num_or(j, ctx, "chirp_slope_hz_per_s", r.chirp_slope, issues);
    r.chirp_duration = num_or(j, ctx, "chirp_duration_s", r.chirp_duration, issues);
    r.sample_rate = num_or(j, ctx, "sample_rate_hz", r.sample_rate, issues);
    r.samples_per_frame = static_cast<std::size_t>(
        u64_or(j, ctx, "samples_per_frame", r.samples_per_frame, issues));
    if (j.is_object() && j.contains("rx_spacing_m"))
        r.rx_spacing = num_or(j, ctx, "rx_spacing_m", r.rx_spacing, issues);
    else
        r.rx_spacing = r.carrier_wavelength / 2.0; // tracks a changed wavelength
    return r;
}

json anchor_to_json(const AnchorConfig& a) {
    return json{{"position_m", vec3_json(a.position)},
                {"f1_mod_hz", a.f1_mod},
                {"f2_mod_hz", a.f2_mod},
                {"cross_pol_isolation_db", isolation_json(a.cross_pol_isolation_db)},
                {"reflection_gain", a.reflection_gain}};
}

AnchorConfig anchor_from_json(const json& j, const std::string& ctx, Issues& issues) {
    AnchorConfig a;
    if (j.is_null()) return a;
    check_keys(j, ctx,
               {"position_m", "f1_mod_hz", "f2_mod_hz", "cross_pol_isolation_db",
                "reflection_gain"},
               issues);
    a.position = vec3_or(j, ctx, "position_m", a.position, issues);
    a.f1_mod = num_or(j, ctx, "f1_mod_hz", a.f1_mod, issues);
    a.f2_mod = num_or(j, ctx, "f2_mod_hz", a.f2_mod, issues);
    a.cross_pol_isolation_db =
        isolation_or(j, ctx, "cross_pol_isolation_db", a.cross_pol_isolation_db, issues);
    a.reflection_gain = num_or(j, ctx, "reflection_gain", a.reflection_gain, issues);
    return a;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

std::string encode_base64(const std::uint8_t* data, std::size_t len) {
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    for (std::size_t i = 0; i < len; i += 3) {
        std::uint32_t chunk = static_cast<std::uint32_t>(data[i]) << 16;
        if (i + 1 < len) chunk |= static_cast<std::uint32_t>(data[i + 1]) << 8;
        if (i + 2 < len) chunk |= data[i + 2];
        out.push_back(kB64Alphabet[(chunk >> 18) & 0x3F]);
        out.push_back(kB64Alphabet[(chunk >> 12) & 0x3F]);
        out.push_back(i + 1 < len ? kB64Alphabet[(chunk >> 6) & 0x3F] : '=');
        out.push_back(i + 2 < len ? kB64Alphabet[chunk & 0x3F] : '=');
    }
    return out;
}

std::vector<std::uint8_t> decode_base64(const std::string& text) {
    auto value_of = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    int acc = 0, bits = 0;
    for (char c : text) {
        if (c == '=') break;
        int v = value_of(c);
        if (v < 0) throw ValidationError({"base64: invalid character"});
        acc = (acc << 6) | v;
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xFF));
        }
    }
    return out;
}

json scenario_to_json(const Scenario& scn) {
    json traj;
    switch (scn.trajectory.type) {
    case Trajectory::Type::Hover:
        traj = {{"type", "hover"},
                {"position_m", vec3_json(scn.trajectory.position)},
                {"attitude_deg", euler_deg_json(scn.trajectory.attitude)}};
        break;
    case Trajectory::Type::Line:
        traj = {{"type", "line"},
                {"position_m", vec3_json(scn.trajectory.position)},
                {"end_m", vec3_json(scn.trajectory.line_end)},
                {"attitude_deg", euler_deg_json(scn.trajectory.attitude)},
                {"attitude_end_deg", euler_deg_json(scn.trajectory.attitude_end)}};
        break;
    case Trajectory::Type::Circle:
        traj = {{"type", "circle"},
                {"position_m", vec3_json(scn.trajectory.position)},
                {"attitude_deg", euler_deg_json(scn.trajectory.attitude)},
                {"radius_m", scn.trajectory.radius},
                {"period_s", scn.trajectory.period},
                {"plane", scn.trajectory.plane == Trajectory::Plane::XY ? "xy" : "xz"}};
        break;
    case Trajectory::Type::Waypoints: {
        json points = json::array();
        for (const auto& p : scn.trajectory.waypoints)
            points.push_back({{"t_s", p.t},
                              {"position_m", vec3_json(p.position)},
                              {"attitude_deg", euler_deg_json(p.attitude)}});
        traj = {{"type", "waypoints"}, {"points", points}};
        break;
    }
    }
    return json{{"schema_version", 1},
                {"duration_s", scn.duration},
                {"seed", scn.seed},
                {"trajectory", traj},
                {"radar_h", radar_to_json(scn.radar_h)},
                {"radar_v", radar_to_json(scn.radar_v)},
                {"anchor", anchor_to_json(scn.anchor)},
                {"noise", {{"power", scn.noise.noise_power}}},
                {"chirp_rate_hz", scn.chirp_rate},
                {"chirp_jitter_s", scn.chirp_jitter},
                {"imu_rate_hz", scn.imu_rate},
                {"imu_clock_offset_s", scn.imu_clock_offset},
                {"truth_rate_hz", scn.truth_rate},
                {"range_path_loss", scn.sim.range_path_loss},
                {"anchor_mount_yaw_deg", rad2deg(rotation_to_euler(scn.sim.anchor_mount).yaw)}};
}

Scenario scenario_from_json(const json& j) {
    Issues issues;
    Scenario scn;
    check_keys(j, "scenario",
               {"schema_version", "duration_s", "seed", "trajectory", "radar_h", "radar_v",
                "anchor", "noise", "chirp_rate_hz", "chirp_jitter_s", "imu_rate_hz",
                "imu_clock_offset_s", "truth_rate_hz", "range_path_loss",
                "anchor_mount_yaw_deg"},
               issues);
    auto version = u64_or(j, "scenario", "schema_version", 1, issues);
    if (version != 1) issues.add("scenario.schema_version: unsupported version");

    scn.duration = num_or(j, "scenario", "duration_s", scn.duration, issues);
    scn.seed = u64_or(j, "scenario", "seed", scn.seed, issues);
    scn.chirp_rate = num_or(j, "scenario", "chirp_rate_hz", scn.chirp_rate, issues);
    scn.chirp_jitter = num_or(j, "scenario", "chirp_jitter_s", scn.chirp_jitter, issues);
    scn.imu_rate = num_or(j, "scenario", "imu_rate_hz", scn.imu_rate, issues);
    scn.imu_clock_offset =
        num_or(j, "scenario", "imu_clock_offset_s", scn.imu_clock_offset, issues);
    scn.truth_rate = num_or(j, "scenario", "truth_rate_hz", scn.truth_rate, issues);
    scn.sim.range_path_loss =
        bool_or(j, "scenario", "range_path_loss", scn.sim.range_path_loss, issues);
    double mount_yaw = num_or(j, "scenario", "anchor_mount_yaw_deg", 0.0, issues);
    scn.sim.anchor_mount = Rotation::about_z(deg2rad(mount_yaw));

    if (j.contains("trajectory")) {
        const json& t = j.at("trajectory");
        const std::string ctx = "scenario.trajectory";
        std::string type = str_or(t, ctx, "type", "hover", issues);
        if (type == "hover") {
            check_keys(t, ctx, {"type", "position_m", "attitude_deg"}, issues);
            scn.trajectory.type = Trajectory::Type::Hover;
            scn.trajectory.position = vec3_or(t, ctx, "position_m", scn.trajectory.position, issues);
            scn.trajectory.attitude =
                euler_deg_or(t, ctx, "attitude_deg", scn.trajectory.attitude, issues);
        } else if (type == "line") {
            check_keys(t, ctx, {"type", "position_m", "end_m", "attitude_deg", "attitude_end_deg"},
                       issues);
            scn.trajectory.type = Trajectory::Type::Line;
            scn.trajectory.position = vec3_or(t, ctx, "position_m", scn.trajectory.position, issues);
            scn.trajectory.line_end = vec3_or(t, ctx, "end_m", scn.trajectory.position, issues);
            scn.trajectory.attitude =
                euler_deg_or(t, ctx, "attitude_deg", scn.trajectory.attitude, issues);
            scn.trajectory.attitude_end =
                euler_deg_or(t, ctx, "attitude_end_deg", scn.trajectory.attitude, issues);
        } else if (type == "circle") {
            check_keys(t, ctx, {"type", "position_m", "attitude_deg", "radius_m", "period_s", "plane"},
                       issues);
            scn.trajectory.type = Trajectory::Type::Circle;
            scn.trajectory.position = vec3_or(t, ctx, "position_m", scn.trajectory.position, issues);
            scn.trajectory.attitude =
                euler_deg_or(t, ctx, "attitude_deg", scn.trajectory.attitude, issues);
            scn.trajectory.radius = num_or(t, ctx, "radius_m", scn.trajectory.radius, issues);
            scn.trajectory.period = num_or(t, ctx, "period_s", scn.trajectory.period, issues);
            std::string plane = str_or(t, ctx, "plane", "xy", issues);
            if (plane == "xy")
                scn.trajectory.plane = Trajectory::Plane::XY;
            else if (plane == "xz")
                scn.trajectory.plane = Trajectory::Plane::XZ;
            else
                issues.add(ctx + ".plane: expected \"xy\" or \"xz\"");
        } else if (type == "waypoints") {
            check_keys(t, ctx, {"type", "points"}, issues);
            scn.trajectory.type = Trajectory::Type::Waypoints;
            if (!t.contains("points") || !t.at("points").is_array()) {
                issues.add(ctx + ".points: expected an array");
            } else {
                for (std::size_t i = 0; i < t.at("points").size(); ++i) {
                    const json& p = t.at("points")[i];
                    std::string pctx = ctx + ".points[" + std::to_string(i) + "]";
                    check_keys(p, pctx, {"t_s", "position_m", "attitude_deg"}, issues);
                    TrajectoryPoint tp;
                    tp.t = num_or(p, pctx, "t_s", 0.0, issues);
                    tp.position = vec3_or(p, pctx, "position_m", {}, issues);
                    tp.attitude = euler_deg_or(p, pctx, "attitude_deg", {}, issues);
                    scn.trajectory.waypoints.push_back(tp);
                }
            }
        } else {
            issues.add(ctx + ".type: unknown trajectory type \"" + type + "\"");
        }
    }

    scn.radar_h = radar_from_json(j.contains("radar_h") ? j.at("radar_h") : json(),
                                  "scenario.radar_h", RadarConfig::default_h(), issues);
    scn.radar_v = radar_from_json(j.contains("radar_v") ? j.at("radar_v") : json(),
                                  "scenario.radar_v", RadarConfig::default_v(), issues);
    scn.anchor = anchor_from_json(j.contains("anchor") ? j.at("anchor") : json(),
                                  "scenario.anchor", issues);
    if (j.contains("noise")) {
        check_keys(j.at("noise"), "scenario.noise", {"power"}, issues);
        scn.noise.noise_power = num_or(j.at("noise"), "scenario.noise", "power", 0.0, issues);
    }
    issues.throw_if_any();
    return scn;
}

Scenario load_scenario(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ValidationError({std::string("scenario file: ") + e.what()});
    }
    return scenario_from_json(j);
}

namespace {

std::string samples_to_base64(const std::vector<std::complex<double>>& samples) {
    return encode_base64(reinterpret_cast<const std::uint8_t*>(samples.data()),
                         samples.size() * sizeof(std::complex<double>));
}

std::vector<std::complex<double>> samples_from_base64(const std::string& text) {
    std::vector<std::uint8_t> bytes = decode_base64(text);
    if (bytes.size() % sizeof(std::complex<double>) != 0)
        throw ValidationError({"log frame: sample payload length is not a multiple of 16"});
    std::vector<std::complex<double>> samples(bytes.size() / sizeof(std::complex<double>));
    std::memcpy(samples.data(), bytes.data(), bytes.size());
    return samples;
}

} // namespace

std::string log_to_string(const MeasurementLog& log) {
    std::ostringstream out;
    json header{{"type", "header"},
                {"schema_version", 1},
                {"seed", log.seed},
                {"chirp_rate_hz", log.chirp_rate},
                {"imu_rate_hz", log.imu_rate},
                {"duration_s", log.duration},
                {"radar_h", radar_to_json(log.radar_h)},
                {"radar_v", radar_to_json(log.radar_v)},
                {"anchor", anchor_to_json(log.anchor)},
                {"noise", {{"power", log.noise.noise_power}, {"seed", log.noise.seed}}},
                {"sample_encoding", "c128le-b64"},
                {"attitude_unit", "rad"}};
    out << header.dump() << '\n';

    auto dump_frames = [&](const std::vector<BasebandFrame>& frames, const char* radar) {
        for (const BasebandFrame& f : frames) {
            json rec{{"type", "frame"},   {"radar", radar},
                     {"t", f.timestamp},  {"visible", f.anchor_visible},
                     {"rx0", samples_to_base64(f.rx[0])},
                     {"rx1", samples_to_base64(f.rx[1])}};
            out << rec.dump() << '\n';
        }
    };
    dump_frames(log.frames_h, "H");
    dump_frames(log.frames_v, "V");

    for (const ImuSample& s : log.imu) {
        json rec{{"type", "imu"},
                 {"t", s.timestamp},
                 {"att", json::array({s.attitude.roll, s.attitude.pitch, s.attitude.yaw})}};
        out << rec.dump() << '\n';
    }
    for (const TruthSample& s : log.truth.samples) {
        json rec{{"type", "truth"},
                 {"t", s.t},
                 {"pos", vec3_json(s.position)},
                 {"att", json::array({s.attitude.roll, s.attitude.pitch, s.attitude.yaw})}};
        out << rec.dump() << '\n';
    }
    return out.str();
}

MeasurementLog log_from_string(const std::string& text) {
    MeasurementLog log;
    Issues issues;
    std::istringstream in(text);
    std::string line;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ValidationError(
                {"log line " + std::to_string(line_no) + ": " + e.what()});
        }
        std::string type = str_or(rec, "log", "type", "", issues);
        if (type == "header") {
            header_seen = true;
            auto version = u64_or(rec, "log.header", "schema_version", 0, issues);
            if (version != 1)
                throw ValidationError({"log.header.schema_version: unsupported version " +
                                       std::to_string(version)});
            std::string enc = str_or(rec, "log.header", "sample_encoding", "", issues);
            if (enc != "c128le-b64")
                throw ValidationError({"log.header.sample_encoding: unsupported encoding"});
            log.seed = u64_or(rec, "log.header", "seed", 0, issues);
            log.chirp_rate = num_or(rec, "log.header", "chirp_rate_hz", 20.0, issues);
            log.imu_rate = num_or(rec, "log.header", "imu_rate_hz", 100.0, issues);
            log.duration = num_or(rec, "log.header", "duration_s", 0.0, issues);
            log.radar_h = radar_from_json(rec.contains("radar_h") ? rec.at("radar_h") : json(),
                                          "log.header.radar_h", RadarConfig::default_h(), issues);
            log.radar_v = radar_from_json(rec.contains("radar_v") ? rec.at("radar_v") : json(),
                                          "log.header.radar_v", RadarConfig::default_v(), issues);
            log.anchor = anchor_from_json(rec.contains("anchor") ? rec.at("anchor") : json(),
                                          "log.header.anchor", issues);
            if (rec.contains("noise")) {
                log.noise.noise_power =
                    num_or(rec.at("noise"), "log.header.noise", "power", 0.0, issues);
                log.noise.seed = u64_or(rec.at("noise"), "log.header.noise", "seed", 0, issues);
            }
        } else if (type == "frame") {
            if (!header_seen) throw ValidationError({"log: frame record before header"});
            BasebandFrame f;
            std::string radar = str_or(rec, "log.frame", "radar", "", issues);
            f.radar_id = radar == "H" ? RadarId::H : RadarId::V;
            if (radar != "H" && radar != "V") issues.add("log.frame.radar: expected H or V");
            f.timestamp = num_or(rec, "log.frame", "t", 0.0, issues);
            f.anchor_visible = bool_or(rec, "log.frame", "visible", true, issues);
            f.rx[0] = samples_from_base64(str_or(rec, "log.frame", "rx0", "", issues));
            f.rx[1] = samples_from_base64(str_or(rec, "log.frame", "rx1", "", issues));
            (f.radar_id == RadarId::H ? log.frames_h : log.frames_v).push_back(std::move(f));
        } else if (type == "imu") {
            Point3 att = vec3_or(rec, "log.imu", "att", {}, issues);
            log.imu.push_back(
                {num_or(rec, "log.imu", "t", 0.0, issues), EulerAngles{att.x, att.y, att.z}});
        } else if (type == "truth") {
            Point3 att = vec3_or(rec, "log.truth", "att", {}, issues);
            log.truth.samples.push_back({num_or(rec, "log.truth", "t", 0.0, issues),
                                         vec3_or(rec, "log.truth", "pos", {}, issues),
                                         EulerAngles{att.x, att.y, att.z}});
        } else {
            issues.add("log line " + std::to_string(line_no) + ": unknown record type");
        }
    }
    if (!header_seen) issues.add("log: missing header record");

    auto check_sorted = [&](const char* what, auto&& times) {
        for (std::size_t i = 1; i < times.size(); ++i)
            if (times[i] < times[i - 1]) {
                issues.add(std::string("log: ") + what + " records not sorted by timestamp");
                return;
            }
    };
    auto frame_times = [](const std::vector<BasebandFrame>& fs) {
        std::vector<double> t;
        for (const auto& f : fs) t.push_back(f.timestamp);
        return t;
    };
    check_sorted("H frame", frame_times(log.frames_h));
    check_sorted("V frame", frame_times(log.frames_v));
    {
        std::vector<double> t;
        for (const auto& s : log.imu) t.push_back(s.timestamp);
        check_sorted("imu", t);
        t.clear();
        for (const auto& s : log.truth.samples) t.push_back(s.t);
        check_sorted("truth", t);
    }
    issues.throw_if_any();
    return log;
}

void save_log(const MeasurementLog& log, const std::filesystem::path& path) {
    atomic_write(path, log_to_string(log));
}

MeasurementLog load_log(const std::filesystem::path& path) {
    return log_from_string(read_file(path));
}

std::vector<PoseRecord> pose_records(const PipelineResult& result) {
    std::vector<PoseRecord> records;
    records.reserve(result.poses.size());
    for (std::size_t i = 0; i < result.poses.size(); ++i) {
        const Pose6DoF& p = result.poses[i];
        PoseRecord rec;
        rec.t = p.timestamp;
        rec.position = p.position;
        rec.attitude = rotation_to_euler(p.attitude);
        rec.quality = i < result.fixes.size() ? result.fixes[i].quality : 0.0;
        records.push_back(rec);
    }
    return records;
}

std::vector<Pose6DoF> to_poses(const std::vector<PoseRecord>& records) {
    std::vector<Pose6DoF> poses;
    poses.reserve(records.size());
    for (const PoseRecord& r : records)
        poses.push_back({r.t, r.position, euler_to_rotation(r.attitude)});
    return poses;
}

std::string drop_stats_summary(const DropStats& s) {
    std::ostringstream out;
    out << "frames_h=" << s.h.frames << " frames_v=" << s.v.frames
        << " no_detection_h=" << s.h.no_detection << " no_detection_v=" << s.v.no_detection
        << " ambiguous_h=" << s.h.ambiguous << " ambiguous_v=" << s.v.ambiguous
        << " snr_dropped_h=" << s.h.filter.dropped_snr
        << " snr_dropped_v=" << s.v.filter.dropped_snr
        << " range_mismatch_h=" << s.h.filter.dropped_range_mismatch
        << " range_mismatch_v=" << s.v.filter.dropped_range_mismatch
        << " paired=" << s.paired << " unpaired_h=" << s.unpaired_h
        << " unpaired_v=" << s.unpaired_v
        << " attitude_out_of_span=" << s.attitude_out_of_span << " poses=" << s.poses;
    return out.str();
}

std::string poses_to_string(const std::vector<PoseRecord>& records, const DropStats* stats) {
    std::ostringstream out;
    out << "# anchorloc poses v1\n";
    out << "# columns: t_s x_m y_m z_m roll_deg pitch_deg yaw_deg quality\n";
    if (stats) out << "# stats: " << drop_stats_summary(*stats) << '\n';
    for (const PoseRecord& r : records) {
        out << format_double(r.t) << ' ' << format_double(r.position.x) << ' '
            << format_double(r.position.y) << ' ' << format_double(r.position.z) << ' '
            << format_double(rad2deg(r.attitude.roll)) << ' '
            << format_double(rad2deg(r.attitude.pitch)) << ' '
            << format_double(rad2deg(r.attitude.yaw)) << ' ' << format_double(r.quality) << '\n';
    }
    return out.str();
}

namespace {

// Inverse of drop_stats_summary for the "# stats:" comment line.
DropStats stats_from_summary(const std::string& text) {
    DropStats s;
    std::istringstream in(text);
    std::string token;
    auto grab = [](const std::string& tok, const char* key, std::size_t& out) {
        std::string prefix = std::string(key) + "=";
        if (tok.rfind(prefix, 0) == 0) out = std::stoul(tok.substr(prefix.size()));
    };
    while (in >> token) {
        grab(token, "frames_h", s.h.frames);
        grab(token, "frames_v", s.v.frames);
        grab(token, "no_detection_h", s.h.no_detection);
        grab(token, "no_detection_v", s.v.no_detection);
        grab(token, "ambiguous_h", s.h.ambiguous);
        grab(token, "ambiguous_v", s.v.ambiguous);
        grab(token, "snr_dropped_h", s.h.filter.dropped_snr);
        grab(token, "snr_dropped_v", s.v.filter.dropped_snr);
        grab(token, "range_mismatch_h", s.h.filter.dropped_range_mismatch);
        grab(token, "range_mismatch_v", s.v.filter.dropped_range_mismatch);
        grab(token, "paired", s.paired);
        grab(token, "unpaired_h", s.unpaired_h);
        grab(token, "unpaired_v", s.unpaired_v);
        grab(token, "attitude_out_of_span", s.attitude_out_of_span);
        grab(token, "poses", s.poses);
    }
    return s;
}

} // namespace

std::vector<PoseRecord> poses_from_string(const std::string& text, DropStats* stats) {
    std::vector<PoseRecord> records;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string marker = "# stats: ";
            if (stats && line.rfind(marker, 0) == 0)
                *stats = stats_from_summary(line.substr(marker.size()));
            continue;
        }
        std::istringstream row(line);
        PoseRecord r;
        double roll_deg = 0.0, pitch_deg = 0.0, yaw_deg = 0.0;
        if (!(row >> r.t >> r.position.x >> r.position.y >> r.position.z >> roll_deg >>
              pitch_deg >> yaw_deg >> r.quality))
            throw ValidationError(
                {"poses line " + std::to_string(line_no) + ": expected 8 numeric columns"});
        r.attitude = {deg2rad(roll_deg), deg2rad(pitch_deg), deg2rad(yaw_deg)};
        records.push_back(r);
    }
    return records;
}

void save_poses(const std::vector<PoseRecord>& records, const DropStats* stats,
                const std::filesystem::path& path) {
    atomic_write(path, poses_to_string(records, stats));
}

std::vector<PoseRecord> load_poses(const std::filesystem::path& path, DropStats* stats) {
    return poses_from_string(read_file(path), stats);
}

namespace {

json percentiles_json(const Percentiles& p) {
    return json{{"p10", p.p10}, {"p50", p.p50}, {"p90", p.p90}};
}

json drop_stats_json(const DropStats& s) {
    auto radar = [](const RadarDropStats& r) {
        return json{{"frames", r.frames},
                    {"no_detection", r.no_detection},
                    {"ambiguous", r.ambiguous},
                    {"kept", r.filter.kept},
                    {"dropped_snr", r.filter.dropped_snr},
                    {"dropped_range_mismatch", r.filter.dropped_range_mismatch}};
    };
    return json{{"h", radar(s.h)},
                {"v", radar(s.v)},
                {"paired", s.paired},
                {"unpaired_h", s.unpaired_h},
                {"unpaired_v", s.unpaired_v},
                {"attitude_out_of_span", s.attitude_out_of_span},
                {"poses", s.poses}};
}

} // namespace

json report_to_json(const ErrorReport& r) {
    json bins = json::array();
    for (const TimeBin& b : r.time_bins) {
        if (b.count == 0) {
            bins.push_back({{"t_start_s", b.t_start}, {"count", 0}});
        } else {
            bins.push_back({{"t_start_s", b.t_start},
                            {"count", b.count},
                            {"median_m", b.median},
                            {"p10_m", b.p10},
                            {"p90_m", b.p90}});
        }
    }
    json cdf = json::array();
    for (const auto& [err, frac] : r.cdf_3d) cdf.push_back(json::array({err, frac}));
    return json{{"schema_version", 1},
                {"pose_count", r.pose_count},
                {"evaluated", r.evaluated},
                {"excluded_outside_truth", r.excluded_outside_truth},
                {"percentiles",
                 {{"x_m", percentiles_json(r.x_m)},
                  {"y_m", percentiles_json(r.y_m)},
                  {"z_m", percentiles_json(r.z_m)},
                  {"roll_deg", percentiles_json(r.roll_deg)},
                  {"pitch_deg", percentiles_json(r.pitch_deg)},
                  {"yaw_deg", percentiles_json(r.yaw_deg)},
                  {"l2_3d_m", percentiles_json(r.l2_m)}}},
                {"time_bins", {{"bin_width_s", r.bin_width}, {"bins", bins}}},
                {"cdf_3d", cdf},
                {"drop_stats", drop_stats_json(r.drops)}};
}

void save_report(const ErrorReport& report, const std::filesystem::path& path) {
    atomic_write(path, report_to_json(report).dump(2) + "\n");
}

json run_config_to_json(const RunConfig& cfg) {
    const char* mode = "auto";
    if (cfg.pipeline.calibration.mode == CalibrationMode::Off) mode = "off";
    if (cfg.pipeline.calibration.mode == CalibrationMode::Required) mode = "required";
    return json{
        {"schema_version", RunConfig::kSchemaVersion},
        {"band",
         {{"half_width_hz", cfg.pipeline.band.half_width_hz},
          {"guard_bins", cfg.pipeline.band.guard_bins},
          {"snr_threshold", cfg.pipeline.band.snr_threshold},
          {"symmetry_tol_bins", cfg.pipeline.band.symmetry_tol_bins}}},
        {"filter",
         {{"snr_threshold", cfg.pipeline.filter.snr_threshold},
          {"max_rx_range_diff_m", cfg.pipeline.filter.max_rx_range_diff},
          {"max_pairing_gap_s", cfg.pipeline.filter.max_pairing_gap}}},
        {"calibration",
         {{"mode", mode},
          {"window_s", cfg.pipeline.calibration.window},
          {"min_confidence", cfg.pipeline.calibration.min_confidence},
          {"fallback_offset_s", cfg.pipeline.calibration.fallback_offset}}},
        {"anchor_mount_yaw_deg", rad2deg(rotation_to_euler(cfg.pipeline.anchor_mount).yaw)},
        {"eval_bin_width_s", cfg.eval_bin_width}};
}

RunConfig run_config_from_json(const json& j) {
    Issues issues;
    RunConfig cfg;
    check_keys(j, "config",
               {"schema_version", "band", "filter", "calibration", "anchor_mount_yaw_deg",
                "eval_bin_width_s"},
               issues);
    auto version = u64_or(j, "config", "schema_version", RunConfig::kSchemaVersion, issues);
    if (version != RunConfig::kSchemaVersion)
        issues.add("config.schema_version: unsupported version");
    if (j.contains("band")) {
        const json& b = j.at("band");
        check_keys(b, "config.band",
                   {"half_width_hz", "guard_bins", "snr_threshold", "symmetry_tol_bins"}, issues);
        cfg.pipeline.band.half_width_hz =
            num_or(b, "config.band", "half_width_hz", cfg.pipeline.band.half_width_hz, issues);
        cfg.pipeline.band.guard_bins = static_cast<int>(
            u64_or(b, "config.band", "guard_bins",
                   static_cast<std::uint64_t>(cfg.pipeline.band.guard_bins), issues));
        cfg.pipeline.band.snr_threshold =
            num_or(b, "config.band", "snr_threshold", cfg.pipeline.band.snr_threshold, issues);
        cfg.pipeline.band.symmetry_tol_bins = num_or(b, "config.band", "symmetry_tol_bins",
                                                     cfg.pipeline.band.symmetry_tol_bins, issues);
    }
    if (j.contains("filter")) {
        const json& f = j.at("filter");
        check_keys(f, "config.filter",
                   {"snr_threshold", "max_rx_range_diff_m", "max_pairing_gap_s"}, issues);
        cfg.pipeline.filter.snr_threshold =
            num_or(f, "config.filter", "snr_threshold", cfg.pipeline.filter.snr_threshold, issues);
        cfg.pipeline.filter.max_rx_range_diff = num_or(
            f, "config.filter", "max_rx_range_diff_m", cfg.pipeline.filter.max_rx_range_diff,
            issues);
        cfg.pipeline.filter.max_pairing_gap = num_or(
            f, "config.filter", "max_pairing_gap_s", cfg.pipeline.filter.max_pairing_gap, issues);
    }
    if (j.contains("calibration")) {
        const json& c = j.at("calibration");
        check_keys(c, "config.calibration",
                   {"mode", "window_s", "min_confidence", "fallback_offset_s"}, issues);
        std::string mode = str_or(c, "config.calibration", "mode", "auto", issues);
        if (mode == "auto")
            cfg.pipeline.calibration.mode = CalibrationMode::Auto;
        else if (mode == "off")
            cfg.pipeline.calibration.mode = CalibrationMode::Off;
        else if (mode == "required")
            cfg.pipeline.calibration.mode = CalibrationMode::Required;
        else
            issues.add("config.calibration.mode: expected auto, off, or required");
        cfg.pipeline.calibration.window =
            num_or(c, "config.calibration", "window_s", cfg.pipeline.calibration.window, issues);
        cfg.pipeline.calibration.min_confidence =
            num_or(c, "config.calibration", "min_confidence",
                   cfg.pipeline.calibration.min_confidence, issues);
        cfg.pipeline.calibration.fallback_offset =
            num_or(c, "config.calibration", "fallback_offset_s",
                   cfg.pipeline.calibration.fallback_offset, issues);
    }
    double mount_yaw = num_or(j, "config", "anchor_mount_yaw_deg", 0.0, issues);
    cfg.pipeline.anchor_mount = Rotation::about_z(deg2rad(mount_yaw));
    cfg.eval_bin_width = num_or(j, "config", "eval_bin_width_s", cfg.eval_bin_width, issues);

    if (cfg.pipeline.band.snr_threshold < 0.0)
        issues.add("config.band.snr_threshold: must be >= 0");
    if (cfg.pipeline.band.guard_bins < 1) issues.add("config.band.guard_bins: must be >= 1");
    if (cfg.pipeline.filter.snr_threshold < 0.0)
        issues.add("config.filter.snr_threshold: must be >= 0");
    if (!(cfg.pipeline.filter.max_rx_range_diff > 0.0))
        issues.add("config.filter.max_rx_range_diff_m: must be > 0");
    if (cfg.pipeline.filter.max_pairing_gap < 0.0)
        issues.add("config.filter.max_pairing_gap_s: must be >= 0 (0 derives from the chirp rate)");
    if (!(cfg.pipeline.calibration.window > 0.0))
        issues.add("config.calibration.window_s: must be > 0");
    if (!(cfg.eval_bin_width > 0.0)) issues.add("config.eval_bin_width_s: must be > 0");
    issues.throw_if_any();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ValidationError({std::string("config file: ") + e.what()});
    }
    return run_config_from_json(j);
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace anchorloc::io
