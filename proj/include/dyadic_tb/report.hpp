#pragma once

// Canonical report emission. Reports must be byte-identical across runs
// with the same config and seed, so floats are always printed as %.12e,
// object keys come out sorted, and line endings are LF. The companion CSV
// carries (metric, value, config_hash, seed) rows; metric names carry the
// equation tag of the check they measure.

#include <cinttypes>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace dytb {

struct CheckItem {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;  // value <= threshold
};

struct BoundReport {
    std::map<std::string, double> metrics;  // sorted by key by construction
    std::vector<CheckItem> checks;
    std::string config_hash;
    std::uint64_t seed = 0;

    void metric(const std::string& name, double value) { metrics[name] = value; }
    void check(const std::string& name, double value, double threshold) {
        checks.push_back({name, value, threshold, value <= threshold});
    }
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
    std::vector<std::string> failing() const {
        std::vector<std::string> out;
        for (const auto& c : checks)
            if (!c.pass) out.push_back(c.name);
        return out;
    }
};

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12e", v);
    return buf;
}

inline std::string escape_json(const std::string& s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

// Canonical serialization of a parsed JSON document: sorted keys (nlohmann
// already stores objects sorted), %.12e floats, no insignificant spaces.
inline void emit_canonical(const nlohmann::json& j, std::string& out) {
    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ',';
                first = false;
                out += '"';
                out += escape_json(it.key());
                out += "\":";
                emit_canonical(it.value(), out);
            }
            out += '}';
            break;
        }
        case nlohmann::json::value_t::array: {
            out += '[';
            bool first = true;
            for (const auto& v : j) {
                if (!first) out += ',';
                first = false;
                emit_canonical(v, out);
            }
            out += ']';
            break;
        }
        case nlohmann::json::value_t::string:
            out += '"';
            out += escape_json(j.get<std::string>());
            out += '"';
            break;
        case nlohmann::json::value_t::number_float:
            out += format_double(j.get<double>());
            break;
        case nlohmann::json::value_t::number_integer:
            out += std::to_string(j.get<std::int64_t>());
            break;
        case nlohmann::json::value_t::number_unsigned:
            out += std::to_string(j.get<std::uint64_t>());
            break;
        case nlohmann::json::value_t::boolean:
            out += j.get<bool>() ? "true" : "false";
            break;
        default:
            out += "null";
    }
}

inline std::string canonical_json(const nlohmann::json& j) {
    std::string out;
    emit_canonical(j, out);
    return out;
}

// FNV-1a over the canonical form; stable across platforms.
inline std::string config_hash_of(const nlohmann::json& config) {
    const std::string s = canonical_json(config);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

inline std::string report_to_json(const BoundReport& rep, const nlohmann::json& config) {
    std::string out = "{\"checks\":[";
    bool first = true;
    for (const auto& c : rep.checks) {
        if (!first) out += ',';
        first = false;
        out += "{\"name\":\"" + escape_json(c.name) + "\",\"pass\":" + (c.pass ? "true" : "false") +
               ",\"threshold\":" + format_double(c.threshold) +
               ",\"value\":" + format_double(c.value) + "}";
    }
    out += "],\"config\":";
    emit_canonical(config, out);
    // fixed measurement conventions, stated in every report
    out += ",\"config_hash\":\"" + rep.config_hash +
           "\",\"conventions\":{\"maximal_family\":\"dyadic-cubes+concentric-doubles\","
           "\"exterior_cells\":\"zero-mass, full-measure\","
           "\"pairing\":\"bilinear\"},\"metrics\":{";
    first = true;
    for (const auto& [k, v] : rep.metrics) {
        if (!first) out += ',';
        first = false;
        out += '"' + escape_json(k) + "\":" + format_double(v);
    }
    out += "},\"seed\":" + std::to_string(rep.seed) + "}\n";
    return out;
}

inline std::string report_to_csv(const BoundReport& rep) {
    std::string out = "metric,value,config_hash,seed\n";
    for (const auto& [k, v] : rep.metrics)
        out += k + "," + format_double(v) + "," + rep.config_hash + "," + std::to_string(rep.seed) + "\n";
    for (const auto& c : rep.checks) {
        out += "check." + c.name + ".value," + format_double(c.value) + "," + rep.config_hash + "," +
               std::to_string(rep.seed) + "\n";
        out += "check." + c.name + ".pass," + format_double(c.pass ? 1.0 : 0.0) + "," +
               rep.config_hash + "," + std::to_string(rep.seed) + "\n";
    }
    return out;
}

}  // namespace dytb
