// SPDX-License-Identifier: Apache-2.0
#include "ftft/dynamics.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "json.hpp"

#include "ftft/error.hpp"
#include "ftft/format.hpp"

namespace ftft::dynamics {

using nlohmann::json;

namespace {

const json& field(const json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(line, std::string("missing field \"") + key + "\"");
    return *it;
}

std::string string_field(const json& obj, const char* key, std::size_t line) {
    const json& v = field(obj, key, line);
    if (!v.is_string()) throw ParseError(line, std::string("field \"") + key + "\" must be a string");
    return v.get<std::string>();
}

std::uint64_t uint_field(const json& obj, const char* key, std::size_t line) {
    const json& v = field(obj, key, line);
    if (!v.is_number_unsigned())
        throw ParseError(line, std::string("field \"") + key + "\" must be a non-negative integer");
    return v.get<std::uint64_t>();
}

json parse_line(const std::string& text, std::size_t line) {
    json obj = json::parse(text, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) throw ParseError(line, "malformed line");
    return obj;
}

}  // namespace

void validate(const TrainingDynamics& d) {
    if (d.num_checkpoints < 2) throw DataError("num_checkpoints must be >= 2");
    if (d.num_params == 0) throw DataError("num_params must be positive");
    std::unordered_set<InstanceId> seen;
    for (const Record& r : d.records) {
        if (!seen.insert(r.id).second) throw DataError("duplicate instance id " + std::to_string(r.id));
        if (r.gold < 0) throw DataError("negative gold label for instance " + std::to_string(r.id));
        if (r.p_true.size() != d.num_checkpoints)
            throw DataError("p_true length mismatch for instance " + std::to_string(r.id));
        for (double p : r.p_true)
            if (!std::isfinite(p) || p < 0.0 || p > 1.0)
                throw DataError("probability out of range for instance " + std::to_string(r.id));
    }
}

TrainingDynamics parse_dynamics(std::istream& in) {
    TrainingDynamics d;
    std::string text;
    std::size_t line = 0;

    auto next = [&]() -> bool {
        if (!std::getline(in, text)) return false;
        ++line;
        if (!text.empty() && text.back() == '\r') text.pop_back();
        return true;
    };

    if (!next()) throw ParseError(1, "empty input, expected header");
    const json header = parse_line(text, line);
    const std::string schema = string_field(header, "schema_version", line);
    if (schema != kSchemaVersion) throw ParseError(line, "unknown schema_version \"" + schema + "\"");
    d.run_id = string_field(header, "run_id", line);
    d.model_name = string_field(header, "model_name", line);
    d.num_params = uint_field(header, "num_params", line);
    if (d.num_params == 0) throw ParseError(line, "num_params must be positive");
    d.dataset_name = string_field(header, "dataset_name", line);
    const std::uint64_t expected = uint_field(header, "num_instances", line);
    d.num_checkpoints = uint_field(header, "num_checkpoints", line);
    if (d.num_checkpoints < 2) throw ParseError(line, "num_checkpoints must be >= 2");

    std::unordered_set<InstanceId> seen;
    d.records.reserve(expected);
    while (next()) {
        if (text.empty()) {
            // a single trailing newline is fine; blank lines in between are not
            if (in.peek() == std::char_traits<char>::eof()) break;
            throw ParseError(line, "malformed line (blank)");
        }
        const json obj = parse_line(text, line);
        Record r;
        r.id = uint_field(obj, "id", line);
        const json& gold = field(obj, "gold", line);
        if (!gold.is_number_unsigned()) throw ParseError(line, "field \"gold\" must be a non-negative integer");
        r.gold = gold.get<int>();
        const json& p = field(obj, "p_true", line);
        if (!p.is_array()) throw ParseError(line, "field \"p_true\" must be an array");
        if (p.size() != d.num_checkpoints)
            throw ParseError(line, "p_true length " + std::to_string(p.size()) +
                                       " does not match num_checkpoints " + std::to_string(d.num_checkpoints));
        r.p_true.reserve(p.size());
        for (const json& v : p) {
            if (!v.is_number()) throw ParseError(line, "p_true entries must be numbers");
            const double x = v.get<double>();
            if (!std::isfinite(x) || x < 0.0 || x > 1.0) throw ParseError(line, "probability out of range");
            r.p_true.push_back(x);
        }
        if (!seen.insert(r.id).second) throw ParseError(line, "duplicate instance id " + std::to_string(r.id));
        d.records.push_back(std::move(r));
    }
    if (in.bad()) throw DataError("read error after line " + std::to_string(line));
    if (d.records.size() != expected)
        throw ParseError(line, "header declares " + std::to_string(expected) + " instances but " +
                                   std::to_string(d.records.size()) + " records follow");
    return d;
}

TrainingDynamics read_dynamics_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    try {
        return parse_dynamics(in);
    } catch (const ParseError& e) {
        throw DataError(path + ": " + e.what());
    }
}

void write_dynamics(const TrainingDynamics& d, std::ostream& out) {
    validate(d);
    // Field order is fixed, so the header is assembled by hand rather than
    // through json's key-sorted object.
    out << "{\"schema_version\":" << json(kSchemaVersion).dump() << ",\"run_id\":" << json(d.run_id).dump()
        << ",\"model_name\":" << json(d.model_name).dump() << ",\"num_params\":" << d.num_params
        << ",\"dataset_name\":" << json(d.dataset_name).dump() << ",\"num_instances\":" << d.records.size()
        << ",\"num_checkpoints\":" << d.num_checkpoints << "}\n";
    for (const Record& r : d.records) {
        out << "{\"id\":" << r.id << ",\"gold\":" << r.gold << ",\"p_true\":[";
        for (std::size_t i = 0; i < r.p_true.size(); ++i) {
            if (i) out << ',';
            out << format_exact(r.p_true[i]);
        }
        out << "]}\n";
    }
    if (!out) throw DataError("write failed");
}

void write_dynamics_file(const TrainingDynamics& d, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + path + " for writing");
    write_dynamics(d, out);
    out.flush();
    if (!out) throw DataError("write failed: " + path);
}

}  // namespace ftft::dynamics
