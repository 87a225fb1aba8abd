#pragma once

// File formats: grid-function JSON (flat [re, im] pairs plus the spec
// header), decomposition JSON with cube literals in stable order, and the
// bit-stable binary operator cache (row-major, 8-byte little-endian
// doubles, interleaved re/im), keyed by the configuration hash.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dyadic_tb/cz_operator.hpp"
#include "dyadic_tb/grid_function.hpp"
#include "dyadic_tb/report.hpp"
#include "dyadic_tb/stopping_time.hpp"

namespace dytb {

inline nlohmann::json grid_function_to_json(const GridFunction& f) {
    nlohmann::json j;
    j["spec"]["n"] = f.spec.n;
    j["spec"]["L"] = f.spec.L;
    nlohmann::json values = nlohmann::json::array();
    for (const auto& v : f.values) values.push_back({v.real(), v.imag()});
    j["values"] = std::move(values);
    return j;
}

inline GridFunction grid_function_from_json(const nlohmann::json& j) {
    const GridSpec spec(j.at("spec").at("n").get<int>(), j.at("spec").at("L").get<int>());
    GridFunction f(spec);
    const auto& values = j.at("values");
    if (static_cast<std::int64_t>(values.size()) != spec.cell_count())
        throw std::invalid_argument("grid function value count does not match the spec");
    for (std::size_t i = 0; i < values.size(); ++i)
        f.values[i] = cplx{values[i].at(0).get<double>(), values[i].at(1).get<double>()};
    return f;
}

inline nlohmann::json decomposition_to_json(const SawtoothDecomposition& d) {
    nlohmann::json j;
    j["q1"] = format_cube(d.q1, d.spec.n);
    j["params"]["delta"] = d.params.delta;
    j["params"]["threshold"] = d.params.threshold;
    j["params"]["dilate_family"] = dilate_family_name(d.params.family);
    const auto dump = [&](const std::vector<DyadicCube>& cubes) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& q : cubes) arr.push_back(format_cube(q, d.spec.n));
        return arr;
    };
    j["omega1"] = dump(d.omega1);
    j["omega_buffer"] = dump(d.omega_buffer);
    j["bad"] = dump(d.bad);
    j["grid"]["n"] = d.spec.n;
    j["grid"]["L"] = d.spec.L;
    return j;
}

// ---------------------------------------------------------------------------
// Operator cache

inline constexpr char kOperatorMagic[8] = {'D', 'T', 'B', 'O', 'P', '0', '0', '1'};

inline void write_u64_le(std::ofstream& os, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(buf, 8);
}

inline std::uint64_t read_u64_le(std::ifstream& is) {
    unsigned char buf[8];
    is.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

inline void save_operator(const CZOperator& op, const std::string& path, std::uint64_t key) {
    static_assert(std::endian::native == std::endian::little,
                  "operator cache assumes a little-endian host");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open operator cache for writing: " + path);
    os.write(kOperatorMagic, 8);
    write_u64_le(os, key);
    write_u64_le(os, static_cast<std::uint64_t>(op.spec().n));
    write_u64_le(os, static_cast<std::uint64_t>(op.spec().L));
    const auto& m = op.raw();
    os.write(reinterpret_cast<const char*>(m.data()),
             static_cast<std::streamsize>(m.size() * sizeof(cplx)));
    if (!os) throw std::runtime_error("failed writing operator cache: " + path);
}

inline CZOperator load_operator(const std::string& path, std::uint64_t expected_key) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open operator cache: " + path);
    char magic[8];
    is.read(magic, 8);
    if (std::memcmp(magic, kOperatorMagic, 8) != 0)
        throw std::runtime_error("operator cache has wrong magic: " + path);
    const std::uint64_t key = read_u64_le(is);
    if (key != expected_key) throw std::runtime_error("operator cache key mismatch: " + path);
    const int dim = static_cast<int>(read_u64_le(is));
    const int depth = static_cast<int>(read_u64_le(is));
    const GridSpec spec(dim, depth);
    const auto n = static_cast<std::size_t>(spec.cell_count());
    std::vector<cplx> m(n * n);
    is.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(cplx)));
    if (!is) throw std::runtime_error("operator cache truncated: " + path);
    return CZOperator(spec, std::move(m));
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);  // binary keeps LF endings
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << content;
    if (!os) throw std::runtime_error("failed writing: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace dytb
