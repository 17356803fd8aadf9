#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ewm/base.hpp"
#include "ewm/measures.hpp"
#include "ewm/version.hpp"

namespace ewm {
namespace io {

using nlohmann::json;

inline json params_to_json(const ModelParams& p) {
    json j{{"n", p.n}, {"k", p.k}, {"R", p.R}, {"M", p.M}};
    if (p.N) j["N"] = *p.N;
    return j;
}

inline json field_envelope(const Field& f, const ModelParams& p, std::uint64_t seed) {
    json j;
    j["version"] = kVersion;
    j["params"] = params_to_json(p);
    j["seed"] = seed;
    j["values"] = f.v;
    return j;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary); // binary keeps output byte-identical across reruns
    if (!out) throw std::runtime_error("write_text: cannot open " + path);
    out << text;
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline void write_field_csv(const std::string& path, const Field& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_field_csv: cannot open " + path);
    out << "r,value\n";
    char buf[64];
    for (int i = 0; i <= f.grid.M; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", f.grid.node(i), f.v[i]);
        out << buf;
    }
}

// Binary ensemble layout: magic, params header, then little-endian 64-bit
// floats, count x (M+1) node values per sample.
inline constexpr char kEnsembleMagic[8] = {'E', 'W', 'M', 'E', 'N', 'S', '0', '1'};

inline void write_ensemble(const std::string& path, const Ensemble& e) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_ensemble: cannot open " + path);
    out.write(kEnsembleMagic, 8);
    std::uint32_t n = e.params.n, k = e.params.k, M = e.grid.M, pad = 0;
    std::uint64_t seed = e.seed, count = e.samples.size();
    double R = e.grid.R;
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&k), 4);
    out.write(reinterpret_cast<const char*>(&R), 8);
    out.write(reinterpret_cast<const char*>(&M), 4);
    out.write(reinterpret_cast<const char*>(&pad), 4);
    out.write(reinterpret_cast<const char*>(&seed), 8);
    out.write(reinterpret_cast<const char*>(&count), 8);
    for (const Field& f : e.samples)
        out.write(reinterpret_cast<const char*>(f.v.data()), static_cast<std::streamsize>(f.v.size() * 8));
}

inline Ensemble read_ensemble(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_ensemble: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (std::memcmp(magic, kEnsembleMagic, 8) != 0) throw std::runtime_error("read_ensemble: bad magic");
    std::uint32_t n, k, M, pad;
    std::uint64_t seed, count;
    double R;
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&k), 4);
    in.read(reinterpret_cast<char*>(&R), 8);
    in.read(reinterpret_cast<char*>(&M), 4);
    in.read(reinterpret_cast<char*>(&pad), 4);
    in.read(reinterpret_cast<char*>(&seed), 8);
    in.read(reinterpret_cast<char*>(&count), 8);

    Ensemble e;
    e.params.n = static_cast<int>(n);
    e.params.k = static_cast<int>(k);
    e.params.R = R;
    e.params.M = static_cast<int>(M);
    e.grid = RadialGrid(R, static_cast<int>(M));
    e.seed = seed;
    e.samples.reserve(count);
    for (std::uint64_t s = 0; s < count; ++s) {
        Field f(e.grid);
        in.read(reinterpret_cast<char*>(f.v.data()), static_cast<std::streamsize>(f.v.size() * 8));
        if (!in) throw std::runtime_error("read_ensemble: truncated file");
        e.samples.push_back(std::move(f));
    }
    return e;
}

inline constexpr char kTrajectoryMagic[8] = {'E', 'W', 'M', 'T', 'R', 'J', '0', '1'};

inline void write_trajectory_frames(const std::string& path, const std::vector<PhaseState>& frames) {
    if (frames.empty()) throw std::invalid_argument("write_trajectory_frames: no frames");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_trajectory_frames: cannot open " + path);
    out.write(kTrajectoryMagic, 8);
    std::uint32_t M = frames.front().psi.grid.M, pad = 0;
    double R = frames.front().psi.grid.R;
    std::uint64_t count = frames.size();
    out.write(reinterpret_cast<const char*>(&M), 4);
    out.write(reinterpret_cast<const char*>(&pad), 4);
    out.write(reinterpret_cast<const char*>(&R), 8);
    out.write(reinterpret_cast<const char*>(&count), 8);
    for (const PhaseState& s : frames) {
        out.write(reinterpret_cast<const char*>(&s.time), 8);
        out.write(reinterpret_cast<const char*>(s.psi.v.data()), static_cast<std::streamsize>(s.psi.v.size() * 8));
        out.write(reinterpret_cast<const char*>(s.W.v.data()), static_cast<std::streamsize>(s.W.v.size() * 8));
    }
}

} // namespace io
} // namespace ewm
