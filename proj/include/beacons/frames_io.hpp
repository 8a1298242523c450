#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "fv.hpp"

namespace beacons {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline nlohmann::json grid_to_json(const GridSpec& g) {
    nlohmann::json j;
    j["dim"] = g.dim;
    j["lo"] = {g.lo[0], g.lo[1]};
    j["hi"] = {g.hi[0], g.hi[1]};
    j["n"] = {g.n[0], g.n[1]};
    j["ghost"] = g.ghost;
    j["bc"] = {g.bc[0] == Boundary::periodic ? "periodic" : "outflow",
               g.bc[1] == Boundary::periodic ? "periodic" : "outflow"};
    return j;
}

inline GridSpec grid_from_json(const nlohmann::json& j) {
    GridSpec g;
    g.dim = j.at("dim");
    g.lo = {j.at("lo")[0].get<double>(), j.at("lo")[1].get<double>()};
    g.hi = {j.at("hi")[0].get<double>(), j.at("hi")[1].get<double>()};
    g.n = {j.at("n")[0].get<int>(), j.at("n")[1].get<int>()};
    g.ghost = j.at("ghost");
    for (int k = 0; k < 2; ++k) g.bc[k] = j.at("bc")[k] == "periodic" ? Boundary::periodic : Boundary::outflow;
    return g;
}

inline std::string frame_csv(const StateField& f, const std::vector<std::string>& names) {
    std::ostringstream os;
    const bool two = f.grid.dim == 2;
    os << (two ? "i,j,x,y" : "i,x");
    for (auto& n : names) os << ',' << n;
    os << '\n';
    for (int j = 0; j < f.ny(); ++j)
        for (int i = 0; i < f.nx(); ++i) {
            os << i;
            if (two) os << ',' << j;
            os << ',' << fmt17(f.grid.center(0, i));
            if (two) os << ',' << fmt17(f.grid.center(1, j));
            for (int c = 0; c < f.m; ++c) os << ',' << fmt17(f.at(i, j)[c]);
            os << '\n';
        }
    return os.str();
}

inline std::string frame_name(int k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%04d.csv", k);
    return buf;
}

inline nlohmann::json frames_manifest(const FrameSeries& s) {
    nlohmann::json j;
    j["system"] = s.system;
    j["components"] = s.components;
    j["times"] = s.times;
    j["grid"] = grid_to_json(s.grid());
    j["solver"] = {{"flux", to_string(s.config.flux)},
                   {"limiter", to_string(s.config.limiter)},
                   {"cfl", s.config.cfl},
                   {"t_end", s.config.t_end},
                   {"frame_count", s.config.frame_count}};
    j["files"] = nlohmann::json::array();
    for (size_t k = 0; k < s.frames.size(); ++k) j["files"].push_back(frame_name(static_cast<int>(k)));
    return j;
}

inline void write_frames(const FrameSeries& s, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (size_t k = 0; k < s.frames.size(); ++k) {
        std::ofstream os(dir / frame_name(static_cast<int>(k)));
        if (!os) throw std::runtime_error("cannot write frame in " + dir.string());
        os << frame_csv(s.frames[k], s.components);
    }
    std::ofstream(dir / "manifest.json") << frames_manifest(s).dump(2) << '\n';
}

inline FrameSeries read_frames(const std::filesystem::path& dir) {
    std::ifstream is(dir / "manifest.json");
    if (!is) throw std::runtime_error("missing manifest in " + dir.string());
    nlohmann::json j = nlohmann::json::parse(is);
    FrameSeries s;
    s.system = j.at("system");
    s.components = j.at("components").get<std::vector<std::string>>();
    s.times = j.at("times").get<std::vector<double>>();
    auto& sv = j.at("solver");
    s.config.flux = flux_from_string(sv.at("flux"));
    s.config.limiter = limiter_from_string(sv.at("limiter"));
    s.config.cfl = sv.at("cfl");
    s.config.t_end = sv.at("t_end");
    s.config.frame_count = sv.at("frame_count");
    GridSpec g = grid_from_json(j.at("grid"));
    const int m = static_cast<int>(s.components.size());
    const int skip = g.dim == 2 ? 4 : 2;
    for (auto& name : j.at("files")) {
        std::ifstream fs(dir / name.get<std::string>());
        if (!fs) throw std::runtime_error("missing frame file " + name.get<std::string>());
        StateField f(g, m);
        std::string line;
        std::getline(fs, line);
        for (int j2 = 0; j2 < f.ny(); ++j2)
            for (int i = 0; i < f.nx(); ++i) {
                if (!std::getline(fs, line)) throw std::runtime_error("truncated frame file");
                std::stringstream ls(line);
                std::string cell;
                for (int k = 0; k < skip; ++k) std::getline(ls, cell, ',');
                for (int c = 0; c < m; ++c) {
                    std::getline(ls, cell, ',');
                    f.at(i, j2)[c] = std::stod(cell);
                }
            }
        s.frames.push_back(std::move(f));
    }
    return s;
}

}  // namespace beacons
