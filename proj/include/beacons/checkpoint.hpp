// Network checkpoints: JSON header plus one flat parameter array.
#pragma once

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "deepnet.hpp"
#include "json17.hpp"

namespace beacons {

namespace detail {

inline nlohmann::json layer_sizes(const Mlp& n) {
    nlohmann::json s = nlohmann::json::array({n.d_in()});
    for (auto& l : n.layers) s.push_back(l.out);
    return s;
}

inline Mlp mlp_shape(const nlohmann::json& sizes) {
    std::vector<int> s = sizes.get<std::vector<int>>();
    return make_mlp(s, 0);
}

inline void append(std::vector<double>& flat, const Mlp& n) {
    auto p = n.params();
    flat.insert(flat.end(), p.begin(), p.end());
}

inline void take(const std::vector<double>& flat, size_t& k, Mlp& n) {
    const size_t P = n.param_count();
    if (k + P > flat.size()) throw std::invalid_argument("checkpoint: parameter array too short");
    n.set_params(std::vector<double>(flat.begin() + k, flat.begin() + k + P));
    k += P;
}

}  // namespace detail

inline nlohmann::json checkpoint_json(const DeepNet& net) {
    nlohmann::json j;
    j["format"] = "beacons-net";
    j["version"] = 1;
    j["architecture"] = {{"kind", to_string(net.arch.kind)}, {"layers", net.arch.layers}, {"width", net.arch.width}};
    j["seed"] = net.seed;
    j["inputs"] = {{"dims", net.inputs.dims},
                   {"lo", std::vector<double>(net.inputs.lo.begin(), net.inputs.lo.begin() + net.inputs.dims)},
                   {"hi", std::vector<double>(net.inputs.hi.begin(), net.inputs.hi.begin() + net.inputs.dims)}};
    j["components"] = net.m;
    j["target_lo"] = net.lo;
    j["target_hi"] = net.hi;
    std::vector<double> flat;
    if (net.arch.kind == ArchKind::plain) {
        j["plain"] = {{"sizes", detail::layer_sizes(net.plain)}};
        detail::append(flat, net.plain);
    } else {
        nlohmann::json chains = nlohmann::json::array();
        for (auto& ch : net.chains) {
            nlohmann::json c;
            c["lo"] = ch.lo;
            c["hi"] = ch.hi;
            c["e_g"] = ch.e_g;
            c["head"] = detail::layer_sizes(ch.head);
            detail::append(flat, ch.head);
            c["stages"] = nlohmann::json::array();
            for (auto& st : ch.stages) {
                c["stages"].push_back({{"form", to_string(st.map.form)},
                                       {"C", st.map.C},
                                       {"e_f", st.e_f},
                                       {"sizes", detail::layer_sizes(st.net)}});
                detail::append(flat, st.net);
            }
            chains.push_back(std::move(c));
        }
        j["chains"] = std::move(chains);
    }
    j["params"] = flat;
    return j;
}

inline DeepNet checkpoint_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format") != "beacons-net") throw std::invalid_argument("checkpoint: unknown format");
        DeepNet net;
        auto& a = j.at("architecture");
        net.arch.kind = a.at("kind") == "plain" ? ArchKind::plain : ArchKind::beacons;
        net.arch.layers = a.at("layers");
        net.arch.width = a.at("width");
        net.arch.validate();
        net.seed = j.at("seed");
        std::vector<std::pair<double, double>> axes;
        auto lo = j.at("inputs").at("lo").get<std::vector<double>>();
        auto hi = j.at("inputs").at("hi").get<std::vector<double>>();
        if (lo.size() != hi.size()) throw std::invalid_argument("checkpoint: input bounds");
        for (size_t k = 0; k < lo.size(); ++k) axes.push_back({lo[k], hi[k]});
        net.inputs = Normalizer::box(axes);
        net.m = j.at("components");
        net.lo = j.at("target_lo").get<std::vector<double>>();
        net.hi = j.at("target_hi").get<std::vector<double>>();
        auto flat = j.at("params").get<std::vector<double>>();
        size_t k = 0;
        if (net.arch.kind == ArchKind::plain) {
            net.plain = detail::mlp_shape(j.at("plain").at("sizes"));
            detail::take(flat, k, net.plain);
        } else {
            for (auto& c : j.at("chains")) {
                BeaconsChain ch;
                ch.lo = c.at("lo");
                ch.hi = c.at("hi");
                ch.e_g = c.at("e_g");
                ch.head = detail::mlp_shape(c.at("head"));
                detail::take(flat, k, ch.head);
                for (auto& s : c.at("stages")) {
                    SmoothStage st;
                    st.map.form = map_form_from_string(s.at("form"));
                    st.map.C = s.at("C");
                    st.map.validate();
                    st.e_f = s.at("e_f");
                    st.net = detail::mlp_shape(s.at("sizes"));
                    detail::take(flat, k, st.net);
                    ch.stages.push_back(std::move(st));
                }
                net.chains.push_back(std::move(ch));
            }
            if (static_cast<int>(net.chains.size()) != net.m) throw std::invalid_argument("checkpoint: chain count");
        }
        if (k != flat.size()) throw std::invalid_argument("checkpoint: trailing parameters");
        return net;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed checkpoint: ") + e.what());
    }
}

inline void save_checkpoint(const DeepNet& net, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << json17(checkpoint_json(net));
}

inline DeepNet load_checkpoint(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    return checkpoint_from_json(nlohmann::json::parse(in));
}

}  // namespace beacons
