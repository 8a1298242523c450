// JSON text with every floating-point number written at 17 significant digits.
#pragma once

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>

#include "json.hpp"

namespace beacons {

inline void dump17(const nlohmann::json& j, std::string& out, int indent = 0) {
    const std::string pad(indent + 1, ' '), close(indent, ' ');
    if (j.is_number_float() && !std::isfinite(j.get<double>())) {
        out += "null";
    } else if (j.is_number_float()) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", j.get<double>());
        out += buf;
        if (!std::strpbrk(buf, ".eE")) out += ".0";
    } else if (j.is_object()) {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        size_t k = 0;
        for (auto it = j.begin(); it != j.end(); ++it, ++k) {
            out += pad + nlohmann::json(it.key()).dump() + ": ";
            dump17(it.value(), out, indent + 1);
            out += k + 1 < j.size() ? ",\n" : "\n";
        }
        out += close + "}";
    } else if (j.is_array()) {
        if (j.empty()) {
            out += "[]";
            return;
        }
        out += "[";
        for (size_t k = 0; k < j.size(); ++k) {
            if (k) out += ", ";
            dump17(j[k], out, indent + 1);
        }
        out += "]";
    } else {
        out += j.dump();
    }
}

inline std::string json17(const nlohmann::json& j) {
    std::string s;
    dump17(j, s);
    return s + "\n";
}

}  // namespace beacons
