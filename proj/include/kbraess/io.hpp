#pragma once

// JSON file formats.
//
// Circuit:  {"nodes": N, "elements": [{"kind": "R"|"V"|"C"|"L", "value": x, "a": i, "b": j}, ...]}
// Network:  {"x12": x|null, "x13": x|null, "x23": x|null, "alpha": a, "beta1": b1,
//            "beta2": b2, "Pc": pc, "Pmax": [p1, p2], "Fmax": [f12, f13, f23]}
//           limits may be the string "inf". Unknown keys are rejected in both.

#include "kbraess/circuit.hpp"
#include "kbraess/dcopf.hpp"
#include "kbraess/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>

namespace kbraess {

namespace detail {

inline void require_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                         std::string_view what) {
    if (!j.is_object()) throw FormatError(std::string(what) + ": expected a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw FormatError(std::string(what) + ": unknown key \"" + key + "\"");
        }
    }
    for (auto key : allowed) {
        if (!j.contains(key)) throw FormatError(std::string(what) + ": missing key \"" + std::string(key) + "\"");
    }
}

inline double number_or_inf(const nlohmann::json& j, std::string_view what) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string() && (j == "inf" || j == "Infinity")) return kInf;
    throw FormatError(std::string(what) + ": expected a number or \"inf\"");
}

inline std::size_t node_index(const nlohmann::json& j, std::string_view what) {
    if (!j.is_number_integer() || j.get<long long>() < 0) {
        throw FormatError(std::string(what) + ": node index must be a nonnegative integer");
    }
    return j.get<std::size_t>();
}

inline double number(const nlohmann::json& j, std::string_view what) {
    if (!j.is_number()) throw FormatError(std::string(what) + ": expected a number");
    return j.get<double>();
}

}  // namespace detail

[[nodiscard]] inline Circuit circuit_from_json(const nlohmann::json& j) {
    detail::require_keys(j, {"nodes", "elements"}, "circuit");
    auto nodes = detail::node_index(j["nodes"], "nodes");
    if (!j["elements"].is_array()) throw FormatError("circuit: \"elements\" must be an array");

    std::vector<Element> elements;
    for (const auto& item : j["elements"]) {
        auto where = "elements[" + std::to_string(elements.size()) + "]";
        detail::require_keys(item, {"kind", "value", "a", "b"}, where);
        if (!item["kind"].is_string()) throw FormatError(where + ": kind must be a string");
        auto code = item["kind"].get<std::string>();
        Element e;
        if (code == "R") e.kind = ElementKind::Resistor;
        else if (code == "V") e.kind = ElementKind::VoltageSource;
        else if (code == "C") e.kind = ElementKind::Capacitor;
        else if (code == "L") e.kind = ElementKind::Inductor;
        else throw FormatError(where + ": unknown kind \"" + code + "\"");
        e.value = detail::number(item["value"], where);
        e.a = NodeId{detail::node_index(item["a"], where)};
        e.b = NodeId{detail::node_index(item["b"], where)};
        elements.push_back(e);
    }
    return build_circuit(nodes, std::move(elements));
}

[[nodiscard]] inline nlohmann::json circuit_to_json(const Circuit& c) {
    nlohmann::json elements = nlohmann::json::array();
    for (const auto& e : c.elements()) {
        elements.push_back({{"kind", std::string(kind_code(e.kind))},
                            {"value", e.value},
                            {"a", to_index(e.a)},
                            {"b", to_index(e.b)}});
    }
    return {{"nodes", c.node_count()}, {"elements", elements}};
}

[[nodiscard]] inline ThreeBusNetwork network_from_json(const nlohmann::json& j) {
    detail::require_keys(j, {"x12", "x13", "x23", "alpha", "beta1", "beta2", "Pc", "Pmax", "Fmax"},
                         "network");
    ThreeBusNetwork n;
    auto reactance = [&](const char* key) -> std::optional<double> {
        if (j[key].is_null()) return std::nullopt;
        return detail::number(j[key], key);
    };
    n.x12 = reactance("x12");
    n.x13 = reactance("x13");
    n.x23 = reactance("x23");
    n.alpha = detail::number(j["alpha"], "alpha");
    n.beta1 = detail::number(j["beta1"], "beta1");
    n.beta2 = detail::number(j["beta2"], "beta2");
    n.pc = detail::number(j["Pc"], "Pc");
    if (!j["Pmax"].is_array() || j["Pmax"].size() != 2) throw FormatError("Pmax: expected 2 values");
    if (!j["Fmax"].is_array() || j["Fmax"].size() != 3) throw FormatError("Fmax: expected 3 values");
    for (std::size_t k = 0; k < 2; ++k) n.pmax[k] = detail::number_or_inf(j["Pmax"][k], "Pmax");
    for (std::size_t k = 0; k < 3; ++k) n.fmax[k] = detail::number_or_inf(j["Fmax"][k], "Fmax");
    n.validate();
    return n;
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path + ": " + e.what());
    }
}

}  // namespace kbraess
