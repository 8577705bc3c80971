#pragma once

// Graph model for DC voltage-controlled circuits.
//
// A circuit is a multigraph: a node count plus an ordered list of two-terminal
// elements. Parallel elements between the same pair of nodes are allowed and
// element order is significant (solvers report branch quantities in it).
//
// Sign conventions used throughout the library:
//   - a voltage source of value E on terminals (a, b) enforces e_b - e_a = E;
//   - a branch current is positive when it flows from terminal a to terminal b.

#include "kbraess/error.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kbraess {

enum class NodeId : std::size_t {};

[[nodiscard]] constexpr std::size_t to_index(NodeId n) noexcept {
    return static_cast<std::size_t>(n);
}

enum class ElementKind { Resistor, VoltageSource, Capacitor, Inductor };

[[nodiscard]] constexpr std::string_view kind_code(ElementKind k) noexcept {
    switch (k) {
        case ElementKind::Resistor: return "R";
        case ElementKind::VoltageSource: return "V";
        case ElementKind::Capacitor: return "C";
        case ElementKind::Inductor: return "L";
    }
    return "?";
}

struct Element {
    ElementKind kind = ElementKind::Resistor;
    double value = 0.0;  // ohms, volts, farads or henries depending on kind
    NodeId a{};
    NodeId b{};

    static Element resistor(std::size_t a, std::size_t b, double ohms) {
        return {ElementKind::Resistor, ohms, NodeId{a}, NodeId{b}};
    }
    static Element source(std::size_t a, std::size_t b, double volts) {
        return {ElementKind::VoltageSource, volts, NodeId{a}, NodeId{b}};
    }
    static Element capacitor(std::size_t a, std::size_t b, double farads) {
        return {ElementKind::Capacitor, farads, NodeId{a}, NodeId{b}};
    }
    static Element inductor(std::size_t a, std::size_t b, double henries) {
        return {ElementKind::Inductor, henries, NodeId{a}, NodeId{b}};
    }

    [[nodiscard]] bool is_resistor() const noexcept { return kind == ElementKind::Resistor; }
    [[nodiscard]] bool is_source() const noexcept { return kind == ElementKind::VoltageSource; }

    friend bool operator==(const Element&, const Element&) = default;
};

/// Link attached to an existing circuit: a resistor or a voltage source.
struct LinkSpec {
    NodeId a{};
    NodeId b{};
    Element element;

    static LinkSpec resistor(std::size_t a, std::size_t b, double ohms) {
        return {NodeId{a}, NodeId{b}, Element::resistor(a, b, ohms)};
    }
    static LinkSpec source(std::size_t a, std::size_t b, double volts) {
        return {NodeId{a}, NodeId{b}, Element::source(a, b, volts)};
    }
};

namespace detail {

inline void validate_element(const Element& e, std::size_t node_count, std::size_t position) {
    const auto where = [&] { return "element " + std::to_string(position) + ": "; };
    if (to_index(e.a) >= node_count || to_index(e.b) >= node_count) {
        throw CircuitError(where() + "terminal index out of range (node count " +
                           std::to_string(node_count) + ")");
    }
    if (e.a == e.b) {
        throw CircuitError(where() + "both terminals on node " + std::to_string(to_index(e.a)));
    }
    if (!std::isfinite(e.value)) {
        throw CircuitError(where() + "value is not finite");
    }
    if (e.is_resistor() && !(e.value > 0.0)) {
        throw CircuitError(where() + "resistance must be strictly positive");
    }
}

}  // namespace detail

/// Immutable, validated circuit. Edits produce new values.
class Circuit {
public:
    Circuit(std::size_t node_count, std::vector<Element> elements)
        : node_count_(node_count), elements_(std::move(elements)) {
        for (std::size_t i = 0; i < elements_.size(); ++i) {
            detail::validate_element(elements_[i], node_count_, i);
        }
    }

    [[nodiscard]] std::size_t node_count() const noexcept { return node_count_; }
    [[nodiscard]] std::size_t element_count() const noexcept { return elements_.size(); }
    [[nodiscard]] std::span<const Element> elements() const noexcept { return elements_; }
    [[nodiscard]] const Element& element(std::size_t i) const { return elements_.at(i); }

    friend bool operator==(const Circuit&, const Circuit&) = default;

private:
    std::size_t node_count_;
    std::vector<Element> elements_;
};

[[nodiscard]] inline Circuit build_circuit(std::size_t node_count, std::vector<Element> elements) {
    return Circuit(node_count, std::move(elements));
}

/// Returns a copy of `c` with the link appended as its last element.
[[nodiscard]] inline Circuit add_link(const Circuit& c, const LinkSpec& link) {
    Element e = link.element;
    e.a = link.a;
    e.b = link.b;
    std::vector<Element> elements(c.elements().begin(), c.elements().end());
    elements.push_back(e);
    return Circuit(c.node_count(), std::move(elements));
}

}  // namespace kbraess
