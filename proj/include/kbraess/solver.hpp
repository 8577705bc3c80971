#pragma once

// DC steady-state solution of voltage-controlled circuits.
//
// The pipeline is reduce_steady_state -> node_basis -> solve_dc:
//   1. capacitors are deleted (open at DC) and inductors contracted (short at DC);
//   2. the voltage-source subgraph is split into connected components, each with
//      one representative node; every other node sits at a fixed offset
//      (signed sum of sources on a path) from its representative;
//   3. the representative voltages minimise the resistive loss potential
//         P(e) = sum_k (e_i + off_a - e_j - off_b)^2 / R_k
//      whose stationarity condition is KCL on each source component. P is
//      quadratic, so the minimiser is one SPD linear solve (Eigen LDLT).
//
// One representative per connected piece of the reduced graph is grounded at
// 0 V: the one with the lowest node index.

#include "kbraess/circuit.hpp"
#include "kbraess/detail/disjoint_sets.hpp"
#include "kbraess/error.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

namespace kbraess {

/// Relative tolerance for residuals and source-loop consistency.
inline constexpr double kResidualTolerance = 1e-9;

/// What happened to each original element during steady-state reduction.
enum class ElementFate {
    Kept,        // survives as reduced element
    OpenCircuit, // capacitor, removed
    Shorted,     // inductor, terminals merged
    SelfLoop     // both terminals merged by inductors; carries no current
};

struct ReducedCircuit {
    Circuit original;
    Circuit base;  // resistors and voltage sources only, on merged nodes
    std::vector<std::size_t> node_map;                  // original node -> base node
    std::vector<std::vector<NodeId>> merged_nodes;      // base node -> original nodes
    std::vector<std::size_t> provenance;                // base element -> original element
    std::vector<ElementFate> fate;                      // per original element
};

struct NodeBasis {
    std::vector<std::size_t> component_of;      // base node -> source component
    std::vector<std::vector<NodeId>> members;   // component -> base nodes (ascending)
    std::vector<NodeId> representative;         // component -> base node
    std::vector<double> offset;                 // base node -> volts above representative
    std::vector<std::size_t> island;            // component -> connected piece of base graph
    std::vector<bool> grounded;                 // component -> representative held at 0 V
    std::vector<std::optional<std::size_t>> unknown;  // component -> index in basis voltages

    [[nodiscard]] std::size_t component_count() const noexcept { return representative.size(); }
    [[nodiscard]] std::size_t unknown_count() const noexcept {
        return static_cast<std::size_t>(
            std::count_if(unknown.begin(), unknown.end(), [](const auto& u) { return u.has_value(); }));
    }
};

struct SolvedState {
    std::vector<double> node_voltages;    // per original node, volts
    std::vector<double> branch_currents;  // per original element, a -> b positive
    std::vector<double> branch_losses;    // per original element; 0 unless resistor
    std::vector<double> basis_voltages;   // per unknown representative
    double total_loss = 0.0;
    double intra_component_loss = 0.0;
    double inter_component_loss = 0.0;
};

/// Picks the representative among a component's members (ascending node order).
using RepresentativeChooser = std::function<NodeId(std::span<const NodeId>)>;

namespace detail {

struct SourceEdge {
    std::size_t a;
    std::size_t b;
    double volts;
};

struct OffsetResult {
    std::vector<std::size_t> component_of;
    std::vector<double> offset;
    std::vector<NodeId> representative;
    std::vector<std::vector<NodeId>> members;
    std::optional<std::string> inconsistency;
};

[[nodiscard]] inline bool loop_consistent(double expected, double actual) {
    return std::abs(expected - actual) <=
           kResidualTolerance * std::max({1.0, std::abs(expected), std::abs(actual)});
}

/// Breadth-first offsets from each component's representative. Non-tree source
/// edges are checked for path independence.
inline OffsetResult source_offsets(std::size_t node_count, std::span<const SourceEdge> edges,
                                   const RepresentativeChooser& choose) {
    OffsetResult out;
    DisjointSets sets(node_count);
    for (const auto& e : edges) sets.unite(e.a, e.b);
    out.component_of = sets.labels();

    std::size_t components = 0;
    for (auto c : out.component_of) components = std::max(components, c + 1);
    out.members.assign(components, {});
    for (std::size_t n = 0; n < node_count; ++n) out.members[out.component_of[n]].push_back(NodeId{n});

    out.representative.resize(components);
    for (std::size_t c = 0; c < components; ++c) {
        NodeId rep = choose ? choose(out.members[c]) : out.members[c].front();
        if (to_index(rep) >= node_count || out.component_of[to_index(rep)] != c) {
            throw Error("representative chooser returned a node outside its component");
        }
        out.representative[c] = rep;
    }

    std::vector<std::vector<std::size_t>> incident(node_count);
    for (std::size_t k = 0; k < edges.size(); ++k) {
        incident[edges[k].a].push_back(k);
        incident[edges[k].b].push_back(k);
    }

    out.offset.assign(node_count, 0.0);
    std::vector<bool> seen(node_count, false);
    std::vector<bool> tree_edge(edges.size(), false);
    for (std::size_t c = 0; c < components; ++c) {
        auto root = to_index(out.representative[c]);
        std::queue<std::size_t> pending;
        pending.push(root);
        seen[root] = true;
        while (!pending.empty()) {
            auto n = pending.front();
            pending.pop();
            for (auto k : incident[n]) {
                const auto& e = edges[k];
                auto other = e.a == n ? e.b : e.a;
                if (seen[other]) continue;
                seen[other] = true;
                tree_edge[k] = true;
                out.offset[other] = e.a == n ? out.offset[n] + e.volts : out.offset[n] - e.volts;
                pending.push(other);
            }
        }
    }

    for (std::size_t k = 0; k < edges.size(); ++k) {
        if (tree_edge[k]) continue;
        const auto& e = edges[k];
        double around = out.offset[e.b] - out.offset[e.a];
        if (!loop_consistent(e.volts, around)) {
            out.inconsistency = "source loop through nodes " + std::to_string(e.a) + " and " +
                                std::to_string(e.b) + " sums to " +
                                std::to_string(e.volts - around) + " V";
            break;
        }
    }
    return out;
}

inline std::vector<SourceEdge> source_edges(const Circuit& c) {
    std::vector<SourceEdge> edges;
    for (const auto& e : c.elements()) {
        if (e.is_source()) edges.push_back({to_index(e.a), to_index(e.b), e.value});
    }
    return edges;
}

}  // namespace detail

/// Replaces the circuit by its DC equivalent: capacitors removed, inductors
/// contracted. Throws InconsistentShort if a contraction shorts a net source
/// voltage.
[[nodiscard]] inline ReducedCircuit reduce_steady_state(const Circuit& c) {
    detail::DisjointSets sets(c.node_count());
    for (const auto& e : c.elements()) {
        if (e.kind == ElementKind::Inductor) sets.unite(to_index(e.a), to_index(e.b));
    }
    auto node_map = sets.labels();
    std::size_t reduced_nodes = 0;
    for (auto m : node_map) reduced_nodes = std::max(reduced_nodes, m + 1);

    std::vector<std::vector<NodeId>> merged(reduced_nodes);
    for (std::size_t n = 0; n < c.node_count(); ++n) merged[node_map[n]].push_back(NodeId{n});

    std::vector<Element> kept;
    std::vector<std::size_t> provenance;
    std::vector<ElementFate> fate(c.element_count(), ElementFate::Kept);
    for (std::size_t i = 0; i < c.element_count(); ++i) {
        const auto& e = c.element(i);
        switch (e.kind) {
            case ElementKind::Capacitor: fate[i] = ElementFate::OpenCircuit; continue;
            case ElementKind::Inductor: fate[i] = ElementFate::Shorted; continue;
            default: break;
        }
        auto ra = node_map[to_index(e.a)];
        auto rb = node_map[to_index(e.b)];
        if (ra == rb) {
            if (e.is_source() && !detail::loop_consistent(0.0, e.value)) {
                throw InconsistentShort("inductor short across voltage source (element " +
                                        std::to_string(i) + ", " + std::to_string(e.value) + " V)");
            }
            fate[i] = ElementFate::SelfLoop;
            continue;
        }
        kept.push_back({e.kind, e.value, NodeId{ra}, NodeId{rb}});
        provenance.push_back(i);
    }

    Circuit base(reduced_nodes, std::move(kept));

    // A contraction can also close a source loop through other sources.
    auto reduced_edges = detail::source_edges(base);
    if (detail::source_offsets(reduced_nodes, reduced_edges, {}).inconsistency) {
        auto original_edges = detail::source_edges(c);
        auto original = detail::source_offsets(c.node_count(), original_edges, {});
        if (original.inconsistency) throw InconsistentSourceLoop(*original.inconsistency);
        throw InconsistentShort("inductor contraction closes a source loop with nonzero voltage");
    }

    return ReducedCircuit{c, std::move(base), std::move(node_map), std::move(merged),
                          std::move(provenance), std::move(fate)};
}

/// Fundamental node basis of the reduced circuit. `choose` selects each
/// component's representative; by default the lowest-indexed member.
[[nodiscard]] inline NodeBasis node_basis(const ReducedCircuit& rc,
                                          const RepresentativeChooser& choose = {}) {
    const auto& base = rc.base;
    auto edges = detail::source_edges(base);
    auto offsets = detail::source_offsets(base.node_count(), edges, choose);
    if (offsets.inconsistency) throw InconsistentSourceLoop(*offsets.inconsistency);

    NodeBasis basis;
    basis.component_of = std::move(offsets.component_of);
    basis.members = std::move(offsets.members);
    basis.representative = std::move(offsets.representative);
    basis.offset = std::move(offsets.offset);

    detail::DisjointSets pieces(base.node_count());
    for (const auto& e : base.elements()) pieces.unite(to_index(e.a), to_index(e.b));
    auto piece_of = pieces.labels();

    const auto m = basis.component_count();
    basis.island.resize(m);
    basis.grounded.assign(m, false);
    basis.unknown.assign(m, std::nullopt);

    std::vector<std::optional<std::size_t>> ground_of_piece(base.node_count());
    for (std::size_t c = 0; c < m; ++c) {
        auto rep = to_index(basis.representative[c]);
        auto piece = piece_of[rep];
        basis.island[c] = piece;
        auto& g = ground_of_piece[piece];
        if (!g || rep < to_index(basis.representative[*g])) g = c;
    }
    std::size_t next = 0;
    for (std::size_t c = 0; c < m; ++c) {
        if (ground_of_piece[basis.island[c]] == c) {
            basis.grounded[c] = true;
        } else {
            basis.unknown[c] = next++;
        }
    }
    return basis;
}

namespace detail {

inline double component_voltage(const NodeBasis& basis, std::span<const double> unknowns,
                                 std::size_t component) {
    const auto& u = basis.unknown[component];
    return u ? unknowns[*u] : 0.0;
}

/// Drop across a reduced resistor for given representative voltages.
inline double resistor_drop(const NodeBasis& basis, std::span<const double> unknowns,
                            std::size_t a, std::size_t b) {
    auto ca = basis.component_of[a];
    auto cb = basis.component_of[b];
    return component_voltage(basis, unknowns, ca) + basis.offset[a] -
           component_voltage(basis, unknowns, cb) - basis.offset[b];
}

/// Currents through zero-impedance elements (sources, inductors) from KCL.
/// Works on a spanning forest of those elements; chords carry no current.
inline void recover_tree_currents(const Circuit& c, std::vector<double>& currents) {
    const auto n = c.node_count();
    std::vector<double> leaving(n, 0.0);
    std::vector<std::vector<std::size_t>> incident(n);
    for (std::size_t i = 0; i < c.element_count(); ++i) {
        const auto& e = c.element(i);
        if (e.kind == ElementKind::VoltageSource || e.kind == ElementKind::Inductor) {
            incident[to_index(e.a)].push_back(i);
            incident[to_index(e.b)].push_back(i);
            currents[i] = 0.0;
        } else {
            leaving[to_index(e.a)] += currents[i];
            leaving[to_index(e.b)] -= currents[i];
        }
    }

    std::vector<bool> seen(n, false);
    std::vector<std::size_t> order;
    std::vector<std::size_t> via(n, DisjointSets::npos);
    for (std::size_t root = 0; root < n; ++root) {
        if (seen[root]) continue;
        seen[root] = true;
        std::size_t head = order.size();
        order.push_back(root);
        while (head < order.size()) {
            auto node = order[head++];
            for (auto i : incident[node]) {
                const auto& e = c.element(i);
                auto other = to_index(e.a) == node ? to_index(e.b) : to_index(e.a);
                if (seen[other]) continue;
                seen[other] = true;
                via[other] = i;
                order.push_back(other);
            }
        }
    }

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        auto node = *it;
        auto i = via[node];
        if (i == DisjointSets::npos) continue;
        const auto& e = c.element(i);
        bool at_a = to_index(e.a) == node;
        auto parent = at_a ? to_index(e.b) : to_index(e.a);
        currents[i] = at_a ? -leaving[node] : leaving[node];
        leaving[parent] += leaving[node];
        leaving[node] = 0.0;
    }
}

}  // namespace detail

/// Loss potential at arbitrary representative voltages (one per unknown
/// component, in NodeBasis::unknown order). Equals the total resistive loss
/// when evaluated at the solution.
[[nodiscard]] inline double evaluate_potential(const ReducedCircuit& rc, const NodeBasis& basis,
                                               std::span<const double> basis_voltages) {
    if (basis_voltages.size() != basis.unknown_count()) {
        throw Error("evaluate_potential: expected " + std::to_string(basis.unknown_count()) +
                    " basis voltages, got " + std::to_string(basis_voltages.size()));
    }
    double p = 0.0;
    for (const auto& e : rc.base.elements()) {
        if (!e.is_resistor()) continue;
        double drop = detail::resistor_drop(basis, basis_voltages, to_index(e.a), to_index(e.b));
        p += drop * drop / e.value;
    }
    return p;
}

[[nodiscard]] inline double evaluate_potential(const ReducedCircuit& rc,
                                               std::span<const double> basis_voltages) {
    return evaluate_potential(rc, node_basis(rc), basis_voltages);
}

[[nodiscard]] inline SolvedState solve_dc(const ReducedCircuit& rc, const NodeBasis& basis) {
    const auto& base = rc.base;
    const auto unknowns = basis.unknown_count();

    std::vector<Eigen::Triplet<double>> entries;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(unknowns));
    for (const auto& e : base.elements()) {
        if (!e.is_resistor()) continue;
        auto a = to_index(e.a);
        auto b = to_index(e.b);
        auto ca = basis.component_of[a];
        auto cb = basis.component_of[b];
        if (ca == cb) continue;
        double g = 1.0 / e.value;
        double fixed = g * (basis.offset[a] - basis.offset[b]);
        const auto& ua = basis.unknown[ca];
        const auto& ub = basis.unknown[cb];
        if (ua) {
            auto i = static_cast<Eigen::Index>(*ua);
            entries.emplace_back(i, i, g);
            rhs[i] -= fixed;
            if (ub) entries.emplace_back(i, static_cast<Eigen::Index>(*ub), -g);
        }
        if (ub) {
            auto j = static_cast<Eigen::Index>(*ub);
            entries.emplace_back(j, j, g);
            rhs[j] += fixed;
            if (ua) entries.emplace_back(j, static_cast<Eigen::Index>(*ua), -g);
        }
    }

    SolvedState s;
    s.basis_voltages.assign(unknowns, 0.0);
    if (unknowns > 0) {
        Eigen::SparseMatrix<double> laplacian(static_cast<Eigen::Index>(unknowns),
                                              static_cast<Eigen::Index>(unknowns));
        laplacian.setFromTriplets(entries.begin(), entries.end());
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(laplacian);
        Eigen::VectorXd x;
        if (ldlt.info() == Eigen::Success) x = ldlt.solve(rhs);
        if (ldlt.info() != Eigen::Success || !x.allFinite()) {
            std::string which;
            for (std::size_t c = 0; c < basis.component_count(); ++c) {
                if (basis.unknown[c]) which += " " + std::to_string(to_index(basis.representative[c]));
            }
            throw SingularSystem("reduced nodal system is singular (representatives:" + which + ")");
        }
        for (std::size_t i = 0; i < unknowns; ++i) s.basis_voltages[i] = x[static_cast<Eigen::Index>(i)];
    }

    const auto& orig = rc.original;
    s.node_voltages.resize(orig.node_count());
    for (std::size_t n = 0; n < orig.node_count(); ++n) {
        auto r = rc.node_map[n];
        s.node_voltages[n] =
            detail::component_voltage(basis, s.basis_voltages, basis.component_of[r]) + basis.offset[r];
    }

    s.branch_currents.assign(orig.element_count(), 0.0);
    s.branch_losses.assign(orig.element_count(), 0.0);
    for (std::size_t i = 0; i < orig.element_count(); ++i) {
        const auto& e = orig.element(i);
        if (!e.is_resistor() || rc.fate[i] != ElementFate::Kept) continue;
        double drop = s.node_voltages[to_index(e.a)] - s.node_voltages[to_index(e.b)];
        double current = drop / e.value;
        s.branch_currents[i] = current;
        s.branch_losses[i] = current * current * e.value;
        auto ra = rc.node_map[to_index(e.a)];
        auto rb = rc.node_map[to_index(e.b)];
        if (basis.component_of[ra] == basis.component_of[rb]) {
            s.intra_component_loss += s.branch_losses[i];
        } else {
            s.inter_component_loss += s.branch_losses[i];
        }
    }
    s.total_loss = s.intra_component_loss + s.inter_component_loss;
    detail::recover_tree_currents(orig, s.branch_currents);
    return s;
}

[[nodiscard]] inline SolvedState solve_dc(const ReducedCircuit& rc) {
    return solve_dc(rc, node_basis(rc));
}

/// Reduce and solve in one step.
[[nodiscard]] inline SolvedState solve(const Circuit& c) {
    return solve_dc(reduce_steady_state(c));
}

/// Sum of i^2 R over all resistors.
[[nodiscard]] inline double total_loss(const SolvedState& s) {
    double sum = 0.0;
    for (double w : s.branch_losses) sum += w;
    return sum;
}

/// Largest KCL imbalance over all nodes, relative to the gross current at
/// that node (or 1 A, whichever is larger).
[[nodiscard]] inline double kcl_residual(const Circuit& c, std::span<const double> currents) {
    std::vector<double> net(c.node_count(), 0.0);
    std::vector<double> gross(c.node_count(), 0.0);
    for (std::size_t i = 0; i < c.element_count(); ++i) {
        const auto& e = c.element(i);
        net[to_index(e.a)] += currents[i];
        net[to_index(e.b)] -= currents[i];
        gross[to_index(e.a)] += std::abs(currents[i]);
        gross[to_index(e.b)] += std::abs(currents[i]);
    }
    double worst = 0.0;
    for (std::size_t n = 0; n < c.node_count(); ++n) {
        worst = std::max(worst, std::abs(net[n]) / std::max(1.0, gross[n]));
    }
    return worst;
}

}  // namespace kbraess
