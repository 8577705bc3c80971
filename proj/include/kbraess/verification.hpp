#pragma once

// Seeded randomized suites shared by the CLI `verify` verb and the tests:
//   - adding a resistive link never lowers circuit loss;
//   - uncongested OPF optimum is independent of line reactances, and matches
//     a numerical minimisation over the phase angles.

#include "kbraess/braess.hpp"
#include "kbraess/circuit.hpp"
#include "kbraess/dcopf.hpp"
#include "kbraess/detail/disjoint_sets.hpp"
#include "kbraess/solver.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace kbraess {

struct RandomCircuitOptions {
    std::size_t min_nodes = 3;
    std::size_t max_nodes = 12;
    double min_resistance = 0.1;
    double max_resistance = 10.0;
    double max_source = 5.0;
    double source_probability = 0.35;
};

/// Connected circuit of resistors and voltage sources. Sources form a forest,
/// so the source subgraph is always consistent.
[[nodiscard]] inline Circuit random_circuit(std::mt19937_64& rng, const RandomCircuitOptions& opt = {}) {
    std::uniform_int_distribution<std::size_t> node_count(opt.min_nodes, opt.max_nodes);
    std::uniform_real_distribution<double> resistance(opt.min_resistance, opt.max_resistance);
    std::uniform_real_distribution<double> volts(0.0, opt.max_source);
    std::bernoulli_distribution is_source(opt.source_probability);
    std::bernoulli_distribution flip(0.5);

    const auto n = node_count(rng);
    std::vector<Element> elements;
    detail::DisjointSets source_sets(n);
    auto oriented = [&](std::size_t u, std::size_t v) {
        return flip(rng) ? std::pair{u, v} : std::pair{v, u};
    };

    for (std::size_t k = 1; k < n; ++k) {
        std::uniform_int_distribution<std::size_t> parent(0, k - 1);
        auto [a, b] = oriented(parent(rng), k);
        if (is_source(rng)) {
            source_sets.unite(a, b);
            elements.push_back(Element::source(a, b, volts(rng)));
        } else {
            elements.push_back(Element::resistor(a, b, resistance(rng)));
        }
    }

    std::uniform_int_distribution<std::size_t> any_node(0, n - 1);
    std::uniform_int_distribution<std::size_t> extra_count(1, n);
    for (auto extra = extra_count(rng); extra > 0; --extra) {
        auto u = any_node(rng);
        auto v = any_node(rng);
        if (u == v) continue;
        auto [a, b] = oriented(u, v);
        if (is_source(rng) && source_sets.unite(a, b)) {
            elements.push_back(Element::source(a, b, volts(rng)));
        } else {
            elements.push_back(Element::resistor(a, b, resistance(rng)));
        }
    }
    return Circuit(n, std::move(elements));
}

struct LinkAdditionOutcome {
    std::size_t cases = 0;
    std::size_t lcl_at_least_one = 0;          // total-loss LCL >= 1 - 1e-9
    std::size_t original_loss_nondecreasing = 0;
    std::size_t same_component_cases = 0;
    std::size_t same_component_unit = 0;       // original-resistor LCL == 1 +- 1e-9
    double min_lcl = kInf;
    std::vector<std::string> failures;

    [[nodiscard]] bool passed() const {
        return lcl_at_least_one == cases && original_loss_nondecreasing == cases &&
               same_component_unit == same_component_cases;
    }
};

/// For each seeded random circuit: attach a random resistor between random
/// distinct nodes and, where a source component has two or more nodes, a
/// second one inside that component.
[[nodiscard]] inline LinkAdditionOutcome run_link_addition_suite(std::uint64_t seed, std::size_t cases,
                                                          const RandomCircuitOptions& opt = {}) {
    constexpr double tol = 1e-9;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> resistance(opt.min_resistance, opt.max_resistance);
    LinkAdditionOutcome out;

    while (out.cases < cases) {
        auto c = random_circuit(rng, opt);
        auto before = solve(c);
        if (!(before.total_loss > 1e-20 * detail::loss_scale(c))) continue;

        std::uniform_int_distribution<std::size_t> any_node(0, c.node_count() - 1);
        std::size_t a = any_node(rng), b = any_node(rng);
        while (b == a) b = any_node(rng);
        auto report = lcl(c, LinkSpec::resistor(a, b, resistance(rng)));
        ++out.cases;
        out.min_lcl = std::min(out.min_lcl, report.lcl);
        auto label = "case " + std::to_string(out.cases) + " (link " + std::to_string(a) + "-" +
                     std::to_string(b) + ")";
        if (report.lcl >= 1.0 - tol) {
            ++out.lcl_at_least_one;
        } else {
            out.failures.push_back(label + ": LCL " + std::to_string(report.lcl) + " < 1");
        }
        if (report.original_loss_after >= report.loss_before * (1.0 - tol)) {
            ++out.original_loss_nondecreasing;
        } else {
            out.failures.push_back(label + ": original-resistor loss decreased");
        }

        auto rc = reduce_steady_state(c);
        auto basis = node_basis(rc);
        std::vector<std::size_t> candidates;
        for (std::size_t k = 0; k < basis.component_count(); ++k) {
            if (basis.members[k].size() >= 2) candidates.push_back(k);
        }
        if (candidates.empty()) continue;
        std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
        const auto& members = basis.members[candidates[pick(rng)]];
        std::uniform_int_distribution<std::size_t> member(0, members.size() - 1);
        auto u = member(rng), v = member(rng);
        while (v == u) v = member(rng);
        // No inductors here, so base nodes coincide with original nodes.
        auto inner = lcl(c, LinkSpec::resistor(to_index(members[u]), to_index(members[v]), resistance(rng)));
        ++out.same_component_cases;
        if (std::abs(inner.original_lcl - 1.0) <= tol) {
            ++out.same_component_unit;
        } else {
            out.failures.push_back(label + ": same-component link changed original loss, ratio " +
                                   std::to_string(inner.original_lcl));
        }
    }
    return out;
}

/// Minimises the OPF objective over (theta2, theta3) by cyclic coordinate
/// descent with exact line search; returns the resulting (P1, P2).
[[nodiscard]] inline Eigen::Vector2d minimize_opf_numerically(const ThreeBusNetwork& n,
                                                              double gradient_tolerance = 1e-10,
                                                              std::size_t max_sweeps = 10'000'000) {
    const auto c = conductance_matrices(n);
    // f(theta) = theta' Q theta + g' theta + const with P = Br theta.
    const Eigen::Matrix2d Q = c.Br.transpose() * Eigen::Vector2d(n.beta1, n.beta2).asDiagonal() * c.Br;
    const Eigen::Vector2d g = -n.alpha * c.Br.transpose() * Eigen::Vector2d::Ones();
    Eigen::Vector2d theta = Eigen::Vector2d::Zero();
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        for (int k = 0; k < 2; ++k) {
            int o = 1 - k;
            theta[k] = -(g[k] + 2.0 * Q(k, o) * theta[o]) / (2.0 * Q(k, k));
        }
        Eigen::Vector2d grad = 2.0 * Q * theta + g;
        if (grad.norm() <= gradient_tolerance) return c.Br * theta;
    }
    throw Error("coordinate descent did not converge");
}

struct OpfIndependenceOutcome {
    std::size_t networks = 0;
    std::size_t injections_match = 0;   // closed form vs numerical optimum within 1e-6
    std::size_t objectives_equal = 0;   // all uncongested perturbations agree within 1e-9
    double worst_injection_error = 0.0;
    double worst_objective_spread = 0.0;
    std::vector<std::string> failures;

    [[nodiscard]] bool passed() const {
        return injections_match == networks && objectives_equal == networks;
    }
};

[[nodiscard]] inline std::vector<ReactanceTriple> random_reactances(std::mt19937_64& rng, std::size_t count,
                                                                    double lo = 0.2, double hi = 5.0) {
    std::uniform_real_distribution<double> x(lo, hi);
    std::vector<ReactanceTriple> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back({x(rng), x(rng), x(rng)});
    return out;
}

/// Random cost coefficients, no limits, `perturbations` reactance triples each.
[[nodiscard]] inline OpfIndependenceOutcome run_opf_independence_suite(std::uint64_t seed, std::size_t networks,
                                                             std::size_t perturbations = 10) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> alpha(1.0, 5.0);
    std::uniform_real_distribution<double> beta(0.5, 3.0);
    std::uniform_real_distribution<double> load_share(0.0, 0.9);
    OpfIndependenceOutcome out;
    for (std::size_t k = 0; k < networks; ++k) {
        ThreeBusNetwork n;
        n.alpha = alpha(rng);
        n.beta1 = beta(rng);
        n.beta2 = beta(rng);
        n.pc = load_share(rng) * (n.alpha / (2 * n.beta1) + n.alpha / (2 * n.beta2));
        auto triples = random_reactances(rng, perturbations);
        n.x12 = triples.front().x12;
        n.x13 = triples.front().x13;
        n.x23 = triples.front().x23;
        ++out.networks;

        auto exact = unconstrained_opf(n);
        auto numeric = minimize_opf_numerically(n);
        double err = std::max(std::abs(numeric[0] - exact.p1), std::abs(numeric[1] - exact.p2));
        out.worst_injection_error = std::max(out.worst_injection_error, err);
        if (err <= 1e-6) {
            ++out.injections_match;
        } else {
            out.failures.push_back("network " + std::to_string(k) + ": numerical optimum off by " +
                                   std::to_string(err));
        }

        auto report = objective_independence_check(n, triples);
        out.worst_objective_spread = std::max(out.worst_objective_spread, report.max_relative_spread);
        if (report.objectives_equal) {
            ++out.objectives_equal;
        } else {
            out.failures.push_back("network " + std::to_string(k) + ": objective spread " +
                                   std::to_string(report.max_relative_spread));
        }
    }
    return out;
}

}  // namespace kbraess
