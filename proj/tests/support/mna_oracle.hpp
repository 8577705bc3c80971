#pragma once

// Plain modified nodal analysis for resistor/voltage-source circuits, used as
// an independent check on the library solver. Node 0 is ground; every node
// must be connected to it. Dense Gaussian elimination with partial pivoting.

#include "kbraess/circuit.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

struct MnaResult {
    std::vector<double> node_voltages;
    std::vector<double> element_currents;  // a -> b positive, resistors and sources
};

inline std::vector<double> gauss_solve(std::vector<std::vector<double>> m, std::vector<double> rhs) {
    const std::size_t n = rhs.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        }
        if (std::abs(m[pivot][col]) < 1e-300) throw std::runtime_error("singular MNA system");
        std::swap(m[pivot], m[col]);
        std::swap(rhs[pivot], rhs[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = m[r][col] / m[col][col];
            if (f == 0.0) continue;
            for (std::size_t k = col; k < n; ++k) m[r][k] -= f * m[col][k];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = rhs[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= m[i][k] * x[k];
        x[i] = s / m[i][i];
    }
    return x;
}

inline MnaResult solve_mna(const kbraess::Circuit& c) {
    using kbraess::to_index;
    const std::size_t nodes = c.node_count() - 1;  // node 0 grounded
    std::vector<std::size_t> source_row(c.element_count(), 0);
    std::size_t sources = 0;
    for (std::size_t i = 0; i < c.element_count(); ++i) {
        if (c.element(i).is_source()) source_row[i] = nodes + sources++;
    }
    const std::size_t size = nodes + sources;
    std::vector<std::vector<double>> m(size, std::vector<double>(size, 0.0));
    std::vector<double> rhs(size, 0.0);
    auto row = [](std::size_t node) { return node - 1; };

    for (std::size_t i = 0; i < c.element_count(); ++i) {
        const auto& e = c.element(i);
        auto a = to_index(e.a), b = to_index(e.b);
        if (e.is_resistor()) {
            double g = 1.0 / e.value;
            if (a) m[row(a)][row(a)] += g;
            if (b) m[row(b)][row(b)] += g;
            if (a && b) {
                m[row(a)][row(b)] -= g;
                m[row(b)][row(a)] -= g;
            }
        } else if (e.is_source()) {
            // Unknown j flows a -> b through the source; v_b - v_a = E.
            auto k = source_row[i];
            if (a) {
                m[row(a)][k] += 1.0;
                m[k][row(a)] -= 1.0;
            }
            if (b) {
                m[row(b)][k] -= 1.0;
                m[k][row(b)] += 1.0;
            }
            rhs[k] = e.value;
        } else {
            throw std::runtime_error("oracle handles resistors and sources only");
        }
    }

    auto x = gauss_solve(std::move(m), std::move(rhs));
    MnaResult out;
    out.node_voltages.assign(c.node_count(), 0.0);
    for (std::size_t n = 1; n < c.node_count(); ++n) out.node_voltages[n] = x[row(n)];
    out.element_currents.assign(c.element_count(), 0.0);
    for (std::size_t i = 0; i < c.element_count(); ++i) {
        const auto& e = c.element(i);
        if (e.is_resistor()) {
            out.element_currents[i] =
                (out.node_voltages[to_index(e.a)] - out.node_voltages[to_index(e.b)]) / e.value;
        } else {
            out.element_currents[i] = x[source_row[i]];
        }
    }
    return out;
}

}  // namespace oracle
