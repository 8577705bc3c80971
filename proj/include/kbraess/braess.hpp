#pragma once

// Loss cost of adding a link (LCL), closed forms
// for the two-source/three-resistor network, and cross-link sweeps.

#include "kbraess/circuit.hpp"
#include "kbraess/error.hpp"
#include "kbraess/solver.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace kbraess {

/// Two sources, two load resistors and an optional cross link.
///
/// Canonical layout (node indices are stable and used by the CLI samples):
///
///     node 1 (top junction) --E1--> node 0 --R1--> node 2 (bottom junction)
///     node 3 --E2--> node 1;  node 2 --R2--> node 3
///     cross link R3 from node 1 to node 2
///
/// Around the outer loop the two sources add, so without the cross link
/// i1 = i2 = (E1 + E2) / (R1 + R2). Element order is E1, R1, E2, R2[, R3] and the
/// reported currents i1, i2, i3 are the a->b currents of R1, R2 and R3.
struct BraessCircuitParams {
    double e1 = 0.0;
    double e2 = 1.0;
    double r1 = 1.0;
    double r2 = 1.0;
    std::optional<double> r3;

    void validate() const {
        auto positive = [](double r) { return std::isfinite(r) && r > 0.0; };
        if (!positive(r1) || !positive(r2)) throw CircuitError("R1 and R2 must be finite and positive");
        if (r3 && !(*r3 > 0.0)) throw CircuitError("R3 must be positive when present");
        if (!std::isfinite(e1) || !std::isfinite(e2)) throw CircuitError("source voltages must be finite");
    }
};

namespace braess_layout {
inline constexpr std::size_t kE1 = 0;
inline constexpr std::size_t kR1 = 1;
inline constexpr std::size_t kE2 = 2;
inline constexpr std::size_t kR2 = 3;
inline constexpr std::size_t kR3 = 4;
inline constexpr std::size_t kTopJunction = 1;
inline constexpr std::size_t kBottomJunction = 2;
}  // namespace braess_layout

[[nodiscard]] inline LinkSpec cross_link(double r3) {
    return LinkSpec::resistor(braess_layout::kTopJunction, braess_layout::kBottomJunction, r3);
}

[[nodiscard]] inline Circuit braess_circuit(const BraessCircuitParams& p) {
    p.validate();
    Circuit c(4, {
                     Element::source(1, 0, p.e1),
                     Element::resistor(0, 2, p.r1),
                     Element::source(3, 1, p.e2),
                     Element::resistor(2, 3, p.r2),
                 });
    return p.r3 ? add_link(c, cross_link(*p.r3)) : c;
}

struct BranchCurrents {
    double i1 = 0.0;
    double i2 = 0.0;
    double i3 = 0.0;
};

[[nodiscard]] inline BranchCurrents closed_form_currents(const BraessCircuitParams& p) {
    p.validate();
    if (!p.r3) throw CircuitError("closed_form_currents requires the cross link R3");
    const double r1 = p.r1, r2 = p.r2, r3 = *p.r3;
    const double d = r1 * r2 + r1 * r3 + r2 * r3;
    return {(p.e1 * (r2 + r3) + p.e2 * r3) / d,
            (p.e1 * r3 + p.e2 * (r1 + r3)) / d,
            (-p.e1 * r2 + p.e2 * r1) / d};
}

struct LclReport {
    double loss_before = 0.0;           // all resistors, before the link
    double loss_after = 0.0;            // all resistors including the new link
    double lcl = 0.0;                   // loss_after / loss_before
    bool includes_new_link_loss = true;
    double link_loss = 0.0;             // dissipation in the added element
    double original_loss_after = 0.0;   // original resistors only, after
    double original_lcl = 0.0;          // original_loss_after / loss_before
    std::vector<double> per_branch_delta;  // per original element, after - before
};

namespace detail {

/// Loss magnitude the circuit's sources could drive through its smallest
/// resistor; used to decide whether a baseline loss is numerically zero.
inline double loss_scale(const Circuit& c) {
    double volts = 0.0;
    double r_min = std::numeric_limits<double>::infinity();
    for (const auto& e : c.elements()) {
        if (e.is_source()) volts += std::abs(e.value);
        if (e.is_resistor()) r_min = std::min(r_min, e.value);
    }
    return std::isfinite(r_min) ? volts * volts / r_min : 0.0;
}

}  // namespace detail

/// Loss cost of attaching `link` to `c`.
/// Throws UndefinedRatio when the circuit dissipates nothing before the addition.
[[nodiscard]] inline LclReport lcl(const Circuit& c, const LinkSpec& link) {
    const auto after_circuit = add_link(c, link);
    const auto before = solve(c);
    const auto after = solve(after_circuit);

    LclReport r;
    r.loss_before = before.total_loss;
    if (!(r.loss_before > 1e-20 * detail::loss_scale(c))) {
        throw UndefinedRatio("loss before the link is zero (" + std::to_string(r.loss_before) +
                             " W); LCL is undefined");
    }
    r.loss_after = after.total_loss;
    r.link_loss = after.branch_losses.back();
    r.original_loss_after = r.loss_after - r.link_loss;
    r.lcl = r.loss_after / r.loss_before;
    r.original_lcl = r.original_loss_after / r.loss_before;
    r.per_branch_delta.resize(c.element_count());
    for (std::size_t i = 0; i < c.element_count(); ++i) {
        r.per_branch_delta[i] = after.branch_losses[i] - before.branch_losses[i];
    }
    return r;
}

/// LCL of the cross link when both sources are equal:
/// (R1 - R2)^2 / (4 (R1 R2 + R2 R3 + R3 R1)) + 1.
[[nodiscard]] inline double lcl_formula_equal_sources(double r1, double r2, double r3) {
    if (!(r1 > 0.0 && r2 > 0.0 && r3 > 0.0)) throw CircuitError("resistances must be positive");
    const double h = r1 - r2;
    return h * h / (4.0 * (r1 * r2 + r2 * r3 + r3 * r1)) + 1.0;
}

/// i1^2 R1 - i2^2 R2 for equal unit sources.
[[nodiscard]] inline double loss_imbalance(double r1, double r2, double r3) {
    auto i = closed_form_currents({1.0, 1.0, r1, r2, r3});
    return i.i1 * i.i1 * r1 - i.i2 * i.i2 * r2;
}

/// Cross-link resistance at which the losses in R1 and R2 are equal (equal
/// sources). Found by bisection in log space on [1e-9, 1e9] ohms. Returns
/// nullopt when R1 == R2, where the losses agree for every R3.
///
/// Sign structure: for R1 < R2 the loss in R1 is the larger one below the
/// critical value and the smaller one above it; for R1 > R2 the roles swap.
[[nodiscard]] inline std::optional<double> critical_r3(double r1, double r2) {
    if (!(r1 > 0.0 && r2 > 0.0)) throw CircuitError("resistances must be positive");
    if (r1 == r2) return std::nullopt;
    double lo = 1e-9, hi = 1e9;
    double f_lo = loss_imbalance(r1, r2, lo);
    double f_hi = loss_imbalance(r1, r2, hi);
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    if ((f_lo > 0.0) == (f_hi > 0.0)) return std::nullopt;
    while (hi - lo > 1e-12 * lo) {
        double mid = std::sqrt(lo * hi);
        double f_mid = loss_imbalance(r1, r2, mid);
        if (f_mid == 0.0) return mid;
        if ((f_mid > 0.0) == (f_lo > 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return std::sqrt(lo * hi);
}

struct SweepRow {
    double r3 = std::numeric_limits<double>::infinity();  // infinity marks the baseline
    double i1 = 0.0, i2 = 0.0, i3 = 0.0;
    double loss1 = 0.0, loss2 = 0.0, loss3 = 0.0;
    double total_loss = 0.0;
    double lcl = 1.0;
};

/// One baseline row (link absent) followed by one row per grid value.
[[nodiscard]] inline std::vector<SweepRow> sweep_cross_link(BraessCircuitParams p,
                                                            std::span<const double> r3_grid) {
    namespace L = braess_layout;
    p.r3.reset();
    const auto base = braess_circuit(p);
    for (double r3 : r3_grid) {
        if (!(r3 > 0.0)) throw CircuitError("sweep grid values must be positive");
    }

    std::vector<SweepRow> rows;
    rows.reserve(r3_grid.size() + 1);
    const auto baseline = solve(base);
    SweepRow b;
    b.i1 = baseline.branch_currents[L::kR1];
    b.i2 = baseline.branch_currents[L::kR2];
    b.loss1 = baseline.branch_losses[L::kR1];
    b.loss2 = baseline.branch_losses[L::kR2];
    b.total_loss = baseline.total_loss;
    rows.push_back(b);

    for (double r3 : r3_grid) {
        const auto s = solve(add_link(base, cross_link(r3)));
        SweepRow row;
        row.r3 = r3;
        row.i1 = s.branch_currents[L::kR1];
        row.i2 = s.branch_currents[L::kR2];
        row.i3 = s.branch_currents[L::kR3];
        row.loss1 = s.branch_losses[L::kR1];
        row.loss2 = s.branch_losses[L::kR2];
        row.loss3 = s.branch_losses[L::kR3];
        row.total_loss = s.total_loss;
        row.lcl = baseline.total_loss > 0.0 ? s.total_loss / baseline.total_loss
                                            : std::numeric_limits<double>::quiet_NaN();
        rows.push_back(row);
    }
    return rows;
}

/// Shortest round-trip decimal form; "inf" for infinity.
inline std::string format_exact(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), end);
}

inline void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
    out << "R3,i1,i2,i3,loss1,loss2,loss3,total_loss,lcl\n";
    for (const auto& r : rows) {
        out << format_exact(r.r3) << ',' << format_exact(r.i1) << ',' << format_exact(r.i2) << ','
            << format_exact(r.i3) << ',' << format_exact(r.loss1) << ',' << format_exact(r.loss2)
            << ',' << format_exact(r.loss3) << ',' << format_exact(r.total_loss) << ','
            << format_exact(r.lcl) << '\n';
    }
}

}  // namespace kbraess
