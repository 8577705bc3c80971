#include "catch_amalgamated.hpp"

#include "kbraess/braess.hpp"
#include "kbraess/verification.hpp"
#include "support/mna_oracle.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

using namespace kbraess;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("closed-form currents, worked case", "[braess]") {
    BraessCircuitParams p{2.0, 3.0, 1.0, 2.0, 4.0};
    auto i = closed_form_currents(p);
    CHECK_THAT(i.i1, WithinRel(12.0 / 7.0, 1e-15));
    CHECK_THAT(i.i2, WithinRel(23.0 / 14.0, 1e-15));
    CHECK_THAT(i.i3, WithinRel(-1.0 / 14.0, 1e-14));
    CHECK_THAT(i.i1 + i.i3, WithinRel(i.i2, 1e-15));

    // Independent nodal analysis of the same circuit.
    auto mna = oracle::solve_mna(braess_circuit(p));
    CHECK_THAT(mna.element_currents[braess_layout::kR1], WithinRel(12.0 / 7.0, 1e-12));
    CHECK_THAT(mna.element_currents[braess_layout::kR2], WithinRel(23.0 / 14.0, 1e-12));
    CHECK_THAT(mna.element_currents[braess_layout::kR3], WithinRel(-1.0 / 14.0, 1e-12));
}

TEST_CASE("closed-form currents, symmetric and limiting cases", "[braess]") {
    for (double r3 : {1e-3, 1.0, 1e3}) {
        CHECK(closed_form_currents({1.5, 1.5, 2.0, 2.0, r3}).i3 == 0.0);
    }
    auto shorted = closed_form_currents({0.0, 1.0, 1.0, 1.0, 1e-12});
    CHECK_THAT(shorted.i1, WithinAbs(0.0, 1e-11));
    CHECK_THAT(shorted.i2, WithinAbs(1.0, 1e-11));
    CHECK_THAT(shorted.i3, WithinAbs(1.0, 1e-11));
    CHECK_THROWS_AS(closed_form_currents({0.0, 1.0, 1.0, 1.0, std::nullopt}), CircuitError);
}

TEST_CASE("closed form agrees with the general solver", "[braess][property]") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> volts(-5.0, 5.0);
    std::uniform_real_distribution<double> log_r(std::log(0.01), std::log(100.0));
    for (int trial = 0; trial < 200; ++trial) {
        BraessCircuitParams p{volts(rng), volts(rng), std::exp(log_r(rng)), std::exp(log_r(rng)),
                              std::exp(log_r(rng))};
        auto closed = closed_form_currents(p);
        auto s = solve(braess_circuit(p));
        double scale = std::max({std::abs(closed.i1), std::abs(closed.i2), std::abs(closed.i3), 1e-300});
        CHECK_THAT(s.branch_currents[braess_layout::kR1], WithinAbs(closed.i1, 1e-9 * scale));
        CHECK_THAT(s.branch_currents[braess_layout::kR2], WithinAbs(closed.i2, 1e-9 * scale));
        CHECK_THAT(s.branch_currents[braess_layout::kR3], WithinAbs(closed.i3, 1e-9 * scale));
    }
}

TEST_CASE("LCL of a near-short cross link", "[braess][lcl]") {
    auto balanced = lcl(braess_circuit({0.0, 1.0, 1.0, 1.0, std::nullopt}), cross_link(1e-6));
    CHECK_THAT(balanced.lcl, WithinAbs(2.0, 1e-3));
    CHECK(balanced.includes_new_link_loss);
    CHECK_THAT(balanced.loss_before, WithinAbs(0.5, 1e-15));

    auto unbalanced = lcl(braess_circuit({0.0, 1.0, 2.0, 1.0, std::nullopt}), cross_link(1e-6));
    CHECK_THAT(unbalanced.lcl, WithinAbs(3.0, 1e-3));
}

TEST_CASE("LCL with equal sources matches the formula", "[braess][lcl]") {
    auto r = lcl(braess_circuit({1.0, 1.0, 1.0, 3.0, std::nullopt}), cross_link(1.0));
    CHECK_THAT(r.lcl, WithinRel(8.0 / 7.0, 1e-12));
    CHECK_THAT(lcl_formula_equal_sources(1.0, 3.0, 1.0), WithinRel(8.0 / 7.0, 1e-15));
    CHECK(lcl_formula_equal_sources(2.5, 2.5, 0.1) == 1.0);

    double previous = 0.0;
    for (int r2 = 1; r2 <= 10; ++r2) {
        double value = lcl_formula_equal_sources(1.0, r2, 1.0);
        if (r2 > 1) CHECK(value > previous);
        previous = value;
    }
}

TEST_CASE("LCL report breaks down losses per branch", "[braess][lcl]") {
    auto c = braess_circuit({0.0, 1.0, 1.0, 1.0, std::nullopt});
    auto r = lcl(c, cross_link(0.5));
    REQUIRE(r.per_branch_delta.size() == c.element_count());
    double sum = 0.0;
    for (double d : r.per_branch_delta) sum += d;
    CHECK_THAT(r.original_loss_after, WithinRel(r.loss_before + sum, 1e-12));
    CHECK_THAT(r.loss_after, WithinRel(r.original_loss_after + r.link_loss, 1e-12));
    CHECK(r.per_branch_delta[braess_layout::kE1] == 0.0);
}

TEST_CASE("LCL is undefined without baseline loss", "[braess][lcl][errors]") {
    auto c = build_circuit(3, {Element::resistor(0, 1, 1.0), Element::resistor(1, 2, 1.0)});
    CHECK_THROWS_AS(lcl(c, LinkSpec::resistor(0, 2, 1.0)), UndefinedRatio);
    auto balanced = braess_circuit({1.0, -1.0, 1.0, 1.0, std::nullopt});  // sources cancel
    CHECK_THROWS_AS(lcl(balanced, cross_link(1.0)), UndefinedRatio);
}

TEST_CASE("resistive link additions never lower loss", "[braess][lcl][property]") {
    auto outcome = run_link_addition_suite(42, 100);
    CHECK(outcome.cases == 100);
    CHECK(outcome.lcl_at_least_one == outcome.cases);
    CHECK(outcome.original_loss_nondecreasing == outcome.cases);
    CHECK(outcome.same_component_cases > 0);
    CHECK(outcome.same_component_unit == outcome.same_component_cases);
    for (const auto& f : outcome.failures) UNSCOPED_INFO(f);
    CHECK(outcome.passed());
}

TEST_CASE("link between nodes of one source component", "[braess][lcl]") {
    // Nodes 0,1,2 tied by sources; node 3 hangs off resistors.
    auto c = build_circuit(4, {Element::source(0, 1, 1.0), Element::source(1, 2, 2.0),
                               Element::resistor(2, 3, 1.0), Element::resistor(3, 0, 2.0)});
    auto r = lcl(c, LinkSpec::resistor(0, 2, 4.0));
    CHECK_THAT(r.original_lcl, WithinAbs(1.0, 1e-12));
    CHECK_THAT(r.link_loss, WithinRel(9.0 / 4.0, 1e-12));  // 3 V across 4 ohm
    for (double d : r.per_branch_delta) CHECK_THAT(d, WithinAbs(0.0, 1e-12));
}

TEST_CASE("critical cross-link resistance", "[braess][critical]") {
    CHECK_FALSE(critical_r3(2.0, 2.0).has_value());

    // Closed form sqrt(R1 R2)/2 from equating the two loss numerators.
    auto c12 = critical_r3(1.0, 2.0);
    REQUIRE(c12.has_value());
    CHECK_THAT(*c12, WithinRel(std::sqrt(2.0) / 2.0, 1e-9));
    auto c49 = critical_r3(4.0, 9.0);
    REQUIRE(c49.has_value());
    CHECK_THAT(*c49, WithinRel(3.0, 1e-9));
    auto swapped = critical_r3(9.0, 4.0);
    REQUIRE(swapped.has_value());
    CHECK_THAT(*swapped, WithinRel(3.0, 1e-9));
}

TEST_CASE("loss imbalance changes sign at the critical resistance", "[braess][critical][property]") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> log_r(std::log(0.1), std::log(10.0));
    for (int trial = 0; trial < 100; ++trial) {
        double r1 = std::exp(log_r(rng)), r2 = std::exp(log_r(rng));
        if (r1 == r2) continue;
        auto cr = critical_r3(r1, r2);
        REQUIRE(cr.has_value());
        CHECK_THAT(*cr, WithinRel(std::sqrt(r1 * r2) / 2.0, 1e-9));
        // Smaller resistor dissipates more below the critical value, less above.
        double sign = r1 < r2 ? 1.0 : -1.0;
        for (double factor : {1e-3, 0.5, 0.9}) CHECK(sign * loss_imbalance(r1, r2, *cr * factor) > 0.0);
        for (double factor : {1.1, 2.0, 1e3}) CHECK(sign * loss_imbalance(r1, r2, *cr * factor) < 0.0);
    }
}

TEST_CASE("LCL formula is nondecreasing in resistance imbalance", "[braess][property]") {
    for (double r_min : {0.1, 1.0, 7.0}) {
        for (double r3 : {0.01, 1.0, 100.0}) {
            double prev_low = 1.0, prev_high = 1.0;
            for (int k = 0; k < 1000; ++k) {
                double h = 20.0 * k / 999.0;
                double low = lcl_formula_equal_sources(r_min, r_min + h, r3);
                double high = lcl_formula_equal_sources(r_min + h, r_min, r3);
                CHECK(low >= prev_low);
                CHECK(high >= prev_high);
                prev_low = low;
                prev_high = high;
            }
        }
    }
}

TEST_CASE("cross-link sweep", "[braess][sweep]") {
    std::vector<double> grid;
    for (int k = 0; k <= 24; ++k) grid.push_back(1e-4 * std::pow(10.0, k / 4.0));
    auto rows = sweep_cross_link({0.0, 1.0, 1.0, 1.0, std::nullopt}, grid);
    REQUIRE(rows.size() == grid.size() + 1);
    CHECK(std::isinf(rows[0].r3));
    CHECK_THAT(rows[0].i1, WithinAbs(0.5, 1e-15));
    CHECK_THAT(rows[0].i2, WithinAbs(0.5, 1e-15));
    CHECK(rows[0].i3 == 0.0);
    CHECK_THAT(rows[1].total_loss, WithinRel(2.0 * rows[0].total_loss, 1e-3));

    for (std::size_t k = 2; k < rows.size(); ++k) {
        CHECK(rows[k].i1 > rows[k - 1].i1);
        CHECK(rows[k].i2 < rows[k - 1].i2);
        CHECK(rows[k].i3 < rows[k - 1].i3);
    }
    CHECK_THAT(rows.back().i1, WithinAbs(0.5, 1e-2));
    CHECK_THAT(rows.back().i2, WithinAbs(0.5, 1e-2));

    auto balanced = sweep_cross_link({1.0, 1.0, 2.0, 2.0, std::nullopt}, grid);
    for (const auto& row : balanced) CHECK_THAT(row.i3, WithinAbs(0.0, 1e-12));
}

TEST_CASE("sweep CSV layout and reproducibility", "[braess][sweep]") {
    std::vector<double> grid{0.1, 1.0, 10.0};
    auto rows = sweep_cross_link({0.0, 1.0, 1.0, 1.0, std::nullopt}, grid);
    std::ostringstream first, second;
    write_sweep_csv(first, rows);
    write_sweep_csv(second, sweep_cross_link({0.0, 1.0, 1.0, 1.0, std::nullopt}, grid));
    CHECK(first.str() == second.str());

    std::istringstream lines(first.str());
    std::string header, baseline;
    std::getline(lines, header);
    std::getline(lines, baseline);
    CHECK(header == "R3,i1,i2,i3,loss1,loss2,loss3,total_loss,lcl");
    CHECK(baseline.rfind("inf,0.5,0.5,0,", 0) == 0);

    // Full precision: values parse back bit-for-bit.
    std::string row;
    std::getline(lines, row);
    CHECK(std::stod(row.substr(row.find(',') + 1)) == rows[1].i1);
    CHECK_THROWS_AS(sweep_cross_link({0.0, 1.0, 1.0, 1.0, std::nullopt}, std::vector<double>{0.0}), CircuitError);
}
