#pragma once

// DC power flow and unconstrained optimal power flow on a three-bus network.
//
// Buses 1 and 2 host generators with cost beta_j P_j^2; bus 3 carries an
// inelastic load Pc plus an elastic load Pe valued at alpha Pe. Line
// conductances are stored signed, b_ij = -1/x_ij, and bus 1 is the phase
// reference (theta1 = 0). Line flow P_ij = (theta_i - theta_j) / x_ij.

#include "kbraess/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kbraess {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct ThreeBusNetwork {
    std::optional<double> x12 = 1.0;
    std::optional<double> x13 = 1.0;
    std::optional<double> x23 = 1.0;
    double alpha = 3.0;
    double beta1 = 1.0;
    double beta2 = 1.675;
    double pc = 0.0;
    std::array<double, 2> pmax{kInf, kInf};
    std::array<double, 3> fmax{kInf, kInf, kInf};

    void validate() const {
        for (const auto& x : {x12, x13, x23}) {
            if (x && !(*x > 0.0 && std::isfinite(*x))) throw NetworkError("line reactances must be positive");
        }
        if (!(alpha > 0.0) || !(beta1 > 0.0) || !(beta2 > 0.0)) {
            throw NetworkError("alpha, beta1 and beta2 must be positive");
        }
        if (!(pc >= 0.0)) throw NetworkError("inelastic load Pc must be nonnegative");
        for (double l : pmax) if (!(l >= 0.0)) throw NetworkError("injection limits must be nonnegative");
        for (double l : fmax) if (!(l >= 0.0)) throw NetworkError("line limits must be nonnegative");
    }
};

struct ConductanceData {
    double b12 = 0.0, b13 = 0.0, b23 = 0.0;
    Eigen::Matrix3d B;            // injections = B * (theta1, theta2, theta3)
    Eigen::Matrix2d Br;           // (P1, P2) = Br * (theta2, theta3)
    Eigen::Matrix<double, 3, 2> H;  // (P12, P13, P23) = H * (theta2, theta3)
    double D = 0.0;               // b12 b13 + b23 b13 + b12 b23
};

[[nodiscard]] inline ConductanceData conductance_matrices(const ThreeBusNetwork& n) {
    n.validate();
    auto conductance = [](const std::optional<double>& x) { return x ? -1.0 / *x : 0.0; };
    int lines = int(n.x12.has_value()) + int(n.x13.has_value()) + int(n.x23.has_value());
    if (lines < 2) throw NetworkError("disconnected bus: at least two lines are required");

    ConductanceData c;
    c.b12 = conductance(n.x12);
    c.b13 = conductance(n.x13);
    c.b23 = conductance(n.x23);
    c.B << -c.b12 - c.b13, c.b12, c.b13,
           c.b12, -c.b12 - c.b23, c.b23,
           c.b13, c.b23, -c.b13 - c.b23;
    c.Br << c.b12, c.b13,
            -c.b12 - c.b23, c.b23;
    c.H << c.b12, 0.0,
           0.0, c.b13,
           -c.b23, c.b23;
    c.D = c.b12 * c.b13 + c.b23 * c.b13 + c.b12 * c.b23;
    return c;
}

enum class LimitStatus { Slack, Binding, Violated };

[[nodiscard]] constexpr std::string_view status_name(LimitStatus s) noexcept {
    switch (s) {
        case LimitStatus::Slack: return "slack";
        case LimitStatus::Binding: return "binding";
        case LimitStatus::Violated: return "violated";
    }
    return "?";
}

struct CongestionReport {
    std::array<LimitStatus, 2> injection{LimitStatus::Slack, LimitStatus::Slack};  // P1, P2
    std::array<LimitStatus, 3> line{LimitStatus::Slack, LimitStatus::Slack, LimitStatus::Slack};

    /// Any constraint binding or violated.
    [[nodiscard]] bool congested() const {
        auto tight = [](LimitStatus s) { return s != LimitStatus::Slack; };
        return std::any_of(injection.begin(), injection.end(), tight) ||
               std::any_of(line.begin(), line.end(), tight);
    }
};

struct OpfSolution {
    double p1 = 0.0, p2 = 0.0;
    double pe = 0.0;  // elastic load
    double pd = 0.0;  // total load Pc + Pe
    double theta2 = 0.0, theta3 = 0.0;
    std::array<double, 3> flows{};  // P12, P13, P23
    double objective = 0.0;
    bool elastic_load_infeasible = false;  // Pe < 0: marginal value and costs out of balance
    CongestionReport congestion;
};

/// beta1 P1^2 + beta2 P2^2 - alpha Pe with Pe = P1 + P2 - Pc.
[[nodiscard]] inline double opf_objective(const ThreeBusNetwork& n, double p1, double p2) {
    return n.beta1 * p1 * p1 + n.beta2 * p2 * p2 - n.alpha * (p1 + p2 - n.pc);
}

namespace detail {

inline LimitStatus classify(double value, double lower, double upper) {
    auto near = [](double v, double limit) {
        return std::isfinite(limit) && std::abs(v - limit) <= 1e-9 * std::max(1.0, std::abs(limit));
    };
    if (near(value, lower) || near(value, upper)) return LimitStatus::Binding;
    if (value < lower || value > upper) return LimitStatus::Violated;
    return LimitStatus::Slack;
}

}  // namespace detail

/// Injections in [0, Pj_max]; line flows as |P_ij| <= P_ij_max.
[[nodiscard]] inline CongestionReport check_congestion(const OpfSolution& sol, const ThreeBusNetwork& n) {
    CongestionReport r;
    r.injection[0] = detail::classify(sol.p1, 0.0, n.pmax[0]);
    r.injection[1] = detail::classify(sol.p2, 0.0, n.pmax[1]);
    for (std::size_t k = 0; k < 3; ++k) {
        double f = std::abs(sol.flows[k]);
        // |P| >= 0 always holds; only the upper limit can bind.
        r.line[k] = detail::classify(f, -kInf, n.fmax[k]);
    }
    return r;
}

/// Line flows from the explicit formula in injections and conductances.
[[nodiscard]] inline std::array<double, 3> line_flows_closed_form(const ThreeBusNetwork& n) {
    const auto c = conductance_matrices(n);
    if (c.D == 0.0) throw NetworkError("singular network: D = 0");
    const double g1 = n.alpha / (2.0 * n.beta1);
    const double g2 = n.alpha / (2.0 * n.beta2);
    return {g1 * c.b12 * c.b23 / c.D - g2 * c.b12 * c.b13 / c.D,
            g1 * (c.b12 + c.b23) * c.b13 / c.D + g2 * c.b12 * c.b13 / c.D,
            g1 * c.b12 * c.b23 / c.D + g2 * (c.b12 + c.b13) * c.b23 / c.D};
}

[[nodiscard]] inline OpfSolution unconstrained_opf(const ThreeBusNetwork& n) {
    const auto c = conductance_matrices(n);
    Eigen::FullPivLU<Eigen::Matrix2d> lu(c.Br);
    if (!lu.isInvertible()) throw NetworkError("singular reduced conductance matrix");

    OpfSolution s;
    s.p1 = n.alpha / (2.0 * n.beta1);
    s.p2 = n.alpha / (2.0 * n.beta2);
    s.pe = 0.5 * (n.alpha / n.beta1 + n.alpha / n.beta2) - n.pc;
    s.pd = n.pc + s.pe;
    s.elastic_load_infeasible = s.pe < 0.0;

    const Eigen::Vector2d theta = lu.solve(Eigen::Vector2d(s.p1, s.p2));
    s.theta2 = theta[0];
    s.theta3 = theta[1];
    const Eigen::Vector3d flows = c.H * theta;
    s.flows = {flows[0], flows[1], flows[2]};
    s.objective = opf_objective(n, s.p1, s.p2);
    s.congestion = check_congestion(s, n);
    return s;
}

/// Largest bus power-balance residual: bus 1 exports P1, bus 2 exports P2,
/// bus 3 absorbs Pd.
[[nodiscard]] inline double conservation_residual(const OpfSolution& s) {
    const auto& f = s.flows;
    return std::max({std::abs(f[0] + f[1] - s.p1), std::abs(f[2] - f[0] - s.p2),
                     std::abs(f[1] + f[2] - s.pd), std::abs(s.p1 + s.p2 - s.pd)});
}

/// Maps injections (P1, P2) directly to line flows: H * Br^-1.
[[nodiscard]] inline Eigen::Matrix<double, 3, 2> sensitivity_matrix(const ThreeBusNetwork& n) {
    const auto c = conductance_matrices(n);
    Eigen::FullPivLU<Eigen::Matrix2d> lu(c.Br);
    if (!lu.isInvertible()) throw NetworkError("singular reduced conductance matrix");
    return c.H * lu.inverse();
}

/// Largest entrywise distance from the weak-b13 limit [[1,0],[0,0],[1,1]].
[[nodiscard]] inline double weak_link_pattern_deviation(const Eigen::Matrix<double, 3, 2>& s) {
    Eigen::Matrix<double, 3, 2> limit;
    limit << 1, 0, 0, 0, 1, 1;
    return (s - limit).cwiseAbs().maxCoeff();
}

struct ReactanceTriple {
    std::optional<double> x12, x13, x23;
};

struct IndependenceCase {
    ReactanceTriple reactances;
    double objective = 0.0;
    bool congested = false;
};

struct IndependenceReport {
    std::vector<IndependenceCase> cases;
    double max_relative_spread = 0.0;  // over uncongested cases
    bool objectives_equal = true;      // spread <= 1e-9
    std::size_t congested_count = 0;
};

/// Optimal objective under each reactance triple. Congested cases are
/// reported but excluded from the equality claim.
[[nodiscard]] inline IndependenceReport objective_independence_check(
    const ThreeBusNetwork& n, std::span<const ReactanceTriple> perturbations) {
    IndependenceReport r;
    std::optional<double> reference;
    for (const auto& t : perturbations) {
        ThreeBusNetwork m = n;
        m.x12 = t.x12;
        m.x13 = t.x13;
        m.x23 = t.x23;
        auto s = unconstrained_opf(m);
        IndependenceCase ic{t, s.objective, s.congestion.congested()};
        r.cases.push_back(ic);
        if (ic.congested) {
            ++r.congested_count;
            continue;
        }
        if (!reference) {
            reference = s.objective;
            continue;
        }
        double spread = std::abs(s.objective - *reference) / std::max(1.0, std::abs(*reference));
        r.max_relative_spread = std::max(r.max_relative_spread, spread);
    }
    r.objectives_equal = r.max_relative_spread <= 1e-9;
    return r;
}

struct P23Sensitivity {
    std::vector<std::array<double, 2>> rows;  // (beta1, P23)
    double fitted_c = 0.0;                    // slope against 1/beta1
    double fitted_intercept = 0.0;
};

/// P23 across generator-1 cost coefficients, with a least-squares fit of
/// P23 = C / beta1 + c0.
[[nodiscard]] inline P23Sensitivity p23_cost_sensitivity(const ThreeBusNetwork& n,
                                                         std::span<const double> beta1_grid) {
    P23Sensitivity out;
    for (double b1 : beta1_grid) {
        ThreeBusNetwork m = n;
        m.beta1 = b1;
        out.rows.push_back({b1, line_flows_closed_form(m)[2]});
    }
    if (out.rows.size() >= 2) {
        Eigen::MatrixXd design(static_cast<Eigen::Index>(out.rows.size()), 2);
        Eigen::VectorXd y(static_cast<Eigen::Index>(out.rows.size()));
        for (std::size_t i = 0; i < out.rows.size(); ++i) {
            auto k = static_cast<Eigen::Index>(i);
            design(k, 0) = 1.0 / out.rows[i][0];
            design(k, 1) = 1.0;
            y[k] = out.rows[i][1];
        }
        Eigen::Vector2d coef = design.colPivHouseholderQr().solve(y);
        out.fitted_c = coef[0];
        out.fitted_intercept = coef[1];
    }
    return out;
}

}  // namespace kbraess
