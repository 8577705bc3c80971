#pragma once

// Selfish routing on the four-segment diamond with an optional cross link.
//
//   left route:  A then B        cost (f_A + beta) + alpha f_B
//   right route: C then D        cost alpha f_C + (f_D + beta)
//   cross route: C, link, B      cost alpha f_C + gamma(f_link) + alpha f_B
//
// Travelers are atomic (integer counts).

#include "kbraess/error.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <string_view>

namespace kbraess {

enum class Route { Left = 0, Right = 1, Cross = 2 };

[[nodiscard]] constexpr std::string_view route_name(Route r) noexcept {
    switch (r) {
        case Route::Left: return "left (A-B)";
        case Route::Right: return "right (C-D)";
        case Route::Cross: return "cross (C-link-B)";
    }
    return "?";
}

struct TransportNetwork {
    double alpha = 10.0;
    double beta = 50.0;
    std::function<double(int)> cross_cost = [](int) { return 0.0; };
    int travelers = 6;

    void validate() const {
        if (!(alpha > 0.0)) throw Error("alpha must be positive");
        if (!(beta >= 0.0)) throw Error("beta must be nonnegative");
        if (travelers < 1) throw Error("at least one traveler is required");
        if (!cross_cost) throw Error("cross-link cost function is empty");
    }
};

struct RouteAssignment {
    std::array<int, 3> count{};  // indexed by Route

    [[nodiscard]] int& operator[](Route r) { return count[static_cast<std::size_t>(r)]; }
    [[nodiscard]] int operator[](Route r) const { return count[static_cast<std::size_t>(r)]; }
    [[nodiscard]] int total() const { return count[0] + count[1] + count[2]; }

    friend bool operator==(const RouteAssignment&, const RouteAssignment&) = default;
};

/// Per-traveler cost of each route under the given assignment. The counts need
/// not add up to the network's traveler total.
[[nodiscard]] inline std::array<double, 3> route_costs(const TransportNetwork& t,
                                                       const RouteAssignment& a) {
    const int f_a = a[Route::Left];
    const int f_b = a[Route::Left] + a[Route::Cross];
    const int f_c = a[Route::Right] + a[Route::Cross];
    const int f_d = a[Route::Right];
    return {(f_a + t.beta) + t.alpha * f_b,
            t.alpha * f_c + (f_d + t.beta),
            t.alpha * f_c + t.cross_cost(a[Route::Cross]) + t.alpha * f_b};
}

struct TransportOutcome {
    RouteAssignment flows;
    std::array<double, 3> route_cost{};  // per traveler, for routes in use or not
    double total_cost = 0.0;
    double worst_cost = 0.0;             // highest per-traveler cost among used routes
};

[[nodiscard]] inline TransportOutcome evaluate_assignment(const TransportNetwork& t,
                                                          const RouteAssignment& a) {
    TransportOutcome o;
    o.flows = a;
    o.route_cost = route_costs(t, a);
    for (std::size_t r = 0; r < 3; ++r) {
        if (a.count[r] == 0) continue;
        o.total_cost += a.count[r] * o.route_cost[r];
        o.worst_cost = std::max(o.worst_cost, o.route_cost[r]);
    }
    return o;
}

namespace detail {

inline int route_limit(bool with_cross_link) { return with_cross_link ? 3 : 2; }

/// Cost a traveler on `from` would see after moving alone to `to`.
inline double deviation_cost(const TransportNetwork& t, RouteAssignment a, Route from, Route to) {
    --a[from];
    ++a[to];
    return route_costs(t, a)[static_cast<std::size_t>(to)];
}

inline constexpr double kCostSlack = 1e-12;

}  // namespace detail

/// True when no traveler can strictly lower their own cost by switching
/// routes alone. Checks every (route, alternative) pair.
[[nodiscard]] inline bool is_nash(const TransportNetwork& t, const RouteAssignment& a,
                                  bool with_cross_link) {
    const auto costs = route_costs(t, a);
    const int routes = detail::route_limit(with_cross_link);
    for (int from = 0; from < routes; ++from) {
        if (a.count[static_cast<std::size_t>(from)] == 0) continue;
        for (int to = 0; to < routes; ++to) {
            if (to == from) continue;
            double moved = detail::deviation_cost(t, a, Route(from), Route(to));
            if (moved < costs[static_cast<std::size_t>(from)] - detail::kCostSlack) return false;
        }
    }
    return true;
}

struct TransportReport {
    bool with_cross_link = false;
    TransportOutcome nash;
    TransportOutcome social_optimum;
    /// Every traveler of the link-free equilibrium simultaneously switches to
    /// the route that looks cheapest to them alone (myopic best response).
    /// Only meaningful with the cross link; equals `nash` otherwise.
    TransportOutcome herd;
};

namespace detail {

/// Travelers enter one at a time, each taking the route that is cheapest once
/// they join it; ties go to the less used route, then to route order.
inline RouteAssignment greedy_entry(const TransportNetwork& t, bool with_cross_link) {
    RouteAssignment a;
    const int routes = route_limit(with_cross_link);
    for (int k = 0; k < t.travelers; ++k) {
        int best = 0;
        double best_cost = std::numeric_limits<double>::infinity();
        for (int r = 0; r < routes; ++r) {
            RouteAssignment trial = a;
            ++trial[Route(r)];
            double c = route_costs(t, trial)[static_cast<std::size_t>(r)];
            bool better = c < best_cost - kCostSlack;
            bool tie = std::abs(c - best_cost) <= kCostSlack &&
                       a.count[static_cast<std::size_t>(r)] < a.count[static_cast<std::size_t>(best)];
            if (better || tie) {
                best = r;
                best_cost = c;
            }
        }
        ++a[Route(best)];
    }
    return a;
}

/// Single-traveler improving moves until none exists. The game has an exact
/// potential, so this terminates.
inline RouteAssignment best_response(const TransportNetwork& t, RouteAssignment a,
                                     bool with_cross_link) {
    const int routes = route_limit(with_cross_link);
    for (bool moved = true; moved;) {
        moved = false;
        const auto costs = route_costs(t, a);
        for (int from = 0; from < routes && !moved; ++from) {
            if (a.count[static_cast<std::size_t>(from)] == 0) continue;
            int best_to = -1;
            double best = costs[static_cast<std::size_t>(from)] - kCostSlack;
            for (int to = 0; to < routes; ++to) {
                if (to == from) continue;
                double c = deviation_cost(t, a, Route(from), Route(to));
                if (c < best) {
                    best = c;
                    best_to = to;
                }
            }
            if (best_to >= 0) {
                --a[Route(from)];
                ++a[Route(best_to)];
                moved = true;
            }
        }
    }
    return a;
}

inline RouteAssignment social_optimum(const TransportNetwork& t, bool with_cross_link) {
    RouteAssignment best;
    double best_total = std::numeric_limits<double>::infinity();
    const int max_cross = with_cross_link ? t.travelers : 0;
    for (int cross = 0; cross <= max_cross; ++cross) {
        for (int left = 0; left + cross <= t.travelers; ++left) {
            RouteAssignment a;
            a[Route::Left] = left;
            a[Route::Cross] = cross;
            a[Route::Right] = t.travelers - left - cross;
            double total = evaluate_assignment(t, a).total_cost;
            if (total < best_total - kCostSlack) {
                best_total = total;
                best = a;
            }
        }
    }
    return best;
}

inline RouteAssignment herd_move(const TransportNetwork& t, const RouteAssignment& start) {
    const auto costs = route_costs(t, start);
    RouteAssignment next;
    for (int from = 0; from < 3; ++from) {
        int n = start.count[static_cast<std::size_t>(from)];
        if (n == 0) continue;
        int target = from;
        double best = costs[static_cast<std::size_t>(from)] - kCostSlack;
        for (int to = 0; to < 3; ++to) {
            if (to == from) continue;
            double c = deviation_cost(t, start, Route(from), Route(to));
            if (c < best) {
                best = c;
                target = to;
            }
        }
        next[Route(target)] += n;
    }
    return next;
}

}  // namespace detail

[[nodiscard]] inline TransportReport transport_equilibrium(const TransportNetwork& t,
                                                           bool with_cross_link) {
    t.validate();
    TransportReport r;
    r.with_cross_link = with_cross_link;
    auto nash = detail::best_response(t, detail::greedy_entry(t, with_cross_link), with_cross_link);
    r.nash = evaluate_assignment(t, nash);
    r.social_optimum = evaluate_assignment(t, detail::social_optimum(t, with_cross_link));
    if (with_cross_link) {
        auto before = detail::best_response(t, detail::greedy_entry(t, false), false);
        r.herd = evaluate_assignment(t, detail::herd_move(t, before));
    } else {
        r.herd = r.nash;
    }
    return r;
}

}  // namespace kbraess
