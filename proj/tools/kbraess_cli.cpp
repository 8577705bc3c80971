// kbraess command-line front end.
//
// Exit status: 0 success, 1 violated invariant or inconsistent circuit,
// 2 usage or input-format error.

#include "kbraess/kbraess.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace kbraess;

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::vector<double> parse_grid(const std::string& spec, bool linear) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw UsageError("--grid expects lo:hi:npoints");
    double lo = 0, hi = 0;
    long n = 0;
    try {
        lo = std::stod(parts[0]);
        hi = std::stod(parts[1]);
        n = std::stol(parts[2]);
    } catch (const std::exception&) {
        throw UsageError("--grid: cannot parse \"" + spec + "\"");
    }
    if (n < 1 || !(lo > 0.0) || !(hi >= lo)) throw UsageError("--grid needs 0 < lo <= hi and npoints >= 1");
    std::vector<double> grid;
    for (long k = 0; k < n; ++k) {
        double t = n == 1 ? 0.0 : double(k) / double(n - 1);
        grid.push_back(linear ? lo + t * (hi - lo) : lo * std::pow(hi / lo, t));
    }
    grid.back() = hi;
    return grid;
}

std::vector<double> parse_list(const std::string& spec) {
    std::vector<double> out;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ',');) {
        try {
            out.push_back(std::stod(p));
        } catch (const std::exception&) {
            throw UsageError("cannot parse number \"" + p + "\"");
        }
    }
    return out;
}

void print_solution(std::ostream& out, const Circuit& c, const SolvedState& s) {
    out << "node voltages (V)\n";
    for (std::size_t n = 0; n < c.node_count(); ++n) out << "  " << n << "  " << s.node_voltages[n] << '\n';
    out << "branch currents (A, a->b positive)\n";
    for (std::size_t i = 0; i < c.element_count(); ++i) {
        const auto& e = c.element(i);
        out << "  " << i << "  " << kind_code(e.kind) << ' ' << to_index(e.a) << "->" << to_index(e.b)
            << "  " << s.branch_currents[i];
        if (e.is_resistor()) out << "  loss " << s.branch_losses[i] << " W";
        out << '\n';
    }
    out << "total loss: " << s.total_loss << " W (intra-component " << s.intra_component_loss
        << ", inter-component " << s.inter_component_loss << ")\n";
    out << "KCL residual: " << kcl_residual(c, s.branch_currents) << '\n';
}

int cmd_solve(const std::string& path, std::ostream& out) {
    auto c = circuit_from_json(read_json_file(path));
    auto s = solve(c);
    print_solution(out, c, s);
    return kOk;
}

int cmd_lcl(const std::string& path, const std::vector<std::size_t>& add, std::optional<double> resistor,
            std::optional<double> source, std::ostream& out) {
    if (add.size() != 2) throw UsageError("--add expects two node indices");
    if (resistor.has_value() == source.has_value()) throw UsageError("give exactly one of --resistor or --source");
    auto c = circuit_from_json(read_json_file(path));
    auto link = resistor ? LinkSpec::resistor(add[0], add[1], *resistor) : LinkSpec::source(add[0], add[1], *source);
    auto r = lcl(c, link);
    out << "link " << add[0] << "-" << add[1] << (resistor ? " resistor " : " source ")
        << (resistor ? *resistor : *source) << '\n';
    out << "loss before: " << r.loss_before << " W\n";
    out << "loss after:  " << r.loss_after << " W (includes " << r.link_loss << " W in the new link)\n";
    out << "LCL: " << r.lcl << '\n';
    out << "original resistors only: " << r.original_loss_after << " W, ratio " << r.original_lcl << '\n';
    out << "per-branch loss change (W)\n";
    for (std::size_t i = 0; i < c.element_count(); ++i) {
        if (c.element(i).is_resistor()) out << "  " << i << "  " << r.per_branch_delta[i] << '\n';
    }
    return kOk;
}

int cmd_sweep(const BraessCircuitParams& p, const std::string& grid, bool linear, const std::string& out_path,
              std::ostream& out) {
    auto rows = sweep_cross_link(p, parse_grid(grid, linear));
    if (out_path.empty()) {
        write_sweep_csv(out, rows);
        return kOk;
    }
    std::ofstream file(out_path);
    if (!file) throw UsageError("cannot write " + out_path);
    write_sweep_csv(file, rows);
    out << "wrote " << rows.size() << " rows to " << out_path << '\n';
    return kOk;
}

int cmd_opf(const std::string& path, std::ostream& out) {
    auto n = network_from_json(read_json_file(path));
    auto s = unconstrained_opf(n);
    auto closed = line_flows_closed_form(n);
    out << "P1 = " << s.p1 << "  P2 = " << s.p2 << "  Pe = " << s.pe << "  Pd = " << s.pd << '\n';
    out << "theta2 = " << s.theta2 << "  theta3 = " << s.theta3 << '\n';
    out << "flows: P12 = " << s.flows[0] << "  P13 = " << s.flows[1] << "  P23 = " << s.flows[2] << '\n';
    double gap = 0.0;
    for (std::size_t k = 0; k < 3; ++k) gap = std::max(gap, std::abs(closed[k] - s.flows[k]));
    out << "closed-form flow gap: " << gap << '\n';
    out << "conservation residual: " << conservation_residual(s) << '\n';
    out << "objective: " << s.objective << '\n';
    if (s.elastic_load_infeasible) out << "WARNING: elastic load infeasible (Pe < 0)\n";
    out << "congestion\n";
    const char* inj[] = {"P1", "P2"};
    const char* lines[] = {"P12", "P13", "P23"};
    for (std::size_t k = 0; k < 2; ++k) {
        out << "  " << std::left << std::setw(4) << inj[k] << " limit " << std::setw(12) << n.pmax[k] << " "
            << status_name(s.congestion.injection[k]) << '\n';
    }
    for (std::size_t k = 0; k < 3; ++k) {
        out << "  " << std::left << std::setw(4) << lines[k] << " limit " << std::setw(12) << n.fmax[k] << " "
            << status_name(s.congestion.line[k]) << '\n';
    }
    out << (s.congestion.congested() ? "congested\n" : "uncongested\n");
    return kOk;
}

int cmd_sensitivity(const std::string& path, const std::string& beta1_grid, std::ostream& out) {
    auto n = network_from_json(read_json_file(path));
    auto c = conductance_matrices(n);
    auto m = sensitivity_matrix(n);
    out << "b12 = " << c.b12 << "  b13 = " << c.b13 << "  b23 = " << c.b23 << "  D = " << c.D << '\n';
    out << "H * Br^-1 (rows P12, P13, P23; columns P1, P2)\n";
    for (int r = 0; r < 3; ++r) out << "  " << std::setw(16) << m(r, 0) << std::setw(16) << m(r, 1) << '\n';
    out << "max deviation from [[1,0],[0,0],[1,1]]: " << weak_link_pattern_deviation(m) << '\n';
    if (!beta1_grid.empty()) {
        auto grid = parse_list(beta1_grid);
        auto fit = p23_cost_sensitivity(n, grid);
        out << "beta1,P23\n";
        for (const auto& row : fit.rows) out << "  " << row[0] << ", " << row[1] << '\n';
        out << "fit P23 = C/beta1 + c0: C = " << fit.fitted_c << "  c0 = " << fit.fitted_intercept
            << "  (alpha/2 = " << n.alpha / 2.0 << ")\n";
    }
    return kOk;
}

void print_outcome(std::ostream& out, const char* label, const TransportOutcome& o, bool with_link) {
    out << "  " << std::left << std::setw(16) << label;
    const Route routes[] = {Route::Left, Route::Right, Route::Cross};
    for (auto r : routes) {
        if (r == Route::Cross && !with_link) continue;
        out << route_name(r) << ": " << o.flows[r] << " @ " << o.route_cost[static_cast<std::size_t>(r)] << "   ";
    }
    out << "total " << o.total_cost << '\n';
}

int cmd_transport(double alpha, double beta, int travelers, double cross_cost, std::ostream& out) {
    TransportNetwork t;
    t.alpha = alpha;
    t.beta = beta;
    t.travelers = travelers;
    t.cross_cost = [cross_cost](int) { return cross_cost; };
    for (bool with_link : {false, true}) {
        auto r = transport_equilibrium(t, with_link);
        out << (with_link ? "with cross link\n" : "without cross link\n");
        print_outcome(out, "Nash", r.nash, with_link);
        print_outcome(out, "social optimum", r.social_optimum, with_link);
        if (with_link) {
            print_outcome(out, "herd", r.herd, with_link);
            out << "  herd assignment is " << (is_nash(t, r.herd.flows, true) ? "" : "not ")
                << "a Nash equilibrium\n";
            RouteAssignment half;
            half[Route::Cross] = travelers / 2;
            out << "  cross route with only " << half[Route::Cross] << " travelers: "
                << route_costs(t, half)[static_cast<std::size_t>(Route::Cross)] << '\n';
        }
    }
    return kOk;
}

int cmd_verify(std::uint64_t seed, std::size_t cases, std::ostream& out) {
    auto links = run_link_addition_suite(seed, cases);
    out << "LCL>=1 in " << links.lcl_at_least_one << "/" << links.cases << " cases (min " << links.min_lcl
        << ")\n";
    out << "original-resistor loss nondecreasing in " << links.original_loss_nondecreasing << "/" << links.cases
        << " cases\n";
    out << "same-component link leaves original loss unchanged in " << links.same_component_unit << "/"
        << links.same_component_cases << " cases\n";
    auto opf = run_opf_independence_suite(seed, std::max<std::size_t>(1, cases / 10));
    out << "OPF optimum matches numerical minimisation in " << opf.injections_match << "/" << opf.networks
        << " networks (worst " << opf.worst_injection_error << ")\n";
    out << "OPF objective independent of reactances in " << opf.objectives_equal << "/" << opf.networks
        << " networks (worst spread " << opf.worst_objective_spread << ")\n";
    for (const auto& f : links.failures) out << "FAIL " << f << '\n';
    for (const auto& f : opf.failures) out << "FAIL " << f << '\n';
    return links.passed() && opf.passed() ? kOk : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Link-addition loss analysis for DC circuits and three-bus power networks"};
    app.require_subcommand(1);

    std::string input;
    auto* solve_cmd = app.add_subcommand("solve", "Solve a circuit file and print voltages, currents, losses");
    solve_cmd->add_option("input", input, "circuit JSON")->required()->check(CLI::ExistingFile);

    std::vector<std::size_t> add;
    std::optional<double> resistor, source;
    auto* lcl_cmd = app.add_subcommand("lcl", "Loss cost of attaching a link to a circuit");
    lcl_cmd->add_option("input", input, "circuit JSON")->required()->check(CLI::ExistingFile);
    lcl_cmd->add_option("--add", add, "endpoints of the new link")->expected(2)->required();
    auto* r_opt = lcl_cmd->add_option("--resistor", resistor, "link resistance (ohms)");
    auto* v_opt = lcl_cmd->add_option("--source", source, "link source voltage (volts, a->b)");
    r_opt->excludes(v_opt);

    BraessCircuitParams params;
    std::string grid, out_path;
    bool linear = false;
    auto* sweep_cmd = app.add_subcommand("sweep", "Cross-link resistance sweep of the two-source network (CSV)");
    sweep_cmd->add_option("--e1", params.e1, "source E1 (V)")->capture_default_str();
    sweep_cmd->add_option("--e2", params.e2, "source E2 (V)")->capture_default_str();
    sweep_cmd->add_option("--r1", params.r1, "resistor R1 (ohms)")->capture_default_str();
    sweep_cmd->add_option("--r2", params.r2, "resistor R2 (ohms)")->capture_default_str();
    sweep_cmd->add_option("--grid", grid, "lo:hi:npoints (log-spaced)")->required();
    sweep_cmd->add_flag("--linear", linear, "space the grid linearly");
    sweep_cmd->add_option("--out", out_path, "write CSV here instead of stdout");

    auto* opf_cmd = app.add_subcommand("opf", "Unconstrained DC optimal power flow with congestion table");
    opf_cmd->add_option("input", input, "network JSON")->required()->check(CLI::ExistingFile);

    std::string beta1_grid;
    auto* sens_cmd = app.add_subcommand("sensitivity", "Injection-to-flow sensitivity H*Br^-1");
    sens_cmd->add_option("input", input, "network JSON")->required()->check(CLI::ExistingFile);
    sens_cmd->add_option("--beta1-grid", beta1_grid, "comma-separated beta1 values for the P23 fit");

    double alpha = 10.0, beta = 50.0, cross_cost = 0.0;
    int travelers = 6;
    auto* transport_cmd = app.add_subcommand("transport", "Braess diamond: Nash vs social optimum");
    transport_cmd->add_option("--alpha", alpha)->capture_default_str();
    transport_cmd->add_option("--beta", beta)->capture_default_str();
    transport_cmd->add_option("--travelers", travelers)->capture_default_str();
    transport_cmd->add_option("--cross-cost", cross_cost, "constant cost of the cross link")->capture_default_str();

    std::uint64_t seed = 1;
    std::size_t cases = 200;
    auto* verify_cmd = app.add_subcommand("verify", "Randomized link-addition and OPF property suites");
    verify_cmd->add_option("--seed", seed)->capture_default_str();
    verify_cmd->add_option("--cases", cases)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    auto& out = std::cout;
    out << std::setprecision(9);
    try {
        if (*solve_cmd) return cmd_solve(input, out);
        if (*lcl_cmd) return cmd_lcl(input, add, resistor, source, out);
        if (*sweep_cmd) return cmd_sweep(params, grid, linear, out_path, out);
        if (*opf_cmd) return cmd_opf(input, out);
        if (*sens_cmd) return cmd_sensitivity(input, beta1_grid, out);
        if (*transport_cmd) return cmd_transport(alpha, beta, travelers, cross_cost, out);
        if (*verify_cmd) return cmd_verify(seed, cases, out);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const FormatError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kUsage;
    } catch (const kbraess::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kViolation;
    }
    return kUsage;
}
