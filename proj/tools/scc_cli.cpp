#include "scc/io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>

namespace {

struct Common {
    std::string case_name;
    std::string scenario;
    std::string fault_bus;
    std::string fault_type;
    std::string zft = "j0.1";
    std::optional<double> tol;
    std::optional<int> max_outer;
    std::optional<std::uint64_t> fallback_seed;
    std::string x0;
    std::string format = "table";
    std::string out;
    std::string i_d0 = "given";
    bool timing = false;
    bool warm_start = false;
};

void add_case_options(CLI::App& cmd, Common& c)
{
    cmd.add_option("--case", c.case_name, "bundled case name or case file path")->required();
    cmd.add_option("--tol", c.tol, "residual tolerance of the inner solver");
    cmd.add_option("--format", c.format, "output format")->check(CLI::IsMember({"table", "records"}));
    cmd.add_option("--out", c.out, "write output to this file instead of stdout");
    cmd.add_flag("--timing", c.timing, "include wall-clock time in the output");
}

void add_fault_options(CLI::App& cmd, Common& c)
{
    cmd.add_option("--scenario", c.scenario, "scenario file");
    cmd.add_option("--fault-bus", c.fault_bus, "faulted bus id");
    cmd.add_option("--fault-type", c.fault_type, "fault type")
        ->transform(CLI::IsMember({"3p2g", "p2p", "1p2g", "none"}, CLI::ignore_case));
    cmd.add_option("--zft", c.zft, "fault impedance, e.g. j0.1 or 0.01+0.1j");
    cmd.add_option("--i-d0", c.i_d0, "pre-fault reactive current policy")
        ->check(CLI::IsMember({"given", "prefault-solve"}));
}

scc::FaultSpec fault_from_flags(const Common& c, const std::string& type)
{
    scc::FaultSpec f;
    const auto kind = scc::parse_fault_kind(type);
    if (!kind) {
        throw scc::InputError({"unknown fault type '" + type + "'"});
    }
    f.kind = *kind;
    if (f.kind == scc::FaultKind::none) {
        return f;
    }
    if (c.fault_bus.empty()) {
        throw scc::InputError({"--fault-bus is required for a fault study"});
    }
    f.bus = c.fault_bus;
    const auto z = scc::parse_complex(c.zft);
    if (!z || *z == scc::Complex<double>(0.0, 0.0)) {
        throw scc::InputError({"--zft: expected a nonzero complex impedance, got '" + c.zft + "'"});
    }
    f.z_ft = *z;
    return f;
}

scc::StateVector parse_states(const std::string& text)
{
    scc::StateVector out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::string token = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        const auto s = scc::parse_sat_state(token);
        if (!s) {
            throw scc::InputError({"--x0: unknown state '" + token + "'"});
        }
        out.push_back(*s);
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

struct Study {
    scc::CaseFile cf;
    scc::ScenarioFile scenario;
    scc::AlgorithmOptions options;
};

Study prepare(const Common& c, bool need_fault)
{
    Study s;
    s.cf = scc::load_case(c.case_name);
    if (!c.scenario.empty()) {
        s.scenario = scc::load_scenario(c.scenario, s.cf.model);
    } else if (need_fault) {
        if (c.fault_type.empty()) {
            throw scc::InputError({"give --scenario or --fault-type (with --fault-bus and --zft)"});
        }
        s.scenario.faults.push_back(fault_from_flags(c, c.fault_type));
    }
    s.options.solver = s.cf.solver;
    if (c.tol) {
        s.options.solver.tol_residual = *c.tol;
    }
    s.options.n_t_max = c.max_outer ? c.max_outer : s.scenario.n_t_max;
    s.options.fallback_seed = c.fallback_seed;
    s.options.warm_start = c.warm_start;
    s.options.x0 = c.x0.empty() ? s.scenario.x0 : std::optional(parse_states(c.x0));
    if (c.i_d0 == "prefault-solve") {
        s.scenario.i_d0_policy = scc::IdPolicy::prefault_solve;
    }
    return s;
}

void write_output(const Common& c, const std::vector<scc::ResultRecord>& records)
{
    const auto format = c.format == "records" ? scc::OutputFormat::records : scc::OutputFormat::table;
    const std::string text = scc::emit_results(records, format);
    if (c.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f) {
        throw scc::InputError({"cannot write '" + c.out + "'"});
    }
    f << text;
}

int exit_code(const std::vector<scc::ResultRecord>& records)
{
    for (const auto& r : records) {
        if (r.study != "prefault" && !r.found()) {
            return 2;
        }
    }
    return 0;
}

template <typename F>
scc::ResultRecord timed(const Common& c, F&& run)
{
    const auto t0 = std::chrono::steady_clock::now();
    scc::ResultRecord r = run();
    if (c.timing) {
        r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    return r;
}

// Runs the requested studies for every fault of the scenario.
std::vector<scc::ResultRecord> run_studies(const Common& c, Study& s, scc::StudyMode mode)
{
    std::vector<scc::ResultRecord> records;
    const scc::Model& model = s.cf.model;
    const bool any_fault = std::any_of(s.scenario.faults.begin(), s.scenario.faults.end(),
                                       [](const scc::FaultSpec& f) { return f.kind != scc::FaultKind::none; });
    if (s.scenario.i_d0_policy == scc::IdPolicy::prefault_solve) {
        records.push_back(timed(c, [&] { return scc::apply_prefault_i_d0(s.cf.model, s.options); }));
    } else if (any_fault) {
        scc::require_i_d0(model);
    }
    for (const scc::FaultSpec& fault : s.scenario.faults) {
        if (mode != scc::StudyMode::exhaustive) {
            records.push_back(timed(c, [&] {
                return scc::make_iterative_record(model, fault, scc::run_algorithm(model, fault, s.options));
            }));
        }
        if (mode != scc::StudyMode::iterative) {
            records.push_back(timed(c, [&] {
                return scc::make_oracle_record(model, fault, scc::exhaustive_oracle(model, fault, s.options.solver));
            }));
        }
    }
    return records;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Steady-state short-circuit solver for converter-dominated grids"};
    app.require_subcommand(1);

    Common c;
    std::vector<std::string> sweep_types;
    std::vector<std::string> sweep_zft;

    auto* solve = app.add_subcommand("solve", "iterative equilibrium search (scenario mode honored)");
    add_case_options(*solve, c);
    add_fault_options(*solve, c);
    solve->add_option("--max-outer", c.max_outer, "outer iteration cap n_t_max")->check(CLI::PositiveNumber);
    solve->add_option("--x0", c.x0, "initial states, comma separated (e.g. USS,FSS)");
    solve->add_option("--fallback-seed", c.fallback_seed, "draw loop-avoidance fallbacks at random with this seed");
    solve->add_flag("--warm-start", c.warm_start, "start each solve from the previous converged solution");

    auto* oracle = app.add_subcommand("oracle", "solve every state combination and list valid equilibria");
    add_case_options(*oracle, c);
    add_fault_options(*oracle, c);

    auto* prefault = app.add_subcommand("prefault", "fault-free solve and the implied i_d0 of each PQ converter");
    add_case_options(*prefault, c);

    auto* sweep = app.add_subcommand("sweep", "iterative search over fault types and impedances");
    add_case_options(*sweep, c);
    sweep->add_option("--fault-bus", c.fault_bus, "faulted bus id")->required();
    sweep->add_option("--fault-types", sweep_types, "fault types")
        ->delimiter(',')
        ->transform(CLI::IsMember({"3p2g", "p2p", "1p2g"}, CLI::ignore_case))
        ->required();
    sweep->add_option("--zft", sweep_zft, "fault impedances")->delimiter(',')->required();
    sweep->add_option("--i-d0", c.i_d0, "pre-fault reactive current policy")
        ->check(CLI::IsMember({"given", "prefault-solve"}));
    sweep->add_option("--max-outer", c.max_outer, "outer iteration cap n_t_max")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        std::vector<scc::ResultRecord> records;
        if (solve->parsed()) {
            Study s = prepare(c, true);
            records = run_studies(c, s, s.scenario.mode);
        } else if (oracle->parsed()) {
            Study s = prepare(c, true);
            records = run_studies(c, s, scc::StudyMode::exhaustive);
        } else if (prefault->parsed()) {
            Study s = prepare(c, false);
            records.push_back(timed(c, [&] { return scc::apply_prefault_i_d0(s.cf.model, s.options); }));
        } else if (sweep->parsed()) {
            Study s = prepare(c, false);
            for (const std::string& type : sweep_types) {
                for (const std::string& z : sweep_zft) {
                    Common fc = c;
                    fc.zft = z;
                    s.scenario.faults.push_back(fault_from_flags(fc, type));
                }
            }
            records = run_studies(c, s, scc::StudyMode::iterative);
        }
        write_output(c, records);
        return exit_code(records);
    } catch (const scc::InputError& e) {
        for (const auto& d : e.diagnostics()) {
            std::cerr << "error: " << d << "\n";
        }
        return 1;
    } catch (const scc::ModelError& e) {
        for (const auto& d : e.problems()) {
            std::cerr << "error: " << d << "\n";
        }
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
