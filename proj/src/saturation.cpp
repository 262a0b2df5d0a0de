#include "scc/saturation.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

namespace scc {

namespace {

// Relative slack on limit comparisons so a binding limit that the solver met
// to within its tolerance does not read as a violation.
constexpr double limit_slack = 1e-6;

bool exceeds(double value, double limit)
{
    return value > limit + limit_slack * std::max(1.0, std::abs(limit));
}

SatState next_pq(const VscSpec& spec, const ConverterReport& rep, bool fault_active)
{
    const RequiredCurrent req = pq_required_current(spec, rep.u_pos, fault_active);
    if (exceeds(req.reactive, spec.i_max)) {
        return SatState::fss;
    }
    if (exceeds(req.total, spec.i_max)) {
        return SatState::pss;
    }
    return SatState::uss;
}

SatState next_pv(const VscSpec& spec, SatState current, const ConverterReport& rep, bool converged)
{
    if (!converged) {
        return current == SatState::pss ? SatState::fss : current;
    }
    switch (current) {
    case SatState::uss:
        return exceeds(rep.i_pos, spec.i_max) ? SatState::pss : SatState::uss;
    case SatState::pss:
        return exceeds(std::abs(rep.power.p_con), std::abs(p_reference(spec))) ? SatState::uss : SatState::pss;
    case SatState::fss:
        return exceeds(rep.u_pos, spec.u_ref_pv) ? SatState::pss : SatState::fss;
    }
    return current;
}

SatState next_gf(const VscSpec& spec, SatState current, const ConverterReport& rep, bool converged)
{
    if (!converged) {
        return current;
    }
    if (current == SatState::uss) {
        return exceeds(rep.i_pos, spec.i_max) ? SatState::fss : SatState::uss;
    }
    return exceeds(rep.u_pos, spec.u_ref_gf) ? SatState::uss : SatState::fss;
}

EquilibriumPoint to_equilibrium(const CombinationSolve& s)
{
    return {s.f, s.states, s.outcome.x, s.outcome.residual_norm, s.point};
}

} // namespace

SolvedPoint extract_point(const SystemOfEquations& system, const VectorX<double>& x)
{
    const Model& m = system.model();
    const UnknownLayout& layout = system.layout();
    SolvedPoint p;
    for (std::size_t d = 0; d < layout.bus_count(); ++d) {
        p.bus_voltages.push_back(layout.bus_voltage(x, d));
    }
    for (std::size_t k = 0; k < m.converters.size(); ++k) {
        const SequenceTriple<double> i = layout.converter_injection(x, k);
        const SequenceTriple<double>& u = p.bus_voltages[bus_index(m.buses, m.converters[k].bus)];
        p.converter_currents.push_back(i);
        p.converters.push_back({std::abs(u.pos()), std::abs(i.pos()), power_elements(u, i)});
    }
    for (std::size_t k = 0; k < m.sources.size(); ++k) {
        const SequenceTriple<double> i = layout.source_injection(x, k);
        const SequenceTriple<double>& u = p.bus_voltages[bus_index(m.buses, m.sources[k].bus)];
        p.source_currents.push_back(i);
        p.source_power.push_back(power_elements(u, i));
    }
    p.omega = layout.omega_value(x, m.omega0);
    return p;
}

CombinationSolve solve_combination(const Model& model, const FaultSpec& fault, const StateVector& states,
                                   const SolveOptions<double>& options, const VectorX<double>* warm_start)
{
    const SystemOfEquations system(model, fault, states);
    assert(system.residual_count() == system.size());

    CombinationSolve result;
    result.f = encode(model, states);
    result.states = states;

    const auto attempt = [&](const VectorX<double>& x0) {
        result.outcome = levenberg_marquardt<double>(system, x0, options);
        result.point = extract_point(system, result.outcome.x);
        result.off_branch = false;
        result.converged = result.outcome.converged();
        if (result.converged) {
            for (std::size_t k = 0; k < states.size(); ++k) {
                if (!on_supported_branch(model.converters[k], states[k], result.point.converters[k].power)) {
                    result.off_branch = true;
                    result.converged = false;
                }
            }
        }
        return result.converged;
    };

    if (warm_start && attempt(*warm_start)) {
        return result;
    }
    if (attempt(initial_guess(system))) {
        return result;
    }
    attempt(flat_start(model));
    return result;
}

RequiredCurrent pq_required_current(const VscSpec& spec, double u_pos, bool fault_active)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (!(u_pos > 0.0)) {
        return {inf, inf};
    }
    RequiredCurrent r;
    if (fault_active) {
        r.reactive = spec.i_d0.value_or(0.0) + spec.k_isp * (spec.u_ref_gs - u_pos);
    } else {
        r.reactive = spec.q_disp / u_pos;
    }
    r.total = std::hypot(p_reference(spec) / u_pos, r.reactive);
    return r;
}

StateVector ds_update(const Model& model, bool fault_active, const CombinationSolve& solve, const StateVector& states)
{
    StateVector next = states;
    for (std::size_t k = 0; k < states.size(); ++k) {
        const VscSpec& spec = model.converters[k];
        if (!solve.converged) {
            if (spec.mode == ControlMode::pv) {
                next[k] = next_pv(spec, states[k], {}, false);
            }
            continue;
        }
        const ConverterReport& rep = solve.point.converters[k];
        switch (spec.mode) {
        case ControlMode::pq:
            next[k] = next_pq(spec, rep, fault_active);
            break;
        case ControlMode::pv:
            next[k] = next_pv(spec, states[k], rep, true);
            break;
        case ControlMode::gf:
            next[k] = next_gf(spec, states[k], rep, true);
            break;
        }
    }
    return next;
}

bool is_valid_equilibrium(const Model& model, bool fault_active, const CombinationSolve& solve)
{
    if (!solve.converged) {
        return false;
    }
    if (ds_update(model, fault_active, solve, solve.states) != solve.states) {
        return false;
    }
    for (std::size_t k = 0; k < model.converters.size(); ++k) {
        if (solve.point.converters[k].i_pos > model.converters[k].i_max * (1.0 + limit_slack)) {
            return false;
        }
    }
    return true;
}

std::optional<std::size_t> x_new_fallback(std::size_t combinations, const std::set<std::size_t>& tested)
{
    for (std::size_t f = 1; f <= combinations; ++f) {
        if (!tested.contains(f)) {
            return f;
        }
    }
    return std::nullopt;
}

AlgorithmResult run_algorithm(const Model& model, const FaultSpec& fault, const AlgorithmOptions& options)
{
    AlgorithmResult result;
    result.combinations = combination_count(model);
    result.n_t_max = options.n_t_max.value_or(static_cast<int>(result.combinations));
    if (result.n_t_max < 1) {
        throw std::invalid_argument("n_t_max must be at least 1");
    }
    const bool fault_active = fault.kind != FaultKind::none;

    StateVector states = options.x0.value_or(all_unsaturated(model));
    encode(model, states);  // validates admissibility

    std::mt19937_64 rng(options.fallback_seed.value_or(0));
    std::set<std::size_t> tested;
    std::optional<VectorX<double>> warm;

    for (int n_t = 1; n_t <= result.n_t_max; ++n_t) {
        const CombinationSolve solve = solve_combination(model, fault, states, options.solver,
                                                         options.warm_start && warm ? &*warm : nullptr);
        StateVector next = ds_update(model, fault_active, solve, states);
        tested.insert(solve.f);
        result.n_t = n_t;

        TraceEntry entry{n_t, solve.f, states, solve.converged, solve.outcome.residual_norm, solve.outcome.iters,
                         next, false};

        if (solve.converged && next == states) {
            result.trace.push_back(std::move(entry));
            result.equilibrium = to_equilibrium(solve);
            result.termination = Termination::fixed_point;
            return result;
        }
        if (solve.converged) {
            warm = solve.outcome.x;
        }

        if (next == states || tested.contains(encode(model, next))) {
            std::optional<std::size_t> f_new;
            if (options.fallback_seed) {
                std::vector<std::size_t> untested;
                for (std::size_t f = 1; f <= result.combinations; ++f) {
                    if (!tested.contains(f)) {
                        untested.push_back(f);
                    }
                }
                if (!untested.empty()) {
                    std::uniform_int_distribution<std::size_t> pick(0, untested.size() - 1);
                    f_new = untested[pick(rng)];
                }
            } else {
                f_new = x_new_fallback(result.combinations, tested);
            }
            if (!f_new) {
                result.trace.push_back(std::move(entry));
                result.termination = Termination::combinations_exhausted;
                return result;
            }
            next = decode(model, *f_new);
            entry.next_states = next;
            entry.fallback = true;
        }
        result.trace.push_back(std::move(entry));
        states = std::move(next);
    }
    result.termination = Termination::n_t_max_exhausted;
    return result;
}

OracleResult exhaustive_oracle(const Model& model, const FaultSpec& fault, const SolveOptions<double>& options,
                               std::size_t cap, unsigned threads)
{
    const std::size_t count = combination_count(model);
    if (count > cap) {
        throw std::invalid_argument("exhaustive oracle: " + std::to_string(count) + " combinations exceed the cap of " +
                                    std::to_string(cap));
    }
    OracleResult result;
    result.solves.resize(count);

    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));

    std::atomic<std::size_t> next_f{1};
    const auto worker = [&] {
        for (std::size_t f = next_f++; f <= count; f = next_f++) {
            result.solves[f - 1] = solve_combination(model, fault, decode(model, f), options);
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }

    const bool fault_active = fault.kind != FaultKind::none;
    for (const CombinationSolve& s : result.solves) {
        if (is_valid_equilibrium(model, fault_active, s)) {
            result.equilibria.push_back(to_equilibrium(s));
        }
    }
    return result;
}

bool same_equilibrium(const EquilibriumPoint& a, const EquilibriumPoint& b, double tol)
{
    if (a.f != b.f || a.x.size() != b.x.size()) {
        return false;
    }
    return (a.x - b.x).lpNorm<Eigen::Infinity>() <= tol;
}

std::string_view to_string(Termination t)
{
    switch (t) {
    case Termination::fixed_point:
        return "fixed_point";
    case Termination::n_t_max_exhausted:
        return "n_t_max_exhausted";
    case Termination::combinations_exhausted:
        return "combinations_exhausted";
    }
    return "fixed_point";
}

} // namespace scc
