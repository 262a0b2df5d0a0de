#pragma once

// Outer loop over converter current-saturation states: the state-update
// rules, the iterative equilibrium search with loop avoidance, and the
// exhaustive enumeration used as an oracle.

#include "scc/system.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

namespace scc {

struct ConverterReport {
    double u_pos = 0.0;
    double i_pos = 0.0;
    PowerElements<double> power;
};

/// Quantities derived from a solved unknown vector.
struct SolvedPoint {
    std::vector<SequenceTriple<double>> bus_voltages;
    std::vector<SequenceTriple<double>> converter_currents;
    std::vector<SequenceTriple<double>> source_currents;
    std::vector<ConverterReport> converters;
    std::vector<PowerElements<double>> source_power;
    double omega = 1.0;
};

SolvedPoint extract_point(const SystemOfEquations& system, const VectorX<double>& x);

/// Outcome of solving SE_f for one combination.
struct CombinationSolve {
    std::size_t f = 0;
    StateVector states;
    SolveOutcome<double> outcome;
    /// Converged, and every saturated converter sits on its supported branch.
    bool converged = false;
    /// A converged solution was discarded by the branch check.
    bool off_branch = false;
    SolvedPoint point;
};

/// Solves SE_f from the warm start when given, else (or when that fails or
/// lands off-branch) from the state-aware guess, then from the flat start.
/// Without a warm start the result depends on the combination alone.
CombinationSolve solve_combination(const Model& model, const FaultSpec& fault, const StateVector& states,
                                   const SolveOptions<double>& options, const VectorX<double>* warm_start = nullptr);

/// PQ current requirement at a given positive-sequence voltage.
struct RequiredCurrent {
    double reactive = 0.0;
    double total = 0.0;
};
RequiredCurrent pq_required_current(const VscSpec& spec, double u_pos, bool fault_active);

/// DS: next state vector from a solve of the current one. Converters are
/// updated independently; on a failed solve only PV converters in PSS move.
StateVector ds_update(const Model& model, bool fault_active, const CombinationSolve& solve, const StateVector& states);

/// Converged, a fixed point of DS, and within every converter's current limit.
bool is_valid_equilibrium(const Model& model, bool fault_active, const CombinationSolve& solve);

/// Lowest untested combination index, or nullopt when all were tested.
std::optional<std::size_t> x_new_fallback(std::size_t combinations, const std::set<std::size_t>& tested);

struct TraceEntry {
    int n_t = 0;
    std::size_t f = 0;
    StateVector states;
    bool converged = false;
    double residual_norm = 0.0;
    int solver_iters = 0;
    StateVector next_states;
    /// next_states was substituted by the loop-avoidance fallback.
    bool fallback = false;
};

enum class Termination { fixed_point, n_t_max_exhausted, combinations_exhausted };

struct EquilibriumPoint {
    std::size_t f = 0;
    StateVector states;
    VectorX<double> x;
    double residual_norm = 0.0;
    SolvedPoint point;
};

struct AlgorithmOptions {
    /// Defaults to F, which allows every combination to be visited.
    std::optional<int> n_t_max;
    std::optional<StateVector> x0;
    /// When set, the fallback draws uniformly from untested combinations.
    std::optional<std::uint64_t> fallback_seed;
    /// Start each solve from the previous converged solution. A combination
    /// can have several roots, so this makes the reported root depend on the
    /// path taken; off by default.
    bool warm_start = false;
    SolveOptions<double> solver;
};

struct AlgorithmResult {
    std::optional<EquilibriumPoint> equilibrium;
    std::vector<TraceEntry> trace;
    Termination termination = Termination::n_t_max_exhausted;
    int n_t = 0;
    int n_t_max = 0;
    std::size_t combinations = 0;
};

AlgorithmResult run_algorithm(const Model& model, const FaultSpec& fault, const AlgorithmOptions& options = {});

struct OracleResult {
    std::vector<CombinationSolve> solves;  // index f - 1
    std::vector<EquilibriumPoint> equilibria;
};

inline constexpr std::size_t default_oracle_cap = 4096;

/// Solves every combination on a worker pool and keeps the valid ones;
/// results are ordered by f regardless of scheduling.
OracleResult exhaustive_oracle(const Model& model, const FaultSpec& fault, const SolveOptions<double>& options = {},
                               std::size_t cap = default_oracle_cap, unsigned threads = 0);

/// Same combination and every bus voltage and element current within tol.
bool same_equilibrium(const EquilibriumPoint& a, const EquilibriumPoint& b, double tol = 1e-6);

std::string_view to_string(Termination t);

} // namespace scc
