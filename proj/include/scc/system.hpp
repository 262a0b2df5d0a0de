#pragma once

// The full real-valued system of equations for one combination of converter
// saturation states: nodal balance I = Y U plus every element's constraints.

#include "scc/converter.hpp"
#include "scc/elements.hpp"
#include "scc/lm.hpp"
#include "scc/network.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace scc {

struct Model {
    std::string name;
    double omega0 = 1.0;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<VscSpec> converters;
    std::vector<NonPeSpec> sources;
};

class ModelError : public std::invalid_argument {
public:
    explicit ModelError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

/// Every referential-integrity and parameter problem found, in a stable order.
std::vector<std::string> model_problems(const Model& model);

/// Throws ModelError listing all problems.
void validate_model(const Model& model);

/// The system frequency is an unknown whenever a grid-forming converter or a
/// drooping Thevenin source is present.
bool has_frequency_unknown(const Model& model);

/// One saturation state per converter, in declaration order.
using StateVector = std::vector<SatState>;

/// F = product of admissible state counts.
std::size_t combination_count(const Model& model);

/// Mixed-radix bijection between f in [1, F] and state vectors; the first
/// declared converter is the most significant digit, so f = 1 is all-USS.
std::size_t encode(const Model& model, const StateVector& states);
StateVector decode(const Model& model, std::size_t f);

StateVector all_unsaturated(const Model& model);

/// Real unknown slots: bus voltages ordered by sequence then bus (as in the
/// stacked U vector), element currents ordered by element then sequence
/// (converters before non-PE sources), then w when present. Each complex
/// value occupies (re, im).
class UnknownLayout {
public:
    explicit UnknownLayout(const Model& model);

    std::size_t bus_count() const { return buses_; }
    std::size_t element_count() const { return converters_ + sources_; }
    bool has_omega() const { return has_omega_; }
    std::size_t size() const { return 6 * buses_ + 6 * (converters_ + sources_) + (has_omega_ ? 1 : 0); }

    std::size_t voltage(std::size_t bus, Sequence s) const
    {
        return 2 * (static_cast<std::size_t>(s) * buses_ + bus);
    }
    std::size_t converter_current(std::size_t k, Sequence s) const
    {
        return 6 * buses_ + 2 * (3 * k + static_cast<std::size_t>(s));
    }
    std::size_t source_current(std::size_t k, Sequence s) const
    {
        return converter_current(converters_ + k, s);
    }
    std::optional<std::size_t> omega() const
    {
        return has_omega_ ? std::optional<std::size_t>(size() - 1) : std::nullopt;
    }

    SequenceTriple<double> bus_voltage(const VectorX<double>& x, std::size_t bus) const;
    SequenceTriple<double> converter_injection(const VectorX<double>& x, std::size_t k) const;
    SequenceTriple<double> source_injection(const VectorX<double>& x, std::size_t k) const;
    double omega_value(const VectorX<double>& x, double omega0) const;

    /// Stacked complex U in the admittance-matrix ordering.
    Eigen::VectorXcd stacked_voltages(const VectorX<double>& x) const;

private:
    SequenceTriple<double> triple(const VectorX<double>& x, std::size_t first) const;

    std::size_t buses_;
    std::size_t converters_;
    std::size_t sources_;
    bool has_omega_;
};

/// SE_f for one fault scenario and one state vector. The object is
/// immutable after construction and its call operator is thread-safe.
class SystemOfEquations {
public:
    SystemOfEquations(const Model& model, const FaultSpec& fault, StateVector states);

    const Model& model() const { return *model_; }
    const FaultSpec& fault() const { return fault_; }
    const StateVector& states() const { return states_; }
    const UnknownLayout& layout() const { return layout_; }
    const SequenceAdmittance<double>& admittance() const { return y_; }
    std::size_t size() const { return layout_.size(); }
    std::size_t residual_count() const { return 6 * layout_.bus_count() + 6 * layout_.element_count() + extra_rows(); }
    bool fault_active() const { return fault_.kind != FaultKind::none; }

    /// Index into model().sources of the element writing the w row, if any.
    std::optional<std::size_t> frequency_anchor() const { return frequency_anchor_; }
    /// Converter whose positive-sequence angle is pinned to zero, if any.
    std::optional<std::size_t> angle_reference() const { return angle_reference_; }

    bool operator()(const VectorX<double>& x, VectorX<double>& r) const;

    /// Rows 0 .. 6D-1 only: element injections minus Y U.
    VectorX<double> nodal_mismatch(const VectorX<double>& x) const;

private:
    std::size_t extra_rows() const { return (frequency_anchor_ || angle_reference_) ? 1 : 0; }

    const Model* model_;
    FaultSpec fault_;
    StateVector states_;
    UnknownLayout layout_;
    SequenceAdmittance<double> y_;
    std::vector<std::size_t> converter_bus_;
    std::vector<std::size_t> source_bus_;
    std::optional<std::size_t> frequency_anchor_;
    std::optional<std::size_t> angle_reference_;
};

/// Flat start: u+ = 1 at every bus, everything else zero, w = w0. Converter
/// positive-sequence currents are seeded along their dispatch, with a
/// lagging (reactive-injecting) component so saturated states settle on the
/// voltage-supporting branch.
VectorX<double> flat_start(const Model& model);

/// State-aware starting point: each converter current is placed at the
/// magnitude and direction its saturation state implies, and bus voltages
/// come from a linear network solve with those injections (Thevenin and
/// slack sources as Norton equivalents). Falls back to the flat start when
/// the linearised network is singular.
VectorX<double> initial_guess(const SystemOfEquations& system);

} // namespace scc
