#pragma once

// Non power-electronics elements. Each has a single operating state and
// contributes six real constraint rows; a Thevenin source that anchors the
// system frequency contributes one more.

#include "scc/phasor.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace scc {

enum class SourceKind { thevenin, slack, pq_node, pv_node };

/// Main-grid frequency characteristic w = w0 + k (p - p0).
struct FrequencyDroop {
    double k_omega_th = 0.0;
    double p0_th = 0.0;
};

struct NonPeSpec {
    std::string id;
    std::string bus;
    SourceKind kind = SourceKind::thevenin;

    /// Thevenin internal voltage or slack voltage (positive sequence only).
    Complex<double> u_source{1.0, 0.0};
    Complex<double> z_th{0.0, 0.0};
    std::optional<FrequencyDroop> droop;

    /// PQ node: power per phase. PV node: total active power.
    double p_ref = 0.0;
    double q_ref = 0.0;
    /// PV node voltage magnitude.
    double u_ref = 1.0;
};

inline constexpr std::size_t element_residual_count = 6;
using ElementResiduals = std::array<double, element_residual_count>;

/// Thevenin and slack elements fix the voltage angle datum.
inline bool is_angle_source(SourceKind kind)
{
    return kind == SourceKind::thevenin || kind == SourceKind::slack;
}

/// Six residual rows over the bus voltage and the element's injected
/// current. A pq_node at a bus whose phase voltage is exactly zero yields
/// non-finite rows.
ElementResiduals element_residuals(const NonPeSpec& spec, const SequenceTriple<double>& u,
                                   const SequenceTriple<double>& i);

/// Frequency row emitted by the element that anchors w: the droop line for a
/// Thevenin source with a characteristic, w - w0 otherwise.
double frequency_residual(const NonPeSpec& spec, const SequenceTriple<double>& u,
                          const SequenceTriple<double>& i, double omega, double omega0);

std::string_view to_string(SourceKind kind);
std::optional<SourceKind> parse_source_kind(std::string_view text);

} // namespace scc
