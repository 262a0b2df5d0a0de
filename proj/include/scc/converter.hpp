#pragma once

// Steady-state equivalent of a voltage-source converter: one set of six real
// constraint equations per (control mode, current-saturation state) pair.

#include "scc/phasor.hpp"

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scc {

enum class ControlMode { pq, pv, gf };

/// Unsaturated, partially saturated, fully saturated.
enum class SatState { uss, pss, fss };

struct VscSpec {
    std::string id;
    std::string bus;
    ControlMode mode = ControlMode::pq;
    double i_max = 1.0;

    // PQ: p_disp, q_disp. PV: p_disp, u_ref_pv.
    double p_disp = 0.0;
    double q_disp = 0.0;
    double u_ref_pv = 1.0;

    // GF: voltage magnitude reference and p-w droop.
    double u_ref_gf = 1.0;
    double k_omega = 0.0;
    double p0 = 0.0;

    // PQ grid support during faults.
    double k_isp = 0.0;
    double u_ref_gs = 1.0;
    std::optional<double> i_d0;
};

class ConverterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Ordered states: USS, PSS, FSS for grid-following; USS, FSS for grid-forming.
std::vector<SatState> admissible_states(ControlMode mode);
inline std::vector<SatState> admissible_states(const VscSpec& spec) { return admissible_states(spec.mode); }
bool is_admissible(ControlMode mode, SatState state);

/// Constant active power reference; unchanged by the fault.
inline double p_reference(const VscSpec& spec) { return spec.p_disp; }

/// Reactive power reference of a PQ converter. During a fault the frozen
/// reactive current i_d0 is topped up with voltage-droop support current.
double q_reference(const VscSpec& spec, double u_pos_mag, bool fault_active);

struct ConverterContext {
    bool fault_active = false;
    double omega0 = 1.0;
};

inline constexpr std::size_t converter_residual_count = 6;
using ConverterResiduals = std::array<double, converter_residual_count>;

/// Residuals over the CCP voltage u, the injected current i and the system
/// frequency. Layout: two state-specific rows, then Re/Im of i- and i0.
ConverterResiduals converter_residuals(const VscSpec& spec, SatState state, const SequenceTriple<double>& u,
                                       const SequenceTriple<double>& i, double omega,
                                       const ConverterContext& ctx);

/// Reactive-priority branch selection: saturated solutions inject
/// non-negative reactive power in FSS and keep the active power on the side
/// of its reference in PSS.
bool on_supported_branch(const VscSpec& spec, SatState state, const PowerElements<double>& power);

std::string_view to_string(ControlMode mode);
std::string_view to_string(SatState state);
std::optional<ControlMode> parse_control_mode(std::string_view text);
std::optional<SatState> parse_sat_state(std::string_view text);

} // namespace scc
