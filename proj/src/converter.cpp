#include "scc/converter.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace scc {

namespace {

std::string lowercase(std::string_view text)
{
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Branch checks tolerate solver-level noise around zero.
constexpr double branch_tolerance = 1e-9;

} // namespace

std::vector<SatState> admissible_states(ControlMode mode)
{
    if (mode == ControlMode::gf) {
        return {SatState::uss, SatState::fss};
    }
    return {SatState::uss, SatState::pss, SatState::fss};
}

bool is_admissible(ControlMode mode, SatState state)
{
    return !(mode == ControlMode::gf && state == SatState::pss);
}

double q_reference(const VscSpec& spec, double u_pos_mag, bool fault_active)
{
    if (!fault_active) {
        return spec.q_disp;
    }
    if (!spec.i_d0) {
        throw ConverterError("converter '" + spec.id + "' has no frozen reactive current i_d0");
    }
    return u_pos_mag * (*spec.i_d0 + spec.k_isp * (spec.u_ref_gs - u_pos_mag));
}

ConverterResiduals converter_residuals(const VscSpec& spec, SatState state, const SequenceTriple<double>& u,
                                       const SequenceTriple<double>& i, double omega,
                                       const ConverterContext& ctx)
{
    if (!is_admissible(spec.mode, state)) {
        throw ConverterError("state " + std::string(to_string(state)) + " is not admissible for converter '" +
                             spec.id + "'");
    }
    const PowerElements<double> s = power_elements(u, i);
    const double u_pos = std::abs(u.pos());
    const double i_pos = std::abs(i.pos());

    ConverterResiduals r{};
    switch (spec.mode) {
    case ControlMode::pq:
        switch (state) {
        case SatState::uss:
            r[0] = s.p_con - p_reference(spec);
            r[1] = s.q_con - q_reference(spec, u_pos, ctx.fault_active);
            break;
        case SatState::pss:
            r[0] = s.q_con - q_reference(spec, u_pos, ctx.fault_active);
            r[1] = i_pos - spec.i_max;
            break;
        case SatState::fss:
            r[0] = s.p_con;
            r[1] = i_pos - spec.i_max;
            break;
        }
        break;
    case ControlMode::pv:
        switch (state) {
        case SatState::uss:
            r[0] = s.p_con - p_reference(spec);
            r[1] = u_pos - spec.u_ref_pv;
            break;
        case SatState::pss:
            r[0] = u_pos - spec.u_ref_pv;
            r[1] = i_pos - spec.i_max;
            break;
        case SatState::fss:
            r[0] = s.p_con;
            r[1] = i_pos - spec.i_max;
            break;
        }
        break;
    case ControlMode::gf:
        r[0] = state == SatState::uss ? u_pos - spec.u_ref_gf : i_pos - spec.i_max;
        r[1] = omega - ctx.omega0 + spec.k_omega * (s.p_con - spec.p0);
        break;
    }
    r[2] = i.neg().real();
    r[3] = i.neg().imag();
    r[4] = i.zero().real();
    r[5] = i.zero().imag();
    return r;
}

bool on_supported_branch(const VscSpec& spec, SatState state, const PowerElements<double>& power)
{
    switch (state) {
    case SatState::uss:
        return true;
    case SatState::pss:
        return power.p_con * p_reference(spec) >= -branch_tolerance;
    case SatState::fss:
        return power.q_con >= -branch_tolerance;
    }
    return true;
}

std::string_view to_string(ControlMode mode)
{
    switch (mode) {
    case ControlMode::pq:
        return "PQ";
    case ControlMode::pv:
        return "PV";
    case ControlMode::gf:
        return "GF";
    }
    return "PQ";
}

std::string_view to_string(SatState state)
{
    switch (state) {
    case SatState::uss:
        return "USS";
    case SatState::pss:
        return "PSS";
    case SatState::fss:
        return "FSS";
    }
    return "USS";
}

std::optional<ControlMode> parse_control_mode(std::string_view text)
{
    const std::string s = lowercase(text);
    if (s == "pq") {
        return ControlMode::pq;
    }
    if (s == "pv") {
        return ControlMode::pv;
    }
    if (s == "gf") {
        return ControlMode::gf;
    }
    return std::nullopt;
}

std::optional<SatState> parse_sat_state(std::string_view text)
{
    const std::string s = lowercase(text);
    if (s == "uss") {
        return SatState::uss;
    }
    if (s == "pss") {
        return SatState::pss;
    }
    if (s == "fss") {
        return SatState::fss;
    }
    return std::nullopt;
}

} // namespace scc
