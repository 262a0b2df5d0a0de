#include "scc/elements.hpp"

#include <cmath>

namespace scc {

namespace {

void put(ElementResiduals& r, std::size_t at, Complex<double> z)
{
    r[at] = z.real();
    r[at + 1] = z.imag();
}

} // namespace

ElementResiduals element_residuals(const NonPeSpec& spec, const SequenceTriple<double>& u,
                                   const SequenceTriple<double>& i)
{
    ElementResiduals r{};
    switch (spec.kind) {
    case SourceKind::thevenin:
        put(r, 0, i.pos() - (spec.u_source - u.pos()) / spec.z_th);
        put(r, 2, i.neg() + u.neg() / spec.z_th);
        put(r, 4, i.zero() + u.zero() / spec.z_th);
        break;
    case SourceKind::slack:
        put(r, 0, u.pos() - spec.u_source);
        put(r, 2, u.neg());
        put(r, 4, u.zero());
        break;
    case SourceKind::pq_node: {
        const PhaseTriple<double> u_ph = to_phase(u);
        const PhaseTriple<double> i_ph = to_phase(i);
        const Complex<double> s{spec.p_ref, spec.q_ref};
        for (int k = 0; k < 3; ++k) {
            put(r, static_cast<std::size_t>(2 * k), i_ph.values(k) - std::conj(s / u_ph.values(k)));
        }
        break;
    }
    case SourceKind::pv_node:
        r[0] = power_elements(u, i).p_con - spec.p_ref;
        r[1] = std::abs(u.pos()) - spec.u_ref;
        put(r, 2, u.neg());
        put(r, 4, u.zero());
        break;
    }
    return r;
}

double frequency_residual(const NonPeSpec& spec, const SequenceTriple<double>& u,
                          const SequenceTriple<double>& i, double omega, double omega0)
{
    if (spec.kind == SourceKind::thevenin && spec.droop) {
        const double p_con_th = power_elements(u, i).p_con;
        return omega - omega0 - spec.droop->k_omega_th * (p_con_th - spec.droop->p0_th);
    }
    return omega - omega0;
}

std::string_view to_string(SourceKind kind)
{
    switch (kind) {
    case SourceKind::thevenin:
        return "thevenin";
    case SourceKind::slack:
        return "slack";
    case SourceKind::pq_node:
        return "pq_node";
    case SourceKind::pv_node:
        return "pv_node";
    }
    return "thevenin";
}

std::optional<SourceKind> parse_source_kind(std::string_view text)
{
    if (text == "thevenin") {
        return SourceKind::thevenin;
    }
    if (text == "slack") {
        return SourceKind::slack;
    }
    if (text == "pq_node") {
        return SourceKind::pq_node;
    }
    if (text == "pv_node") {
        return SourceKind::pv_node;
    }
    return std::nullopt;
}

} // namespace scc
