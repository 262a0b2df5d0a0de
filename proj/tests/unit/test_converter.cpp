#include "support/reference.hpp"

#include <doctest.h>

using namespace scc;
using scc::testing::cd;

namespace {

VscSpec ts1_pq()
{
    VscSpec v;
    v.id = "VSC1";
    v.bus = "1";
    v.mode = ControlMode::pq;
    v.i_max = 1.0;
    v.p_disp = 0.7;
    v.q_disp = 0.5;
    v.k_isp = 2.0;
    v.u_ref_gs = 1.0;
    v.i_d0 = 0.5;
    return v;
}

double max_abs(const ConverterResiduals& r)
{
    double m = 0.0;
    for (double v : r) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

// Current giving complex power s at voltage u: s = u conj(i).
cd current_for(cd u, cd s)
{
    return std::conj(s / u);
}

} // namespace

TEST_CASE("admissible states per control mode")
{
    CHECK(admissible_states(ControlMode::pq).size() == 3);
    CHECK(admissible_states(ControlMode::pv).size() == 3);
    CHECK(admissible_states(ControlMode::gf) == std::vector<SatState>{SatState::uss, SatState::fss});
    CHECK_FALSE(is_admissible(ControlMode::gf, SatState::pss));
    CHECK(is_admissible(ControlMode::pv, SatState::pss));
}

TEST_CASE("fault-mode reactive reference adds droop support to the frozen current")
{
    const VscSpec v = ts1_pq();
    CHECK(q_reference(v, 0.9, false) == doctest::Approx(0.5));
    // 0.896 (0.5 + 2 (1 - 0.896))
    CHECK(q_reference(v, 0.896, true) == doctest::Approx(0.634).epsilon(1e-3));
    VscSpec missing = v;
    missing.i_d0.reset();
    CHECK_THROWS_AS(q_reference(missing, 0.9, true), ConverterError);
    CHECK_NOTHROW(q_reference(missing, 0.9, false));
}

TEST_CASE("PQ residuals vanish at consistent operating points")
{
    const VscSpec v = ts1_pq();
    const ConverterContext fault{true, 1.0};
    const ConverterContext normal{false, 1.0};

    const cd u = polar_deg(0.55, 2.57);
    SequenceTriple<double> uu(u, 0.0, 0.0);
    // FSS: p = 0 and |i+| = i_max with reactive injection.
    const SequenceTriple<double> i_fss(current_for(u, cd(0.0, std::abs(u))), 0.0, 0.0);
    CHECK(max_abs(converter_residuals(v, SatState::fss, uu, i_fss, 1.0, fault)) < 1e-12);

    const cd u1 = polar_deg(1.0, 0.0);
    const SequenceTriple<double> i_uss(current_for(u1, cd(0.7, 0.5)), 0.0, 0.0);
    CHECK(max_abs(converter_residuals(v, SatState::uss, SequenceTriple<double>(u1, 0.0, 0.0), i_uss, 1.0, normal)) <
          1e-12);

    // PSS: q on its reference, current at the limit.
    const cd u2 = polar_deg(0.9, 3.0);
    const double q = q_reference(v, 0.9, true);
    const double p = std::sqrt(0.81 - q * q);
    const SequenceTriple<double> i_pss(current_for(u2, cd(p, q)), 0.0, 0.0);
    CHECK(max_abs(converter_residuals(v, SatState::pss, SequenceTriple<double>(u2, 0.0, 0.0), i_pss, 1.0, fault)) <
          1e-12);

    SequenceTriple<double> with_neg = i_fss;
    with_neg.neg() = cd(0.01, 0.0);
    const auto r = converter_residuals(v, SatState::fss, uu, with_neg, 1.0, fault);
    CHECK(r[2] == doctest::Approx(0.01));
}

TEST_CASE("PV and GF residual rows")
{
    VscSpec pv;
    pv.mode = ControlMode::pv;
    pv.i_max = 1.0;
    pv.p_disp = 0.6;
    pv.u_ref_pv = 0.98;
    const cd u = polar_deg(0.98, -2.0);
    const SequenceTriple<double> uu(u, 0.0, 0.0);
    const SequenceTriple<double> i(current_for(u, cd(0.6, -0.2)), 0.0, 0.0);
    const ConverterContext ctx{true, 1.0};
    CHECK(max_abs(converter_residuals(pv, SatState::uss, uu, i, 1.0, ctx)) < 1e-12);

    VscSpec gf;
    gf.mode = ControlMode::gf;
    gf.i_max = 2.5;
    gf.u_ref_gf = 1.0;
    gf.k_omega = 0.01;
    gf.p0 = 1.0;
    const cd ug = polar_deg(1.0, 0.0);
    const SequenceTriple<double> ig(current_for(ug, cd(1.5, 0.4)), 0.0, 0.0);
    // w = w0 - k (p - p0)
    const double w = 1.0 - 0.01 * 0.5;
    CHECK(max_abs(converter_residuals(gf, SatState::uss, SequenceTriple<double>(ug, 0.0, 0.0), ig, w, ctx)) <
          1e-12);
    CHECK_THROWS_AS(converter_residuals(gf, SatState::pss, SequenceTriple<double>(ug, 0.0, 0.0), ig, w, ctx),
                    ConverterError);
}

TEST_CASE("saturated solutions must sit on the supported branch")
{
    const VscSpec v = ts1_pq();
    PowerElements<double> s;
    s.q_con = 0.55;
    CHECK(on_supported_branch(v, SatState::fss, s));
    s.q_con = -0.55;
    CHECK_FALSE(on_supported_branch(v, SatState::fss, s));
    s.p_con = -0.6;
    CHECK_FALSE(on_supported_branch(v, SatState::pss, s));
    s.p_con = 0.6;
    CHECK(on_supported_branch(v, SatState::pss, s));
    CHECK(on_supported_branch(v, SatState::uss, PowerElements<double>{}));
}

TEST_CASE("mode and state names")
{
    CHECK(parse_control_mode("gf") == ControlMode::gf);
    CHECK(parse_control_mode("PV") == ControlMode::pv);
    CHECK_FALSE(parse_control_mode("VF"));
    CHECK(parse_sat_state("fss") == SatState::fss);
    CHECK_FALSE(parse_sat_state("XSS"));
    CHECK(to_string(SatState::pss) == "PSS");
}
