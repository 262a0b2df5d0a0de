#include "support/reference.hpp"

#include <doctest.h>

using namespace scc;
using scc::testing::cd;

namespace {

double max_abs(const ElementResiduals& r)
{
    double m = 0.0;
    for (double v : r) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

NonPeSpec thevenin()
{
    NonPeSpec s;
    s.id = "grid";
    s.bus = "1";
    s.kind = SourceKind::thevenin;
    s.u_source = 1.0;
    s.z_th = cd(0.01, 0.1);
    return s;
}

} // namespace

TEST_CASE("Thevenin source feeds every sequence through its impedance")
{
    const NonPeSpec s = thevenin();
    const SequenceTriple<double> u(polar_deg(0.896, 4.3), polar_deg(0.18, -179.2), polar_deg(0.18, -179.2));
    const SequenceTriple<double> i((1.0 - u.pos()) / s.z_th, -u.neg() / s.z_th, -u.zero() / s.z_th);
    CHECK(max_abs(element_residuals(s, u, i)) < 1e-12);

    // A negative-sequence voltage does not drive positive-sequence current.
    SequenceTriple<double> wrong = i;
    wrong.neg() = -u.pos() / s.z_th;
    CHECK(max_abs(element_residuals(s, u, wrong)) > 1.0);
}

TEST_CASE("slack bus pins a balanced voltage")
{
    NonPeSpec s;
    s.kind = SourceKind::slack;
    s.u_source = polar_deg(1.02, 0.0);
    CHECK(max_abs(element_residuals(s, SequenceTriple<double>(s.u_source, 0.0, 0.0), {})) < 1e-15);
    CHECK(max_abs(element_residuals(s, SequenceTriple<double>(s.u_source, 0.1, 0.0), {})) == doctest::Approx(0.1));
}

TEST_CASE("PQ node draws the same power on each phase")
{
    NonPeSpec s;
    s.kind = SourceKind::pq_node;
    s.p_ref = -0.3;
    s.q_ref = -0.1;
    const SequenceTriple<double> u(polar_deg(0.95, -3.0), polar_deg(0.1, 40.0), polar_deg(0.05, 10.0));
    const PhaseTriple<double> u_ph = to_phase(u);
    PhaseTriple<double> i_ph;
    for (int k = 0; k < 3; ++k) {
        i_ph.values(k) = std::conj(cd(s.p_ref, s.q_ref) / u_ph.values(k));
    }
    CHECK(max_abs(element_residuals(s, u, to_sequence(i_ph))) < 1e-12);
}

TEST_CASE("PV node fixes active power and a symmetric voltage")
{
    NonPeSpec s;
    s.kind = SourceKind::pv_node;
    s.p_ref = 0.4;
    s.u_ref = 1.01;
    const cd u = polar_deg(1.01, 7.0);
    const cd i = std::conj(cd(0.4, 0.25) / u);
    CHECK(max_abs(element_residuals(s, SequenceTriple<double>(u, 0.0, 0.0), SequenceTriple<double>(i, 0.0, 0.0))) <
          1e-12);
}

TEST_CASE("grid frequency rises with exported power")
{
    NonPeSpec s = thevenin();
    s.droop = FrequencyDroop{0.05, 0.0};
    const cd u = 1.0;
    const cd i = 0.2;  // p = 0.2 delivered into the network
    CHECK(frequency_residual(s, SequenceTriple<double>(u, 0.0, 0.0), SequenceTriple<double>(i, 0.0, 0.0),
                             1.0 + 0.05 * 0.2, 1.0) == doctest::Approx(0.0));
    s.droop.reset();
    CHECK(frequency_residual(s, {}, {}, 1.003, 1.0) == doctest::Approx(0.003));
}

TEST_CASE("source kind names")
{
    CHECK(parse_source_kind("thevenin") == SourceKind::thevenin);
    CHECK(parse_source_kind("pq_node") == SourceKind::pq_node);
    CHECK_FALSE(parse_source_kind("battery"));
    CHECK(is_angle_source(SourceKind::slack));
    CHECK_FALSE(is_angle_source(SourceKind::pq_node));
}
