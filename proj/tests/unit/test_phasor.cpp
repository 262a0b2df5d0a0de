#include "support/reference.hpp"

#include <doctest.h>

#include <random>

using namespace scc;
using scc::testing::cd;

namespace {

SequenceTriple<double> random_triple(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> d(-1.5, 1.5);
    return {cd(d(rng), d(rng)), cd(d(rng), d(rng)), cd(d(rng), d(rng))};
}

// Instantaneous p and q of the space vectors exp(-jwt) x+ + exp(jwt) x-.
std::pair<double, double> instantaneous(const SequenceTriple<double>& u, const SequenceTriple<double>& i, double wt)
{
    const cd rot = std::polar(1.0, -wt);
    const cd v = rot * u.pos() + std::conj(rot) * u.neg();
    const cd c = rot * i.pos() + std::conj(rot) * i.neg();
    const cd s = v * std::conj(c);
    return {s.real(), s.imag()};
}

// Three-phase instantaneous active power from phase waveforms obtained by
// inverse Clarke of the same space vectors.
double three_phase_power(const SequenceTriple<double>& u, const SequenceTriple<double>& i, double wt)
{
    const cd rot = std::polar(1.0, -wt);
    const cd v = rot * u.pos() + std::conj(rot) * u.neg();
    const cd c = rot * i.pos() + std::conj(rot) * i.neg();
    const double shift = 2.0 * std::numbers::pi / 3.0;
    double p = 0.0;
    for (int k = 0; k < 3; ++k) {
        const cd e = std::polar(1.0, -k * shift);
        const double vk = (v * std::conj(e)).real();
        const double ik = (c * std::conj(e)).real();
        p += vk * ik;
    }
    return 2.0 * p / 3.0;
}

} // namespace

TEST_CASE("rotation operator lags by 120 degrees")
{
    const cd a = rotation_operator<double>();
    CHECK(std::abs(a - std::polar(1.0, -2.0 * std::numbers::pi / 3.0)) < 1e-15);
    CHECK(std::abs(a * a * a - 1.0) < 1e-14);
}

TEST_CASE("transformation matrices are inverse to each other")
{
    const Matrix3c<double> prod = phase_to_sequence_matrix<double>() * sequence_to_phase_matrix<double>();
    CHECK((prod - Matrix3c<double>::Identity()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("sequence round trip on random triples matches the reference transform")
{
    std::mt19937_64 rng(7);
    double worst = 0.0, worst_ref = 0.0;
    for (int n = 0; n < 1000; ++n) {
        const SequenceTriple<double> s = random_triple(rng);
        const PhaseTriple<double> p = to_phase(s);
        worst = std::max(worst, (to_sequence(p).values - s.values).cwiseAbs().maxCoeff());
        const auto ref = scc::testing::ref_to_phase({s.pos(), s.neg(), s.zero()});
        for (int k = 0; k < 3; ++k) {
            worst_ref = std::max(worst_ref, std::abs(ref[k] - p.values(k)));
        }
    }
    CHECK(worst < 1e-12);
    CHECK(worst_ref < 1e-12);
}

TEST_CASE("a balanced abc set maps to positive sequence only")
{
    // With the lagging rotation operator the positive set is (a, a2 x, a x),
    // so phase b leads phase a by 120 degrees.
    const double mag = 0.8;
    const PhaseTriple<double> p(polar_deg(mag, 10.0), polar_deg(mag, 130.0), polar_deg(mag, -110.0));
    const SequenceTriple<double> s = to_sequence(p);
    CHECK(std::abs(s.pos() - polar_deg(mag, 10.0)) < 1e-14);
    CHECK(std::abs(s.neg()) < 1e-14);
    CHECK(std::abs(s.zero()) < 1e-14);
}

TEST_CASE("angle_deg stays in (-180, 180]")
{
    CHECK(angle_deg(cd(-1.0, 0.0)) == doctest::Approx(180.0));
    CHECK(angle_deg(cd(-1.0, -0.0)) == doctest::Approx(180.0));
    CHECK(angle_deg(cd(0.0, -1.0)) == doctest::Approx(-90.0));
    CHECK(magnitude(polar_deg(0.55, 2.57)) == doctest::Approx(0.55));
}

TEST_CASE("power elements agree with the instantaneous waveform")
{
    std::mt19937_64 rng(11);
    double worst = 0.0;
    for (int n = 0; n < 200; ++n) {
        const auto u = random_triple(rng);
        const auto i = random_triple(rng);
        const PowerElements<double> s = power_elements(u, i);
        for (double wt : {0.0, 0.3, 1.1, 2.0, 4.4}) {
            const auto [p, q] = instantaneous(u, i, wt);
            const double p_model = s.p_con + s.p_cos * std::cos(2 * wt) + s.p_sin * std::sin(2 * wt);
            const double q_model = s.q_con + s.q_cos * std::cos(2 * wt) + s.q_sin * std::sin(2 * wt);
            worst = std::max({worst, std::abs(p - p_model), std::abs(q - q_model)});
            worst = std::max(worst, std::abs(three_phase_power(u, i, wt) - p_model));
        }
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("constant elements split by sequence")
{
    const SequenceTriple<double> u(polar_deg(0.9, 4.0), polar_deg(0.2, -170.0), cd(0.1, 0.0));
    const SequenceTriple<double> i(polar_deg(1.0, -40.0), polar_deg(0.3, 20.0), cd(0.5, 0.5));
    const auto s = power_elements(u, i);
    const cd s_pos = u.pos() * std::conj(i.pos());
    const cd s_neg = u.neg() * std::conj(i.neg());
    CHECK(s.p_con_pos == doctest::Approx(s_pos.real()));
    CHECK(s.q_con_pos == doctest::Approx(s_pos.imag()));
    CHECK(s.p_con_neg == doctest::Approx(s_neg.real()));
    CHECK(s.p_con == doctest::Approx(s_pos.real() + s_neg.real()));
    CHECK(s.q_con == doctest::Approx(s_pos.imag() + s_neg.imag()));
}

TEST_CASE("zero sequence does not enter the exchanged power")
{
    SequenceTriple<double> u(polar_deg(0.9, 4.0), polar_deg(0.2, -170.0), cd(0.0, 0.0));
    const SequenceTriple<double> i(polar_deg(1.0, -40.0), polar_deg(0.3, 20.0), cd(0.0, 0.0));
    const auto a = power_elements(u, i);
    u.zero() = cd(0.4, -0.3);
    SequenceTriple<double> i2 = i;
    i2.zero() = cd(0.7, 0.2);
    const auto b = power_elements(u, i2);
    CHECK(a.p_con == b.p_con);
    CHECK(a.q_sin == b.q_sin);
}

TEST_CASE("balanced operation has no oscillating power")
{
    const SequenceTriple<double> u(polar_deg(1.0, 0.0), 0.0, 0.0);
    const SequenceTriple<double> i(polar_deg(0.7, -30.0), 0.0, 0.0);
    const auto s = power_elements(u, i);
    CHECK(s.p_cos == 0.0);
    CHECK(s.p_sin == 0.0);
    CHECK(s.q_cos == 0.0);
    CHECK(s.q_sin == 0.0);
    CHECK(s.q_con == doctest::Approx(0.35));
}
