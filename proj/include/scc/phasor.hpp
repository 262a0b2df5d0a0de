#pragma once

// Phasor arithmetic, the symmetrical-component transform and the
// decomposition of converter power into constant and 2w-oscillating parts.
//
// Sequence ordering everywhere is (+, -, 0). The rotation operator follows
// alpha = exp(-j 2pi/3), so the balanced set that maps onto the positive
// sequence is (1, alpha^2, alpha): phase b leads phase a by 120 degrees.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>

namespace scc {

template <typename Scalar>
using Complex = std::complex<Scalar>;

template <typename Scalar>
using Vector3c = Eigen::Matrix<Complex<Scalar>, 3, 1>;

template <typename Scalar>
using Matrix3c = Eigen::Matrix<Complex<Scalar>, 3, 3>;

/// Rotation operator alpha = exp(-j 2pi/3) = -1/2 - j sqrt(3)/2.
template <typename Scalar>
Complex<Scalar> rotation_operator()
{
    return {Scalar(-0.5), -std::sqrt(Scalar(3)) / Scalar(2)};
}

/// Phase -> sequence matrix: (1/3) [[1, a, a^2], [1, a^2, a], [1, 1, 1]].
template <typename Scalar>
Matrix3c<Scalar> phase_to_sequence_matrix()
{
    const Complex<Scalar> a = rotation_operator<Scalar>();
    const Complex<Scalar> a2 = a * a;
    const Complex<Scalar> one{1};
    Matrix3c<Scalar> m;
    m << one, a, a2,
         one, a2, a,
         one, one, one;
    return m / Scalar(3);
}

/// Sequence -> phase matrix: [[1, 1, 1], [a^2, a, 1], [a, a^2, 1]].
template <typename Scalar>
Matrix3c<Scalar> sequence_to_phase_matrix()
{
    const Complex<Scalar> a = rotation_operator<Scalar>();
    const Complex<Scalar> a2 = a * a;
    const Complex<Scalar> one{1};
    Matrix3c<Scalar> m;
    m << one, one, one,
         a2, a, one,
         a, a2, one;
    return m;
}

template <typename Scalar>
Scalar magnitude(const Complex<Scalar>& z)
{
    return std::abs(z);
}

/// Angle in degrees, in (-180, 180].
template <typename Scalar>
Scalar angle_deg(const Complex<Scalar>& z)
{
    Scalar deg = std::arg(z) * Scalar(180) / std::numbers::pi_v<Scalar>;
    if (deg <= Scalar(-180)) {
        deg += Scalar(360);
    }
    return deg;
}

template <typename Scalar>
Complex<Scalar> polar_deg(Scalar mag, Scalar deg)
{
    return std::polar(mag, deg * std::numbers::pi_v<Scalar> / Scalar(180));
}

/// One phasor per symmetrical sequence.
template <typename Scalar>
struct SequenceTriple {
    Vector3c<Scalar> values = Vector3c<Scalar>::Zero();

    SequenceTriple() = default;
    explicit SequenceTriple(const Vector3c<Scalar>& v): values(v) {}
    SequenceTriple(Complex<Scalar> pos, Complex<Scalar> neg, Complex<Scalar> zero)
    {
        values << pos, neg, zero;
    }

    Complex<Scalar>& pos() { return values(0); }
    Complex<Scalar>& neg() { return values(1); }
    Complex<Scalar>& zero() { return values(2); }
    const Complex<Scalar>& pos() const { return values(0); }
    const Complex<Scalar>& neg() const { return values(1); }
    const Complex<Scalar>& zero() const { return values(2); }
};

/// One phasor per phase (a, b, c).
template <typename Scalar>
struct PhaseTriple {
    Vector3c<Scalar> values = Vector3c<Scalar>::Zero();

    PhaseTriple() = default;
    explicit PhaseTriple(const Vector3c<Scalar>& v): values(v) {}
    PhaseTriple(Complex<Scalar> a, Complex<Scalar> b, Complex<Scalar> c)
    {
        values << a, b, c;
    }

    Complex<Scalar>& a() { return values(0); }
    Complex<Scalar>& b() { return values(1); }
    Complex<Scalar>& c() { return values(2); }
    const Complex<Scalar>& a() const { return values(0); }
    const Complex<Scalar>& b() const { return values(1); }
    const Complex<Scalar>& c() const { return values(2); }
};

template <typename Scalar>
SequenceTriple<Scalar> to_sequence(const PhaseTriple<Scalar>& x)
{
    return SequenceTriple<Scalar>(phase_to_sequence_matrix<Scalar>() * x.values);
}

template <typename Scalar>
PhaseTriple<Scalar> to_phase(const SequenceTriple<Scalar>& x)
{
    return PhaseTriple<Scalar>(sequence_to_phase_matrix<Scalar>() * x.values);
}

/// Constant and 2w-oscillating elements of the power exchanged through a
/// three-wire connection. Oscillating terms are coefficients of cos(2wt) and
/// sin(2wt) with the angular reference at t = 0.
template <typename Scalar>
struct PowerElements {
    Scalar p_con{0}, p_cos{0}, p_sin{0};
    Scalar q_con{0}, q_cos{0}, q_sin{0};
    Scalar p_con_pos{0}, p_con_neg{0};
    Scalar q_con_pos{0}, q_con_neg{0};
};

/// Zero-sequence voltage and current do not take part in the exchange.
///
/// The reactive oscillating pair follows the same instantaneous model as the
/// active one: the space vector u(t) = exp(-jwt) u+ + exp(jwt) u-, with
/// p = Re(u conj(i)) and q = Im(u conj(i)).
template <typename Scalar>
PowerElements<Scalar> power_elements(const SequenceTriple<Scalar>& u, const SequenceTriple<Scalar>& i)
{
    const Scalar upx = u.pos().real(), upy = u.pos().imag();
    const Scalar unx = u.neg().real(), uny = u.neg().imag();
    const Scalar ipx = i.pos().real(), ipy = i.pos().imag();
    const Scalar inx = i.neg().real(), iny = i.neg().imag();

    PowerElements<Scalar> s;
    s.p_con_pos = upx * ipx + upy * ipy;
    s.p_con_neg = unx * inx + uny * iny;
    s.p_con = s.p_con_pos + s.p_con_neg;
    s.p_cos = upx * inx + upy * iny + unx * ipx + uny * ipy;
    s.p_sin = -upx * iny + upy * inx + unx * ipy - uny * ipx;

    s.q_con_pos = upy * ipx - upx * ipy;
    s.q_con_neg = uny * inx - unx * iny;
    s.q_con = s.q_con_pos + s.q_con_neg;
    s.q_cos = upy * inx - upx * iny + uny * ipx - unx * ipy;
    s.q_sin = unx * ipx + uny * ipy - upx * inx - upy * iny;
    return s;
}

} // namespace scc
