#pragma once

// Passive network in the sequence domain: buses, branches, fault stamps and
// the 3D x 3D admittance matrix ordered as [+ block | - block | 0 block].

#include "scc/phasor.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scc {

enum class Wiring { three_wire, four_wire };

struct Bus {
    std::string id;
    Wiring wiring = Wiring::four_wire;
};

/// Branch endpoint naming the reference node instead of a bus.
inline constexpr std::string_view ground_id = "ground";

/// Series impedance per sequence between two buses, or from a bus to ground
/// for shunt loads. An empty z_zero blocks the zero-sequence path.
struct Branch {
    std::string id;
    std::string from;
    std::string to;
    Complex<double> z_pos;
    Complex<double> z_neg;
    std::optional<Complex<double>> z_zero;
};

enum class FaultKind { none, three_phase_ground, phase_phase, single_phase_ground };

/// 1P2G involves phase a; P2P connects phases c and a (phase b stays healthy).
struct FaultSpec {
    std::string bus;
    FaultKind kind = FaultKind::none;
    Complex<double> z_ft{0.0, 0.0};
};

class NetworkError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Sequence : int { pos = 0, neg = 1, zero = 2 };

template <typename Scalar>
class SequenceAdmittance {
public:
    using Matrix = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

    explicit SequenceAdmittance(std::size_t buses)
        : buses_(static_cast<Eigen::Index>(buses)), y_(Matrix::Zero(3 * buses_, 3 * buses_))
    {
    }

    std::size_t bus_count() const { return static_cast<std::size_t>(buses_); }
    const Matrix& matrix() const { return y_; }

    Eigen::Index index(Sequence s, std::size_t bus) const
    {
        return static_cast<int>(s) * buses_ + static_cast<Eigen::Index>(bus);
    }

    /// D x D block Y^{row,col}.
    auto block(Sequence row, Sequence col) const
    {
        return y_.block(static_cast<int>(row) * buses_, static_cast<int>(col) * buses_, buses_, buses_);
    }

    Complex<Scalar>& operator()(Sequence rs, std::size_t rb, Sequence cs, std::size_t cb)
    {
        return y_(index(rs, rb), index(cs, cb));
    }
    const Complex<Scalar>& operator()(Sequence rs, std::size_t rb, Sequence cs, std::size_t cb) const
    {
        return y_(index(rs, rb), index(cs, cb));
    }

    /// Adds a 3x3 sequence block to the (+,-,0) x (+,-,0) entries of one bus.
    void add_bus_block(std::size_t bus, const Matrix3c<Scalar>& block)
    {
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                (*this)(static_cast<Sequence>(r), bus, static_cast<Sequence>(c), bus) += block(r, c);
            }
        }
    }

    /// Network currents I = Y U for a stacked voltage vector.
    Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, 1>
    currents(const Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, 1>& u) const
    {
        return y_ * u;
    }

private:
    Eigen::Index buses_;
    Matrix y_;
};

/// Position of a bus id in the declared list; throws NetworkError.
std::size_t bus_index(std::span<const Bus> buses, std::string_view id);

/// Checks unique ids and at least one bus.
void validate_buses(std::span<const Bus> buses);

/// Per-sequence stamping of all branches.
template <typename Scalar>
SequenceAdmittance<Scalar> assemble(std::span<const Bus> buses, std::span<const Branch> branches)
{
    validate_buses(buses);
    SequenceAdmittance<Scalar> y(buses.size());
    for (const Branch& br : branches) {
        const bool to_ground = br.to == ground_id;
        const std::size_t from = bus_index(buses, br.from);
        const std::optional<std::size_t> to =
            to_ground ? std::nullopt : std::optional<std::size_t>(bus_index(buses, br.to));
        if (to && *to == from) {
            throw NetworkError("branch '" + br.id + "' connects bus '" + br.from + "' to itself");
        }

        const bool zero_blocked = !br.z_zero || buses[from].wiring == Wiring::three_wire ||
                                  (to && buses[*to].wiring == Wiring::three_wire);
        const std::optional<Complex<double>> impedances[3] = {
            br.z_pos, br.z_neg, zero_blocked ? std::nullopt : br.z_zero};
        for (int s = 0; s < 3; ++s) {
            if (!impedances[s]) {
                continue;
            }
            if (*impedances[s] == Complex<double>(0.0, 0.0)) {
                throw NetworkError("branch '" + br.id + "' has zero impedance");
            }
            const Complex<Scalar> adm = Complex<Scalar>(1) /
                Complex<Scalar>(Scalar(impedances[s]->real()), Scalar(impedances[s]->imag()));
            const auto seq = static_cast<Sequence>(s);
            y(seq, from, seq, from) += adm;
            if (to) {
                y(seq, *to, seq, *to) += adm;
                y(seq, from, seq, *to) -= adm;
                y(seq, *to, seq, from) -= adm;
            }
        }
    }
    return y;
}

/// Phase-domain fault admittance for the given fault kind.
template <typename Scalar>
Matrix3c<Scalar> fault_phase_admittance(FaultKind kind, Complex<Scalar> z_ft)
{
    Matrix3c<Scalar> y = Matrix3c<Scalar>::Zero();
    if (kind == FaultKind::none) {
        return y;
    }
    if (z_ft == Complex<Scalar>(0)) {
        throw NetworkError("fault impedance must be nonzero");
    }
    const Complex<Scalar> yf = Complex<Scalar>(1) / z_ft;
    switch (kind) {
    case FaultKind::three_phase_ground:
        y.diagonal().setConstant(yf);
        break;
    case FaultKind::phase_phase:
        y(0, 0) = yf;
        y(2, 2) = yf;
        y(0, 2) = -yf;
        y(2, 0) = -yf;
        break;
    case FaultKind::single_phase_ground:
        y(0, 0) = yf;
        break;
    case FaultKind::none:
        break;
    }
    return y;
}

/// Sequence-domain fault block T^-1 Y_ph T.
template <typename Scalar>
Matrix3c<Scalar> fault_stamp(FaultKind kind, Complex<Scalar> z_ft)
{
    return phase_to_sequence_matrix<Scalar>() * fault_phase_admittance(kind, z_ft) *
           sequence_to_phase_matrix<Scalar>();
}

/// Adds the fault block to the faulted bus. A fault of kind none is a no-op.
template <typename Scalar>
void apply_fault(SequenceAdmittance<Scalar>& y, std::span<const Bus> buses, const FaultSpec& fault)
{
    if (fault.kind == FaultKind::none) {
        return;
    }
    const std::size_t bus = bus_index(buses, fault.bus);
    y.add_bus_block(bus, fault_stamp<Scalar>(fault.kind, Complex<Scalar>(Scalar(fault.z_ft.real()),
                                                                      Scalar(fault.z_ft.imag()))));
}

/// Phase voltages per bus.
template <typename Scalar>
std::vector<PhaseTriple<Scalar>> sequence_to_phase_voltages(std::span<const SequenceTriple<Scalar>> u)
{
    std::vector<PhaseTriple<Scalar>> out;
    out.reserve(u.size());
    for (const auto& s : u) {
        out.push_back(to_phase(s));
    }
    return out;
}

/// Phase magnitudes are reported both raw and divided by sqrt(3), the
/// line-to-line base used by the published result tables.
template <typename Scalar>
Scalar phase_report_scale()
{
    return Scalar(1) / std::sqrt(Scalar(3));
}

std::string_view to_string(FaultKind kind);
std::optional<FaultKind> parse_fault_kind(std::string_view text);

} // namespace scc
