#include "scc/system.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace scc {

namespace {

std::string join(const std::vector<std::string>& items)
{
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) {
            out += "; ";
        }
        out += s;
    }
    return out;
}

bool bus_exists(const Model& m, const std::string& id)
{
    return std::any_of(m.buses.begin(), m.buses.end(), [&](const Bus& b) { return b.id == id; });
}

// Union-find over bus indices for the island check.
std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i)
{
    while (parent[i] != i) {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    return i;
}

void put(VectorX<double>& r, std::size_t at, Complex<double> z)
{
    r(static_cast<Eigen::Index>(at)) = z.real();
    r(static_cast<Eigen::Index>(at + 1)) = z.imag();
}

} // namespace

ModelError::ModelError(std::vector<std::string> problems)
    : std::invalid_argument("invalid model: " + join(problems)), problems_(std::move(problems))
{
}

std::vector<std::string> model_problems(const Model& m)
{
    std::vector<std::string> problems;
    if (m.buses.empty()) {
        problems.push_back("network has no buses");
    }
    std::set<std::string> ids;
    for (const Bus& b : m.buses) {
        if (b.id == ground_id) {
            problems.push_back("bus id 'ground' is reserved");
        }
        if (!ids.insert(b.id).second) {
            problems.push_back("duplicate bus id '" + b.id + "'");
        }
    }
    for (const Branch& br : m.branches) {
        if (!bus_exists(m, br.from)) {
            problems.push_back("branch '" + br.id + "': unknown bus '" + br.from + "'");
        }
        if (br.to != ground_id && !bus_exists(m, br.to)) {
            problems.push_back("branch '" + br.id + "': unknown bus '" + br.to + "'");
        }
        if (br.to == br.from) {
            problems.push_back("branch '" + br.id + "' connects a bus to itself");
        }
        const Complex<double> zero{0.0, 0.0};
        if (br.z_pos == zero || br.z_neg == zero || (br.z_zero && *br.z_zero == zero)) {
            problems.push_back("branch '" + br.id + "' has zero impedance");
        }
    }

    std::set<std::string> element_ids;
    for (const VscSpec& c : m.converters) {
        if (!element_ids.insert(c.id).second) {
            problems.push_back("duplicate element id '" + c.id + "'");
        }
        if (!bus_exists(m, c.bus)) {
            problems.push_back("converter '" + c.id + "': unknown bus '" + c.bus + "'");
        }
        if (!(c.i_max > 0.0)) {
            problems.push_back("converter '" + c.id + "': i_max must be positive");
        }
        if (c.k_isp < 0.0) {
            problems.push_back("converter '" + c.id + "': k_isp must be non-negative");
        }
        if (c.k_omega < 0.0) {
            problems.push_back("converter '" + c.id + "': k_omega must be non-negative");
        }
    }
    std::size_t drooping = 0;
    for (const NonPeSpec& s : m.sources) {
        if (!element_ids.insert(s.id).second) {
            problems.push_back("duplicate element id '" + s.id + "'");
        }
        if (!bus_exists(m, s.bus)) {
            problems.push_back("source '" + s.id + "': unknown bus '" + s.bus + "'");
        }
        if (s.kind == SourceKind::thevenin && s.z_th == Complex<double>(0.0, 0.0)) {
            problems.push_back("source '" + s.id + "': z_th must be nonzero");
        }
        if (s.droop) {
            if (s.kind != SourceKind::thevenin) {
                problems.push_back("source '" + s.id + "': frequency droop is only defined for thevenin sources");
            }
            ++drooping;
        }
    }
    if (drooping > 1) {
        problems.push_back("at most one source may carry a frequency droop characteristic");
    }

    const bool has_angle_source =
        std::any_of(m.sources.begin(), m.sources.end(), [](const NonPeSpec& s) { return is_angle_source(s.kind); });
    const bool has_gf = std::any_of(m.converters.begin(), m.converters.end(),
                                    [](const VscSpec& c) { return c.mode == ControlMode::gf; });
    if (!has_angle_source && !has_gf) {
        problems.push_back("no voltage-angle reference: add a thevenin/slack source or a grid-forming converter");
    }

    if (problems.empty() && m.buses.size() > 1) {
        std::vector<std::size_t> parent(m.buses.size());
        std::iota(parent.begin(), parent.end(), std::size_t{0});
        for (const Branch& br : m.branches) {
            if (br.to == ground_id) {
                continue;
            }
            const std::size_t a = find_root(parent, bus_index(m.buses, br.from));
            const std::size_t b = find_root(parent, bus_index(m.buses, br.to));
            parent[a] = b;
        }
        const std::size_t root = find_root(parent, 0);
        for (std::size_t i = 1; i < m.buses.size(); ++i) {
            if (find_root(parent, i) != root) {
                problems.push_back("bus '" + m.buses[i].id + "' is not connected to bus '" + m.buses[0].id +
                                   "' (one synchronous island is supported)");
            }
        }
    }
    return problems;
}

void validate_model(const Model& model)
{
    auto problems = model_problems(model);
    if (!problems.empty()) {
        throw ModelError(std::move(problems));
    }
}

bool has_frequency_unknown(const Model& m)
{
    return std::any_of(m.converters.begin(), m.converters.end(),
                       [](const VscSpec& c) { return c.mode == ControlMode::gf; }) ||
           std::any_of(m.sources.begin(), m.sources.end(), [](const NonPeSpec& s) { return s.droop.has_value(); });
}

std::size_t combination_count(const Model& model)
{
    std::size_t f = 1;
    for (const VscSpec& c : model.converters) {
        f *= admissible_states(c.mode).size();
    }
    return f;
}

std::size_t encode(const Model& model, const StateVector& states)
{
    if (states.size() != model.converters.size()) {
        throw std::invalid_argument("state vector length does not match the converter count");
    }
    std::size_t index = 0;
    for (std::size_t k = 0; k < states.size(); ++k) {
        const auto options = admissible_states(model.converters[k].mode);
        const auto it = std::find(options.begin(), options.end(), states[k]);
        if (it == options.end()) {
            throw ConverterError("state " + std::string(to_string(states[k])) + " is not admissible for converter '" +
                                 model.converters[k].id + "'");
        }
        index = index * options.size() + static_cast<std::size_t>(it - options.begin());
    }
    return index + 1;
}

StateVector decode(const Model& model, std::size_t f)
{
    const std::size_t count = combination_count(model);
    if (f < 1 || f > count) {
        throw std::out_of_range("combination " + std::to_string(f) + " outside [1, " + std::to_string(count) + "]");
    }
    std::size_t index = f - 1;
    StateVector states(model.converters.size());
    for (std::size_t k = model.converters.size(); k-- > 0;) {
        const auto options = admissible_states(model.converters[k].mode);
        states[k] = options[index % options.size()];
        index /= options.size();
    }
    return states;
}

StateVector all_unsaturated(const Model& model)
{
    return StateVector(model.converters.size(), SatState::uss);
}

UnknownLayout::UnknownLayout(const Model& model)
    : buses_(model.buses.size()),
      converters_(model.converters.size()),
      sources_(model.sources.size()),
      has_omega_(has_frequency_unknown(model))
{
}

SequenceTriple<double> UnknownLayout::triple(const VectorX<double>& x, std::size_t first) const
{
    const auto at = [&](std::size_t i) { return x(static_cast<Eigen::Index>(i)); };
    return {{at(first), at(first + 1)}, {at(first + 2), at(first + 3)}, {at(first + 4), at(first + 5)}};
}

SequenceTriple<double> UnknownLayout::bus_voltage(const VectorX<double>& x, std::size_t bus) const
{
    SequenceTriple<double> u;
    for (int s = 0; s < 3; ++s) {
        const auto i = static_cast<Eigen::Index>(voltage(bus, static_cast<Sequence>(s)));
        u.values(s) = {x(i), x(i + 1)};
    }
    return u;
}

SequenceTriple<double> UnknownLayout::converter_injection(const VectorX<double>& x, std::size_t k) const
{
    return triple(x, converter_current(k, Sequence::pos));
}

SequenceTriple<double> UnknownLayout::source_injection(const VectorX<double>& x, std::size_t k) const
{
    return triple(x, source_current(k, Sequence::pos));
}

double UnknownLayout::omega_value(const VectorX<double>& x, double omega0) const
{
    return has_omega_ ? x(static_cast<Eigen::Index>(size() - 1)) : omega0;
}

Eigen::VectorXcd UnknownLayout::stacked_voltages(const VectorX<double>& x) const
{
    Eigen::VectorXcd u(static_cast<Eigen::Index>(3 * buses_));
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        u(i) = {x(2 * i), x(2 * i + 1)};
    }
    return u;
}

SystemOfEquations::SystemOfEquations(const Model& model, const FaultSpec& fault, StateVector states)
    : model_(&model),
      fault_(fault),
      states_(std::move(states)),
      layout_(model),
      y_(assemble<double>(model.buses, model.branches))
{
    if (states_.size() != model.converters.size()) {
        throw std::invalid_argument("state vector length does not match the converter count");
    }
    for (std::size_t k = 0; k < states_.size(); ++k) {
        if (!is_admissible(model.converters[k].mode, states_[k])) {
            throw ConverterError("state " + std::string(to_string(states_[k])) +
                                 " is not admissible for converter '" + model.converters[k].id + "'");
        }
    }
    apply_fault(y_, model.buses, fault_);
    for (const VscSpec& c : model.converters) {
        converter_bus_.push_back(bus_index(model.buses, c.bus));
    }
    for (const NonPeSpec& s : model.sources) {
        source_bus_.push_back(bus_index(model.buses, s.bus));
    }

    if (layout_.has_omega()) {
        for (std::size_t k = 0; k < model.sources.size(); ++k) {
            if (model.sources[k].droop) {
                frequency_anchor_ = k;
            }
        }
        if (!frequency_anchor_) {
            for (std::size_t k = 0; k < model.sources.size(); ++k) {
                if (is_angle_source(model.sources[k].kind)) {
                    frequency_anchor_ = k;
                    break;
                }
            }
        }
        if (!frequency_anchor_) {
            for (std::size_t k = 0; k < model.converters.size(); ++k) {
                if (model.converters[k].mode == ControlMode::gf) {
                    angle_reference_ = k;
                    break;
                }
            }
        }
    }
}

VectorX<double> SystemOfEquations::nodal_mismatch(const VectorX<double>& x) const
{
    const std::size_t d = layout_.bus_count();
    Eigen::VectorXcd injected = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(3 * d));
    for (std::size_t k = 0; k < converter_bus_.size(); ++k) {
        const auto i = layout_.converter_injection(x, k);
        for (int s = 0; s < 3; ++s) {
            injected(y_.index(static_cast<Sequence>(s), converter_bus_[k])) += i.values(s);
        }
    }
    for (std::size_t k = 0; k < source_bus_.size(); ++k) {
        const auto i = layout_.source_injection(x, k);
        for (int s = 0; s < 3; ++s) {
            injected(y_.index(static_cast<Sequence>(s), source_bus_[k])) += i.values(s);
        }
    }
    const Eigen::VectorXcd mismatch = injected - y_.currents(layout_.stacked_voltages(x));
    VectorX<double> r(2 * mismatch.size());
    for (Eigen::Index i = 0; i < mismatch.size(); ++i) {
        r(2 * i) = mismatch(i).real();
        r(2 * i + 1) = mismatch(i).imag();
    }
    return r;
}

bool SystemOfEquations::operator()(const VectorX<double>& x, VectorX<double>& r) const
{
    const Model& m = *model_;
    r.resize(static_cast<Eigen::Index>(residual_count()));
    const VectorX<double> nodal = nodal_mismatch(x);
    r.head(nodal.size()) = nodal;

    const double omega = layout_.omega_value(x, m.omega0);
    const ConverterContext ctx{fault_active(), m.omega0};
    std::size_t row = static_cast<std::size_t>(nodal.size());
    for (std::size_t k = 0; k < m.converters.size(); ++k) {
        const auto rows = converter_residuals(m.converters[k], states_[k], layout_.bus_voltage(x, converter_bus_[k]),
                                              layout_.converter_injection(x, k), omega, ctx);
        for (double v : rows) {
            r(static_cast<Eigen::Index>(row++)) = v;
        }
    }
    for (std::size_t k = 0; k < m.sources.size(); ++k) {
        const auto rows =
            element_residuals(m.sources[k], layout_.bus_voltage(x, source_bus_[k]), layout_.source_injection(x, k));
        for (double v : rows) {
            r(static_cast<Eigen::Index>(row++)) = v;
        }
    }
    if (frequency_anchor_) {
        const std::size_t k = *frequency_anchor_;
        r(static_cast<Eigen::Index>(row++)) =
            frequency_residual(m.sources[k], layout_.bus_voltage(x, source_bus_[k]), layout_.source_injection(x, k),
                               omega, m.omega0);
    } else if (angle_reference_) {
        r(static_cast<Eigen::Index>(row++)) = layout_.bus_voltage(x, converter_bus_[*angle_reference_]).pos().imag();
    }
    return true;
}

VectorX<double> flat_start(const Model& model)
{
    const UnknownLayout layout(model);
    VectorX<double> x = VectorX<double>::Zero(static_cast<Eigen::Index>(layout.size()));
    for (std::size_t d = 0; d < layout.bus_count(); ++d) {
        x(static_cast<Eigen::Index>(layout.voltage(d, Sequence::pos))) = 1.0;
    }
    for (std::size_t k = 0; k < model.converters.size(); ++k) {
        const VscSpec& c = model.converters[k];
        const double p = c.mode == ControlMode::gf ? c.p0 : c.p_disp;
        const double q = c.mode == ControlMode::pq ? std::max(c.q_disp, 0.1 * c.i_max) : 0.1 * c.i_max;
        Complex<double> i = std::conj(Complex<double>(p, q));
        if (std::abs(i) > c.i_max) {
            i *= c.i_max / std::abs(i);
        }
        put(x, layout.converter_current(k, Sequence::pos), i);
    }
    if (auto w = layout.omega()) {
        x(static_cast<Eigen::Index>(*w)) = model.omega0;
    }
    return x;
}


namespace {

// Positive-sequence current relative to a unit voltage at angle zero.
Complex<double> seeded_current(const VscSpec& c, SatState state, bool fault_active)
{
    const double imax = c.i_max;
    if (state == SatState::fss) {
        if (c.mode == ControlMode::gf) {
            const double p = std::clamp(c.p0, -imax, imax);
            return std::conj(Complex<double>(p, std::sqrt(imax * imax - p * p)));
        }
        return {0.0, -imax};
    }
    double p = c.mode == ControlMode::gf ? c.p0 : c.p_disp;
    double q = 0.1 * imax;
    if (c.mode == ControlMode::pq) {
        q = std::max(fault_active ? c.i_d0.value_or(c.q_disp) : c.q_disp, q);
    }
    Complex<double> i = std::conj(Complex<double>(p, q));
    if (state == SatState::pss || std::abs(i) > imax) {
        i *= imax / std::abs(i);
    }
    return i;
}

} // namespace

VectorX<double> initial_guess(const SystemOfEquations& system)
{
    const Model& m = system.model();
    const UnknownLayout& layout = system.layout();
    const std::size_t d = layout.bus_count();
    const auto n = static_cast<Eigen::Index>(3 * d);
    const auto pos = [&](std::size_t bus) { return system.admittance().index(Sequence::pos, bus); };

    // Norton equivalents of the voltage-setting elements.
    constexpr double stiff = 1e3;
    Eigen::MatrixXcd y = system.admittance().matrix();
    Eigen::VectorXcd norton = Eigen::VectorXcd::Zero(n);
    for (const NonPeSpec& s : m.sources) {
        const std::size_t b = bus_index(m.buses, s.bus);
        if (s.kind == SourceKind::thevenin) {
            const Complex<double> ys = 1.0 / s.z_th;
            for (int q = 0; q < 3; ++q) {
                const auto at = system.admittance().index(static_cast<Sequence>(q), b);
                y(at, at) += ys;
            }
            norton(pos(b)) += ys * s.u_source;
        } else if (s.kind == SourceKind::slack) {
            for (int q = 0; q < 3; ++q) {
                const auto at = system.admittance().index(static_cast<Sequence>(q), b);
                y(at, at) += stiff;
            }
            norton(pos(b)) += stiff * s.u_source;
        }
    }
    std::vector<std::size_t> conv_bus;
    for (std::size_t k = 0; k < m.converters.size(); ++k) {
        const VscSpec& c = m.converters[k];
        conv_bus.push_back(bus_index(m.buses, c.bus));
        if (c.mode == ControlMode::gf && system.states()[k] == SatState::uss) {
            y(pos(conv_bus[k]), pos(conv_bus[k])) += 1.0;
            norton(pos(conv_bus[k])) += c.u_ref_gf;
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        // Keeps floating zero-sequence nodes determinate.
        y(i, i) += 1e-9;
    }

    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(y);
    std::vector<Complex<double>> currents(m.converters.size());
    Eigen::VectorXcd u = Eigen::VectorXcd::Zero(n);
    for (int pass = 0; pass < 2; ++pass) {
        Eigen::VectorXcd inj = norton;
        for (std::size_t k = 0; k < m.converters.size(); ++k) {
            const double theta = pass == 0 ? 0.0 : std::arg(u(pos(conv_bus[k])));
            const bool gf_uss = m.converters[k].mode == ControlMode::gf && system.states()[k] == SatState::uss;
            currents[k] = seeded_current(m.converters[k], system.states()[k], system.fault_active()) *
                          std::polar(1.0, theta);
            if (!gf_uss) {
                inj(pos(conv_bus[k])) += currents[k];
            }
        }
        u = lu.solve(inj);
    }
    if (!u.allFinite() || u.cwiseAbs().maxCoeff() > 10.0) {
        return flat_start(m);
    }

    VectorX<double> x = VectorX<double>::Zero(static_cast<Eigen::Index>(layout.size()));
    for (std::size_t b = 0; b < d; ++b) {
        for (int q = 0; q < 3; ++q) {
            const auto seq = static_cast<Sequence>(q);
            put(x, layout.voltage(b, seq), u(system.admittance().index(seq, b)));
        }
    }
    for (std::size_t k = 0; k < m.converters.size(); ++k) {
        const VscSpec& c = m.converters[k];
        Complex<double> i = currents[k];
        if (c.mode == ControlMode::gf && system.states()[k] == SatState::uss) {
            const Complex<double> ub = u(pos(conv_bus[k]));
            i = std::polar(c.u_ref_gf, std::arg(ub)) - ub;
        }
        put(x, layout.converter_current(k, Sequence::pos), i);
    }
    for (std::size_t k = 0; k < m.sources.size(); ++k) {
        const NonPeSpec& s = m.sources[k];
        const std::size_t b = bus_index(m.buses, s.bus);
        if (s.kind != SourceKind::thevenin && s.kind != SourceKind::slack) {
            continue;
        }
        const Complex<double> ys = s.kind == SourceKind::thevenin ? 1.0 / s.z_th : Complex<double>(stiff);
        for (int q = 0; q < 3; ++q) {
            const auto seq = static_cast<Sequence>(q);
            const Complex<double> src = q == 0 ? s.u_source : Complex<double>(0.0);
            put(x, layout.source_current(k, seq), ys * (src - u(system.admittance().index(seq, b))));
        }
    }
    if (auto w = layout.omega()) {
        x(static_cast<Eigen::Index>(*w)) = m.omega0;
    }
    return x;
}

} // namespace scc
