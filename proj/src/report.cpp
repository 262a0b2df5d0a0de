#include "scc/io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <sstream>

namespace scc {

using json = nlohmann::ordered_json;

namespace {

std::vector<std::string> state_names(const StateVector& states)
{
    std::vector<std::string> out;
    for (SatState s : states) {
        out.emplace_back(to_string(s));
    }
    return out;
}

json to_json(const PolarValue& v)
{
    return json::array({v.mag, v.deg});
}

PolarValue polar_from(const json& j)
{
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

json to_json(const PointRecord& p)
{
    json j;
    j["f"] = p.f;
    j["states"] = p.states;
    j["omega"] = p.omega;
    j["residual_norm"] = p.residual_norm;
    json buses = json::array();
    for (const BusRecord& b : p.buses) {
        buses.push_back({{"id", b.id},
                         {"seq", {to_json(b.seq[0]), to_json(b.seq[1]), to_json(b.seq[2])}},
                         {"phase", {to_json(b.phase[0]), to_json(b.phase[1]), to_json(b.phase[2])}}});
    }
    j["buses"] = std::move(buses);
    json conv = json::array();
    for (const ConverterRecord& c : p.converters) {
        json cj = {{"id", c.id},       {"mode", c.mode},   {"state", c.state}, {"i_pos", c.i_pos},
                   {"p_con", c.p_con}, {"q_con", c.q_con}, {"p_cos", c.p_cos}, {"p_sin", c.p_sin},
                   {"q_cos", c.q_cos}, {"q_sin", c.q_sin}};
        if (c.i_d0) {
            cj["i_d0"] = *c.i_d0;
        }
        conv.push_back(std::move(cj));
    }
    j["converters"] = std::move(conv);
    json src = json::array();
    for (const SourceRecord& s : p.sources) {
        src.push_back({{"id", s.id}, {"kind", s.kind}, {"i_pos", to_json(s.i_pos)}, {"p_con", s.p_con},
                       {"q_con", s.q_con}});
    }
    j["sources"] = std::move(src);
    return j;
}

PointRecord point_from(const json& j)
{
    PointRecord p;
    p.f = j.at("f").get<std::size_t>();
    p.states = j.at("states").get<std::vector<std::string>>();
    p.omega = j.at("omega").get<double>();
    p.residual_norm = j.at("residual_norm").get<double>();
    for (const json& b : j.at("buses")) {
        BusRecord br;
        br.id = b.at("id").get<std::string>();
        for (int k = 0; k < 3; ++k) {
            br.seq[k] = polar_from(b.at("seq").at(k));
            br.phase[k] = polar_from(b.at("phase").at(k));
        }
        p.buses.push_back(std::move(br));
    }
    for (const json& c : j.at("converters")) {
        ConverterRecord cr;
        cr.id = c.at("id").get<std::string>();
        cr.mode = c.at("mode").get<std::string>();
        cr.state = c.at("state").get<std::string>();
        cr.i_pos = c.at("i_pos").get<double>();
        cr.p_con = c.at("p_con").get<double>();
        cr.q_con = c.at("q_con").get<double>();
        cr.p_cos = c.at("p_cos").get<double>();
        cr.p_sin = c.at("p_sin").get<double>();
        cr.q_cos = c.at("q_cos").get<double>();
        cr.q_sin = c.at("q_sin").get<double>();
        if (c.contains("i_d0")) {
            cr.i_d0 = c.at("i_d0").get<double>();
        }
        p.converters.push_back(std::move(cr));
    }
    for (const json& s : j.at("sources")) {
        SourceRecord sr;
        sr.id = s.at("id").get<std::string>();
        sr.kind = s.at("kind").get<std::string>();
        sr.i_pos = polar_from(s.at("i_pos"));
        sr.p_con = s.at("p_con").get<double>();
        sr.q_con = s.at("q_con").get<double>();
        p.sources.push_back(std::move(sr));
    }
    return p;
}

json to_json(const ResultRecord& r)
{
    json j;
    j["case"] = r.case_name;
    j["study"] = r.study;
    j["fault"] = {{"bus", r.fault.bus}, {"kind", r.fault.kind}, {"z_ft", {r.fault.z_re, r.fault.z_im}}};
    j["status"] = r.status;
    j["combinations"] = r.combinations;
    if (r.n_t) {
        j["n_t"] = *r.n_t;
    }
    if (r.n_t_max) {
        j["n_t_max"] = *r.n_t_max;
    }
    if (r.termination) {
        j["termination"] = *r.termination;
    }
    if (r.equilibrium) {
        j["equilibrium"] = to_json(*r.equilibrium);
    }
    if (r.study == "exhaustive") {
        json eq = json::array();
        for (const PointRecord& p : r.equilibria) {
            eq.push_back(to_json(p));
        }
        j["equilibria"] = std::move(eq);
    }
    if (!r.trace.empty()) {
        json tr = json::array();
        for (const TraceRecord& t : r.trace) {
            tr.push_back({{"n_t", t.n_t},
                          {"f", t.f},
                          {"states", t.states},
                          {"converged", t.converged},
                          {"residual_norm", t.residual_norm},
                          {"solver_iters", t.solver_iters},
                          {"next_states", t.next_states},
                          {"fallback", t.fallback}});
        }
        j["trace"] = std::move(tr);
    }
    if (r.wall_time_s) {
        j["wall_time_s"] = *r.wall_time_s;
    }
    return j;
}

ResultRecord record_from(const json& j)
{
    ResultRecord r;
    r.case_name = j.at("case").get<std::string>();
    r.study = j.at("study").get<std::string>();
    const json& f = j.at("fault");
    r.fault.bus = f.at("bus").get<std::string>();
    r.fault.kind = f.at("kind").get<std::string>();
    r.fault.z_re = f.at("z_ft").at(0).get<double>();
    r.fault.z_im = f.at("z_ft").at(1).get<double>();
    r.status = j.at("status").get<std::string>();
    r.combinations = j.at("combinations").get<std::size_t>();
    if (j.contains("n_t")) {
        r.n_t = j.at("n_t").get<int>();
    }
    if (j.contains("n_t_max")) {
        r.n_t_max = j.at("n_t_max").get<int>();
    }
    if (j.contains("termination")) {
        r.termination = j.at("termination").get<std::string>();
    }
    if (j.contains("equilibrium")) {
        r.equilibrium = point_from(j.at("equilibrium"));
    }
    if (j.contains("equilibria")) {
        for (const json& p : j.at("equilibria")) {
            r.equilibria.push_back(point_from(p));
        }
    }
    if (j.contains("trace")) {
        for (const json& t : j.at("trace")) {
            TraceRecord tr;
            tr.n_t = t.at("n_t").get<int>();
            tr.f = t.at("f").get<std::size_t>();
            tr.states = t.at("states").get<std::vector<std::string>>();
            tr.converged = t.at("converged").get<bool>();
            tr.residual_norm = t.at("residual_norm").get<double>();
            tr.solver_iters = t.at("solver_iters").get<int>();
            tr.next_states = t.at("next_states").get<std::vector<std::string>>();
            tr.fallback = t.at("fallback").get<bool>();
            r.trace.push_back(std::move(tr));
        }
    }
    if (j.contains("wall_time_s")) {
        r.wall_time_s = j.at("wall_time_s").get<double>();
    }
    return r;
}

FaultRecord fault_record(const FaultSpec& fault)
{
    return {fault.bus, std::string(to_string(fault.kind)), fault.z_ft.real(), fault.z_ft.imag()};
}

std::string fmt(const char* format, double a)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, format, a);
    return buf;
}

std::string polar_text(const PolarValue& v)
{
    char buf[64];
    // Avoid printing "-0.0" for angles that round to zero.
    const double deg = std::abs(v.deg) < 0.05 ? 0.0 : v.deg;
    std::snprintf(buf, sizeof buf, "%.3f<%.1f", v.mag, deg);
    return buf;
}

std::string pad(std::string s, std::size_t width)
{
    if (s.size() < width) {
        s.append(width - s.size(), ' ');
    }
    return s;
}

void write_point(std::ostringstream& out, const PointRecord& p)
{
    out << "  combination f=" << p.f << " [";
    for (std::size_t k = 0; k < p.states.size(); ++k) {
        out << (k ? " " : "") << p.states[k];
    }
    out << "]  omega=" << fmt("%.4f", p.omega) << "  residual=" << fmt("%.2e", p.residual_norm) << "\n";

    const double scale = phase_report_scale<double>();
    out << "  " << pad("bus", 8) << pad("u+", 14) << pad("u-", 14) << pad("u0", 14) << pad("|ua|", 8)
        << pad("|ub|", 8) << pad("|uc|", 8) << pad("|ua|/r3", 9) << pad("|ub|/r3", 9) << "|uc|/r3\n";
    for (const BusRecord& b : p.buses) {
        out << "  " << pad(b.id, 8);
        for (const PolarValue& v : b.seq) {
            out << pad(polar_text(v), 14);
        }
        for (const PolarValue& v : b.phase) {
            out << pad(fmt("%.3f", v.mag), 8);
        }
        for (int k = 0; k < 3; ++k) {
            out << (k < 2 ? pad(fmt("%.3f", b.phase[k].mag * scale), 9) : fmt("%.3f", b.phase[k].mag * scale));
        }
        out << "\n";
    }
    if (!p.converters.empty()) {
        out << "  " << pad("vsc", 8) << pad("mode", 6) << pad("state", 7) << pad("|i+|", 8) << pad("p", 9)
            << pad("q", 9) << pad("p_cos", 9) << pad("p_sin", 9) << pad("q_cos", 9) << "q_sin\n";
        for (const ConverterRecord& c : p.converters) {
            out << "  " << pad(c.id, 8) << pad(c.mode, 6) << pad(c.state, 7) << pad(fmt("%.3f", c.i_pos), 8)
                << pad(fmt("%.3f", c.p_con), 9) << pad(fmt("%.3f", c.q_con), 9) << pad(fmt("%.3f", c.p_cos), 9)
                << pad(fmt("%.3f", c.p_sin), 9) << pad(fmt("%.3f", c.q_cos), 9) << fmt("%.3f", c.q_sin) << "\n";
        }
    }
    if (!p.sources.empty()) {
        out << "  " << pad("source", 8) << pad("kind", 10) << pad("i+", 14) << pad("p", 9) << "q\n";
        for (const SourceRecord& s : p.sources) {
            out << "  " << pad(s.id, 8) << pad(s.kind, 10) << pad(polar_text(s.i_pos), 14)
                << pad(fmt("%.3f", s.p_con), 9) << fmt("%.3f", s.q_con) << "\n";
        }
    }
}

} // namespace

PointRecord make_point_record(const Model& model, const EquilibriumPoint& ep)
{
    PointRecord p;
    p.f = ep.f;
    p.states = state_names(ep.states);
    p.omega = ep.point.omega;
    p.residual_norm = ep.residual_norm;
    for (std::size_t d = 0; d < model.buses.size(); ++d) {
        const SequenceTriple<double>& u = ep.point.bus_voltages[d];
        const PhaseTriple<double> ph = to_phase(u);
        BusRecord b;
        b.id = model.buses[d].id;
        for (int k = 0; k < 3; ++k) {
            b.seq[k] = PolarValue::from(u.values(k));
            b.phase[k] = PolarValue::from(ph.values(k));
        }
        p.buses.push_back(std::move(b));
    }
    for (std::size_t k = 0; k < model.converters.size(); ++k) {
        const VscSpec& spec = model.converters[k];
        const ConverterReport& rep = ep.point.converters[k];
        ConverterRecord c;
        c.id = spec.id;
        c.mode = std::string(to_string(spec.mode));
        c.state = std::string(to_string(ep.states[k]));
        c.i_pos = rep.i_pos;
        c.p_con = rep.power.p_con;
        c.q_con = rep.power.q_con;
        c.p_cos = rep.power.p_cos;
        c.p_sin = rep.power.p_sin;
        c.q_cos = rep.power.q_cos;
        c.q_sin = rep.power.q_sin;
        if (spec.mode == ControlMode::pq) {
            c.i_d0 = spec.i_d0;
        }
        p.converters.push_back(std::move(c));
    }
    for (std::size_t k = 0; k < model.sources.size(); ++k) {
        SourceRecord s;
        s.id = model.sources[k].id;
        s.kind = std::string(to_string(model.sources[k].kind));
        s.i_pos = PolarValue::from(ep.point.source_currents[k].pos());
        s.p_con = ep.point.source_power[k].p_con;
        s.q_con = ep.point.source_power[k].q_con;
        p.sources.push_back(std::move(s));
    }
    return p;
}

ResultRecord make_iterative_record(const Model& model, const FaultSpec& fault, const AlgorithmResult& result)
{
    ResultRecord r;
    r.case_name = model.name;
    r.study = "iterative";
    r.fault = fault_record(fault);
    r.status = result.equilibrium ? "equilibrium" : "no_equilibrium";
    r.combinations = result.combinations;
    r.n_t = result.n_t;
    r.n_t_max = result.n_t_max;
    r.termination = std::string(to_string(result.termination));
    if (result.equilibrium) {
        r.equilibrium = make_point_record(model, *result.equilibrium);
    }
    for (const TraceEntry& t : result.trace) {
        r.trace.push_back({t.n_t, t.f, state_names(t.states), t.converged, t.residual_norm, t.solver_iters,
                           state_names(t.next_states), t.fallback});
    }
    return r;
}

ResultRecord make_oracle_record(const Model& model, const FaultSpec& fault, const OracleResult& result)
{
    ResultRecord r;
    r.case_name = model.name;
    r.study = "exhaustive";
    r.fault = fault_record(fault);
    r.status = result.equilibria.empty() ? "no_equilibrium" : "equilibrium";
    r.combinations = result.solves.size();
    for (const EquilibriumPoint& ep : result.equilibria) {
        r.equilibria.push_back(make_point_record(model, ep));
    }
    return r;
}

std::string emit_records(std::span<const ResultRecord> records)
{
    json doc;
    doc["records"] = json::array();
    for (const ResultRecord& r : records) {
        doc["records"].push_back(to_json(r));
    }
    return doc.dump(2) + "\n";
}

std::vector<ResultRecord> load_records(std::string_view text)
{
    std::vector<ResultRecord> out;
    try {
        const json doc = json::parse(text.begin(), text.end());
        for (const json& r : doc.at("records")) {
            out.push_back(record_from(r));
        }
    } catch (const json::exception& e) {
        throw InputError({std::string("records: ") + e.what()});
    }
    return out;
}

std::string emit_table(const ResultRecord& r)
{
    std::ostringstream out;
    out << r.case_name << "  " << r.study << "  fault " << r.fault.kind;
    if (r.fault.kind != "none") {
        out << " at bus " << r.fault.bus << " z_ft=" << fmt("%.4g", r.fault.z_re) << (r.fault.z_im < 0 ? "-j" : "+j")
            << fmt("%.4g", std::abs(r.fault.z_im));
    }
    out << "\n";
    if (r.study == "exhaustive") {
        out << "  combinations solved: " << r.combinations << ", valid equilibria: " << r.equilibria.size() << "\n";
        for (const PointRecord& p : r.equilibria) {
            write_point(out, p);
        }
    } else {
        out << "  status " << r.status;
        if (r.termination) {
            out << " (" << *r.termination << ")";
        }
        if (r.n_t) {
            out << "  n_t=" << *r.n_t << "/" << r.n_t_max.value_or(0);
        }
        out << "  F=" << r.combinations << "\n";
        if (r.equilibrium) {
            write_point(out, *r.equilibrium);
        }
        if (!r.found()) {
            out << "  trace:\n";
            for (const TraceRecord& t : r.trace) {
                out << "    n_t=" << t.n_t << " f=" << t.f << (t.converged ? " converged" : " not converged")
                    << " residual=" << fmt("%.2e", t.residual_norm) << " ->";
                for (const std::string& s : t.next_states) {
                    out << " " << s;
                }
                out << (t.fallback ? " (fallback)" : "") << "\n";
            }
        }
    }
    if (r.wall_time_s) {
        out << "  wall time " << fmt("%.3f", *r.wall_time_s) << " s\n";
    }
    return out.str();
}

std::string emit_results(std::span<const ResultRecord> records, OutputFormat format)
{
    if (format == OutputFormat::records) {
        return emit_records(records);
    }
    std::string out;
    for (const ResultRecord& r : records) {
        out += out.empty() ? "" : "\n";
        out += emit_table(r);
    }
    return out;
}

ResultRecord apply_prefault_i_d0(Model& model, const AlgorithmOptions& options)
{
    const FaultSpec none{};
    AlgorithmOptions pre = options;
    pre.x0.reset();
    const AlgorithmResult result = run_algorithm(model, none, pre);
    if (!result.equilibrium) {
        throw InputError({"pre-fault solve found no equilibrium; give i_d0 explicitly"});
    }
    for (std::size_t k = 0; k < model.converters.size(); ++k) {
        VscSpec& spec = model.converters[k];
        if (spec.mode != ControlMode::pq) {
            continue;
        }
        const ConverterReport& rep = result.equilibrium->point.converters[k];
        spec.i_d0 = rep.power.q_con / rep.u_pos;
    }
    ResultRecord r = make_iterative_record(model, none, result);
    r.study = "prefault";
    return r;
}

void require_i_d0(const Model& model)
{
    std::vector<std::string> missing;
    for (const VscSpec& spec : model.converters) {
        if (spec.mode == ControlMode::pq && !spec.i_d0) {
            missing.push_back("converter '" + spec.id +
                              "': i_d0 is required for a fault study (set it or use the prefault-solve policy)");
        }
    }
    if (!missing.empty()) {
        throw InputError(missing);
    }
}

} // namespace scc
