#include "scc/io.hpp"

#include <json.hpp>

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#ifndef SCC_DATA_DIR
#define SCC_DATA_DIR "data"
#endif

namespace scc {

using json = nlohmann::json;

namespace {

std::string join_lines(const std::vector<std::string>& lines)
{
    std::string out;
    for (const auto& l : lines) {
        out += out.empty() ? "" : "\n";
        out += l;
    }
    return out;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError({"cannot open '" + path.string() + "'"});
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json(std::string_view text, std::string_view source)
{
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        std::size_t line = 1, column = 1;
        const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw InputError({std::string(source) + ":" + std::to_string(line) + ":" + std::to_string(column) +
                          ": parse error: " + e.what()});
    }
}

// Collects field-level diagnostics while walking a JSON document.
class Reader {
public:
    explicit Reader(std::string source): source_(std::move(source)) {}

    void error(const std::string& path, const std::string& message)
    {
        diagnostics_.push_back(source_ + ": " + path + ": " + message);
    }

    const json* field(const json& obj, const std::string& path, const char* key, bool required)
    {
        if (!obj.is_object()) {
            error(path, "expected an object");
            return nullptr;
        }
        const auto it = obj.find(key);
        if (it == obj.end()) {
            if (required) {
                error(path + "." + key, "missing required field");
            }
            return nullptr;
        }
        return &*it;
    }

    std::optional<double> number(const json& obj, const std::string& path, const char* key, bool required = true)
    {
        const json* v = field(obj, path, key, required);
        if (!v) {
            return std::nullopt;
        }
        if (!v->is_number()) {
            error(path + "." + key, "expected a number");
            return std::nullopt;
        }
        return v->get<double>();
    }

    std::optional<std::string> string(const json& obj, const std::string& path, const char* key,
                                      bool required = true)
    {
        const json* v = field(obj, path, key, required);
        if (!v) {
            return std::nullopt;
        }
        if (!v->is_string()) {
            error(path + "." + key, "expected a string");
            return std::nullopt;
        }
        return v->get<std::string>();
    }

    std::optional<Complex<double>> complex(const json& obj, const std::string& path, const char* key,
                                           bool required = true)
    {
        const json* v = field(obj, path, key, required);
        if (!v) {
            return std::nullopt;
        }
        return complex_value(*v, path + "." + key);
    }

    std::optional<Complex<double>> complex_value(const json& v, const std::string& path)
    {
        if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
            return Complex<double>(v[0].get<double>(), v[1].get<double>());
        }
        if (v.is_number()) {
            return Complex<double>(v.get<double>(), 0.0);
        }
        if (v.is_string()) {
            if (auto z = parse_complex(v.get<std::string>())) {
                return z;
            }
        }
        error(path, "expected a complex value [re, im]");
        return std::nullopt;
    }

    const json* array(const json& obj, const std::string& path, const char* key, bool required = true)
    {
        const json* v = field(obj, path, key, required);
        if (v && !v->is_array()) {
            error(path + "." + key, "expected an array");
            return nullptr;
        }
        return v;
    }

    void allow_only(const json& obj, const std::string& path, std::initializer_list<const char*> keys)
    {
        if (!obj.is_object()) {
            return;
        }
        const std::set<std::string> allowed(keys.begin(), keys.end());
        for (const auto& [k, _] : obj.items()) {
            if (!allowed.contains(k)) {
                error(path + "." + k, "unknown field");
            }
        }
    }

    void finish() const
    {
        if (!diagnostics_.empty()) {
            throw InputError(diagnostics_);
        }
    }

    void absorb(const std::vector<std::string>& problems)
    {
        for (const auto& p : problems) {
            diagnostics_.push_back(source_ + ": " + p);
        }
    }

    bool ok() const { return diagnostics_.empty(); }

private:
    std::string source_;
    std::vector<std::string> diagnostics_;
};

std::string item_path(const char* list, std::size_t i)
{
    return std::string(list) + "[" + std::to_string(i) + "]";
}

void read_buses(Reader& rd, const json& doc, const std::string& root, Model& m)
{
    const json* buses = rd.array(doc, root, "buses");
    if (!buses) {
        return;
    }
    if (buses->empty()) {
        rd.error(root + ".buses", "at least one bus is required");
    }
    for (std::size_t i = 0; i < buses->size(); ++i) {
        const json& b = (*buses)[i];
        const std::string path = item_path("buses", i);
        rd.allow_only(b, path, {"id", "wiring"});
        Bus bus;
        bus.id = rd.string(b, path, "id").value_or("");
        if (auto w = rd.string(b, path, "wiring", false)) {
            if (*w == "three-wire") {
                bus.wiring = Wiring::three_wire;
            } else if (*w == "four-wire") {
                bus.wiring = Wiring::four_wire;
            } else {
                rd.error(path + ".wiring", "expected 'three-wire' or 'four-wire'");
            }
        }
        m.buses.push_back(bus);
    }
}

void read_branches(Reader& rd, const json& doc, const std::string& root, Model& m)
{
    const json* branches = rd.array(doc, root, "branches", false);
    if (!branches) {
        return;
    }
    for (std::size_t i = 0; i < branches->size(); ++i) {
        const json& b = (*branches)[i];
        const std::string path = item_path("branches", i);
        rd.allow_only(b, path, {"id", "from", "to", "z_pos", "z_neg", "z_zero"});
        Branch br;
        br.id = rd.string(b, path, "id").value_or("");
        br.from = rd.string(b, path, "from").value_or("");
        br.to = rd.string(b, path, "to").value_or("");
        br.z_pos = rd.complex(b, path, "z_pos").value_or(Complex<double>{});
        br.z_neg = rd.complex(b, path, "z_neg").value_or(Complex<double>{});
        if (const json* z0 = rd.field(b, path, "z_zero", true)) {
            if (z0->is_string() && z0->get<std::string>() == "open") {
                br.z_zero = std::nullopt;
            } else {
                br.z_zero = rd.complex_value(*z0, path + ".z_zero");
            }
        }
        m.branches.push_back(br);
    }
}

void read_converters(Reader& rd, const json& doc, Model& m)
{
    const json* list = rd.array(doc, "$", "converters", false);
    if (!list) {
        return;
    }
    for (std::size_t i = 0; i < list->size(); ++i) {
        const json& c = (*list)[i];
        const std::string path = item_path("converters", i);
        VscSpec v;
        v.id = rd.string(c, path, "id").value_or("");
        v.bus = rd.string(c, path, "bus").value_or("");
        v.i_max = rd.number(c, path, "i_max").value_or(0.0);
        const auto mode_text = rd.string(c, path, "mode");
        const auto mode = mode_text ? parse_control_mode(*mode_text) : std::nullopt;
        if (mode_text && !mode) {
            rd.error(path + ".mode", "expected 'PQ', 'PV' or 'GF'");
        }
        if (mode) {
            v.mode = *mode;
        }
        switch (v.mode) {
        case ControlMode::pq:
            rd.allow_only(c, path, {"id", "bus", "mode", "i_max", "p_disp", "q_disp", "k_isp", "u_ref_gs", "i_d0"});
            v.p_disp = rd.number(c, path, "p_disp").value_or(0.0);
            v.q_disp = rd.number(c, path, "q_disp").value_or(0.0);
            v.k_isp = rd.number(c, path, "k_isp").value_or(0.0);
            v.u_ref_gs = rd.number(c, path, "u_ref_gs", false).value_or(1.0);
            v.i_d0 = rd.number(c, path, "i_d0", false);
            break;
        case ControlMode::pv:
            rd.allow_only(c, path, {"id", "bus", "mode", "i_max", "p_disp", "u_ref_pv"});
            v.p_disp = rd.number(c, path, "p_disp").value_or(0.0);
            v.u_ref_pv = rd.number(c, path, "u_ref_pv").value_or(0.0);
            break;
        case ControlMode::gf:
            rd.allow_only(c, path, {"id", "bus", "mode", "i_max", "u_ref_gf", "k_omega", "p0"});
            v.u_ref_gf = rd.number(c, path, "u_ref_gf").value_or(0.0);
            v.k_omega = rd.number(c, path, "k_omega").value_or(0.0);
            v.p0 = rd.number(c, path, "p0").value_or(0.0);
            break;
        }
        m.converters.push_back(v);
    }
}

void read_sources(Reader& rd, const json& doc, Model& m)
{
    const json* list = rd.array(doc, "$", "sources", false);
    if (!list) {
        return;
    }
    for (std::size_t i = 0; i < list->size(); ++i) {
        const json& s = (*list)[i];
        const std::string path = item_path("sources", i);
        NonPeSpec e;
        e.id = rd.string(s, path, "id").value_or("");
        e.bus = rd.string(s, path, "bus").value_or("");
        const auto kind_text = rd.string(s, path, "kind");
        const auto kind = kind_text ? parse_source_kind(*kind_text) : std::nullopt;
        if (kind_text && !kind) {
            rd.error(path + ".kind", "expected 'thevenin', 'slack', 'pq_node' or 'pv_node'");
            continue;
        }
        if (!kind) {
            continue;
        }
        e.kind = *kind;
        switch (e.kind) {
        case SourceKind::thevenin:
            rd.allow_only(s, path, {"id", "bus", "kind", "u_th", "z_th", "droop"});
            e.u_source = rd.complex(s, path, "u_th").value_or(Complex<double>{});
            e.z_th = rd.complex(s, path, "z_th").value_or(Complex<double>{});
            if (const json* d = rd.field(s, path, "droop", false)) {
                rd.allow_only(*d, path + ".droop", {"k_omega_th", "p0_th"});
                FrequencyDroop droop;
                droop.k_omega_th = rd.number(*d, path + ".droop", "k_omega_th").value_or(0.0);
                droop.p0_th = rd.number(*d, path + ".droop", "p0_th").value_or(0.0);
                e.droop = droop;
            }
            break;
        case SourceKind::slack:
            rd.allow_only(s, path, {"id", "bus", "kind", "u_ref"});
            e.u_source = rd.complex(s, path, "u_ref").value_or(Complex<double>{});
            break;
        case SourceKind::pq_node:
            rd.allow_only(s, path, {"id", "bus", "kind", "p_ref", "q_ref"});
            e.p_ref = rd.number(s, path, "p_ref").value_or(0.0);
            e.q_ref = rd.number(s, path, "q_ref").value_or(0.0);
            break;
        case SourceKind::pv_node:
            rd.allow_only(s, path, {"id", "bus", "kind", "p_ref", "u_ref"});
            e.p_ref = rd.number(s, path, "p_ref").value_or(0.0);
            e.u_ref = rd.number(s, path, "u_ref").value_or(0.0);
            break;
        }
        m.sources.push_back(e);
    }
}

void read_solver(Reader& rd, const json& doc, SolveOptions<double>& opts)
{
    const json* s = rd.field(doc, "$", "solver", false);
    if (!s) {
        return;
    }
    const std::string path = "$.solver";
    rd.allow_only(*s, path, {"tol_residual", "max_iters", "lambda0", "lambda_up", "lambda_down", "fd_step"});
    const auto positive = [&](const char* key, double& target) {
        if (auto v = rd.number(*s, path, key, false)) {
            if (!(*v > 0.0)) {
                rd.error(path + "." + key, "must be positive");
            }
            target = *v;
        }
    };
    positive("tol_residual", opts.tol_residual);
    positive("lambda0", opts.lambda0);
    positive("lambda_up", opts.lambda_up);
    positive("lambda_down", opts.lambda_down);
    positive("fd_step", opts.fd_step);
    if (auto v = rd.number(*s, path, "max_iters", false)) {
        if (*v < 1.0) {
            rd.error(path + ".max_iters", "must be positive");
        }
        opts.max_iters = static_cast<int>(*v);
    }
}

FaultSpec read_fault(Reader& rd, const json& f, const std::string& path)
{
    rd.allow_only(f, path, {"bus", "kind", "z_ft"});
    FaultSpec spec;
    const auto kind_text = rd.string(f, path, "kind");
    if (kind_text) {
        if (auto k = parse_fault_kind(*kind_text)) {
            spec.kind = *k;
        } else {
            rd.error(path + ".kind", "expected '3P2G', 'P2P', '1P2G' or 'none'");
        }
    }
    if (spec.kind != FaultKind::none) {
        spec.bus = rd.string(f, path, "bus").value_or("");
        spec.z_ft = rd.complex(f, path, "z_ft").value_or(Complex<double>{});
        if (spec.z_ft == Complex<double>(0.0, 0.0) && rd.ok()) {
            rd.error(path + ".z_ft", "fault impedance must be nonzero");
        }
    }
    return spec;
}

} // namespace

InputError::InputError(std::vector<std::string> diagnostics)
    : std::runtime_error(join_lines(diagnostics)), diagnostics_(std::move(diagnostics))
{
}

std::filesystem::path data_directory()
{
    if (const char* env = std::getenv("SCC_DATA_DIR")) {
        return env;
    }
    return SCC_DATA_DIR;
}

std::filesystem::path resolve_case_path(std::string_view name_or_path)
{
    const std::filesystem::path direct(name_or_path);
    if (std::filesystem::exists(direct)) {
        return direct;
    }
    const std::filesystem::path bundled = data_directory() / (std::string(name_or_path) + ".json");
    if (std::filesystem::exists(bundled)) {
        return bundled;
    }
    throw InputError({"case '" + std::string(name_or_path) + "' is neither a file nor a bundled fixture in '" +
                      data_directory().string() + "'"});
}

CaseFile parse_case(std::string_view text, std::string_view source, const std::filesystem::path& base_dir)
{
    const json doc = parse_json(text, source);
    Reader rd{std::string(source)};
    rd.allow_only(doc, "$",
                  {"name", "base", "omega0", "circuit_file", "buses", "branches", "converters", "sources", "solver"});

    CaseFile cf;
    cf.model.name = rd.string(doc, "$", "name").value_or("");
    if (const json* base = rd.field(doc, "$", "base", false)) {
        rd.allow_only(*base, "$.base", {"note"});
        cf.base_note = rd.string(*base, "$.base", "note", false).value_or("");
    }
    cf.model.omega0 = rd.number(doc, "$", "omega0").value_or(1.0);

    if (const auto circuit = rd.string(doc, "$", "circuit_file", false)) {
        if (doc.contains("buses") || doc.contains("branches")) {
            rd.error("$.circuit_file", "give either circuit_file or inline buses/branches, not both");
        }
        const std::filesystem::path cpath = base_dir / *circuit;
        if (!std::filesystem::exists(cpath)) {
            rd.error("$.circuit_file", "circuit data file '" + cpath.string() +
                                           "' not found; supply the network topology as a separate file");
        } else {
            const std::string ctext = read_file(cpath);
            const json cdoc = parse_json(ctext, cpath.string());
            Reader crd{cpath.string()};
            crd.allow_only(cdoc, "$", {"buses", "branches"});
            read_buses(crd, cdoc, "$", cf.model);
            read_branches(crd, cdoc, "$", cf.model);
            crd.finish();
        }
    } else {
        read_buses(rd, doc, "$", cf.model);
        read_branches(rd, doc, "$", cf.model);
    }
    read_converters(rd, doc, cf.model);
    read_sources(rd, doc, cf.model);
    read_solver(rd, doc, cf.solver);
    if (rd.ok()) {
        rd.absorb(model_problems(cf.model));
    }
    rd.finish();
    return cf;
}

CaseFile load_case(std::string_view name_or_path)
{
    const std::filesystem::path path = resolve_case_path(name_or_path);
    return parse_case(read_file(path), path.string(), path.parent_path());
}

ScenarioFile parse_scenario(std::string_view text, const Model& model, std::string_view source)
{
    const json doc = parse_json(text, source);
    Reader rd{std::string(source)};
    rd.allow_only(doc, "$", {"fault", "faults", "x0", "n_t_max", "mode", "i_d0_policy"});

    ScenarioFile sc;
    if (const json* f = rd.field(doc, "$", "fault", false)) {
        sc.faults.push_back(read_fault(rd, *f, "$.fault"));
    }
    if (const json* list = rd.array(doc, "$", "faults", false)) {
        for (std::size_t i = 0; i < list->size(); ++i) {
            sc.faults.push_back(read_fault(rd, (*list)[i], item_path("faults", i)));
        }
    }
    if (sc.faults.empty()) {
        rd.error("$.faults", "missing required field (give 'fault' or a non-empty 'faults' list)");
    }
    for (std::size_t i = 0; i < sc.faults.size(); ++i) {
        const FaultSpec& f = sc.faults[i];
        if (f.kind != FaultKind::none && !f.bus.empty() &&
            std::none_of(model.buses.begin(), model.buses.end(), [&](const Bus& b) { return b.id == f.bus; })) {
            rd.error(item_path("faults", i) + ".bus", "unknown bus '" + f.bus + "'");
        }
    }

    if (const json* x0 = rd.array(doc, "$", "x0", false)) {
        StateVector states;
        for (std::size_t i = 0; i < x0->size(); ++i) {
            const json& s = (*x0)[i];
            const auto st = s.is_string() ? parse_sat_state(s.get<std::string>()) : std::nullopt;
            if (!st) {
                rd.error(item_path("x0", i), "expected 'USS', 'PSS' or 'FSS'");
                continue;
            }
            if (i < model.converters.size() && !is_admissible(model.converters[i].mode, *st)) {
                rd.error(item_path("x0", i), std::string(to_string(*st)) + " is not admissible for converter '" +
                                                 model.converters[i].id + "'");
            }
            states.push_back(*st);
        }
        if (x0->size() != model.converters.size()) {
            rd.error("$.x0", "expected " + std::to_string(model.converters.size()) + " states");
        }
        sc.x0 = states;
    }
    if (auto n = rd.number(doc, "$", "n_t_max", false)) {
        if (*n < 1.0) {
            rd.error("$.n_t_max", "must be at least 1");
        }
        sc.n_t_max = static_cast<int>(*n);
    }
    if (auto mode = rd.string(doc, "$", "mode", false)) {
        if (*mode == "iterative") {
            sc.mode = StudyMode::iterative;
        } else if (*mode == "exhaustive") {
            sc.mode = StudyMode::exhaustive;
        } else if (*mode == "both") {
            sc.mode = StudyMode::both;
        } else {
            rd.error("$.mode", "expected 'iterative', 'exhaustive' or 'both'");
        }
    }
    if (auto policy = rd.string(doc, "$", "i_d0_policy", false)) {
        if (*policy == "given") {
            sc.i_d0_policy = IdPolicy::given;
        } else if (*policy == "prefault-solve") {
            sc.i_d0_policy = IdPolicy::prefault_solve;
        } else {
            rd.error("$.i_d0_policy", "expected 'given' or 'prefault-solve'");
        }
    }
    rd.finish();
    return sc;
}

ScenarioFile load_scenario(const std::filesystem::path& path, const Model& model)
{
    return parse_scenario(read_file(path), model, path.string());
}

std::optional<Complex<double>> parse_complex(std::string_view text)
{
    std::string s;
    for (char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) {
            s += c;
        }
    }
    if (s.empty()) {
        return std::nullopt;
    }
    const auto parse_real = [](const std::string& t, double& out) {
        if (t.empty()) {
            return false;
        }
        char* end = nullptr;
        out = std::strtod(t.c_str(), &end);
        return end == t.c_str() + t.size();
    };
    if (const auto comma = s.find(','); comma != std::string::npos) {
        double re = 0.0, im = 0.0;
        if (parse_real(s.substr(0, comma), re) && parse_real(s.substr(comma + 1), im)) {
            return Complex<double>(re, im);
        }
        return std::nullopt;
    }
    if (s.find_first_of("ji") == std::string::npos) {
        double re = 0.0;
        return parse_real(s, re) ? std::optional<Complex<double>>(Complex<double>(re, 0.0)) : std::nullopt;
    }
    if (s.back() == 'j' || s.back() == 'i') {
        s.pop_back();
    }
    // Leading-j form: "j0.1", "-j0.1", "0.01+j0.1".
    std::string imag_part;
    std::string real_part;
    std::size_t split = std::string::npos;
    for (std::size_t i = s.size(); i-- > 1;) {
        if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
            split = i;
            break;
        }
    }
    if (split == std::string::npos) {
        imag_part = s;
    } else {
        real_part = s.substr(0, split);
        imag_part = s.substr(split);
    }
    const auto strip_j = [](std::string& t) {
        const auto pos = t.find_first_of("ji");
        if (pos != std::string::npos) {
            t.erase(pos, 1);
        }
    };
    strip_j(imag_part);
    if (imag_part.empty() || imag_part == "+" || imag_part == "-") {
        imag_part += "1";
    }
    double re = 0.0, im = 0.0;
    if (!real_part.empty() && !parse_real(real_part, re)) {
        return std::nullopt;
    }
    if (!parse_real(imag_part, im)) {
        return std::nullopt;
    }
    return Complex<double>(re, im);
}

} // namespace scc
