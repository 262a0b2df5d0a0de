#include "support/reference.hpp"

#include <scc/io.hpp>

#include <doctest.h>

#include <algorithm>
#include <fstream>

using namespace scc;
using scc::testing::cd;

namespace {

const char* ts1_text = R"({
  "name": "ts1",
  "omega0": 1.0,
  "buses": [{"id": "1"}],
  "converters": [{"id": "VSC1", "bus": "1", "mode": "PQ", "i_max": 1.0,
                  "p_disp": 0.7, "q_disp": 0.5, "k_isp": 2.0, "i_d0": 0.5}],
  "sources": [{"id": "grid", "bus": "1", "kind": "thevenin", "u_th": [1.0, 0.0], "z_th": "0.01+0.1j"}]
})";

std::vector<std::string> diagnostics_of(std::string_view text)
{
    try {
        parse_case(text, "case.json");
    } catch (const InputError& e) {
        return e.diagnostics();
    }
    return {};
}

bool has(const std::vector<std::string>& lines, std::string_view text)
{
    return std::any_of(lines.begin(), lines.end(),
                       [&](const std::string& l) { return l.find(text) != std::string::npos; });
}

} // namespace

TEST_CASE("complex literals")
{
    CHECK(parse_complex("j0.1") == cd(0.0, 0.1));
    CHECK(parse_complex("0+0.1j") == cd(0.0, 0.1));
    CHECK(parse_complex("-0.2j") == cd(0.0, -0.2));
    CHECK(parse_complex("0.01+0.1j") == cd(0.01, 0.1));
    CHECK(parse_complex("0.01-0.1j") == cd(0.01, -0.1));
    CHECK(parse_complex("1") == cd(1.0, 0.0));
    CHECK(parse_complex("0.3,-0.4") == cd(0.3, -0.4));
    CHECK(parse_complex("-j0.1") == cd(0.0, -0.1));
    CHECK(parse_complex("0.01+j0.1") == cd(0.01, 0.1));
    CHECK_FALSE(parse_complex("abc"));
    CHECK_FALSE(parse_complex(""));
}

TEST_CASE("inline case parses with defaults")
{
    const CaseFile cf = parse_case(ts1_text);
    CHECK(cf.model.name == "ts1");
    CHECK(cf.model.buses.front().wiring == Wiring::four_wire);
    CHECK(cf.model.converters.front().u_ref_gs == 1.0);
    CHECK(cf.model.sources.front().z_th == cd(0.01, 0.1));
    CHECK(cf.solver.tol_residual == 1e-8);
    CHECK(cf.solver.max_iters == 200);
}

TEST_CASE("field diagnostics name the file and the path")
{
    std::string missing = ts1_text;
    missing.replace(missing.find("\"p_disp\": 0.7, "), 15, "");
    CHECK(has(diagnostics_of(missing), "case.json: converters[0].p_disp: missing required field"));

    std::string wrong_type = ts1_text;
    wrong_type.replace(wrong_type.find("\"i_max\": 1.0"), 12, "\"i_max\": \"big\"");
    CHECK(has(diagnostics_of(wrong_type), "converters[0].i_max: expected a number"));

    std::string extra = ts1_text;
    extra.replace(extra.find("\"name\""), 6, "\"colour\": 1, \"name\"");
    CHECK(has(diagnostics_of(extra), "$.colour: unknown field"));

    std::string bad_bus = ts1_text;
    bad_bus.replace(bad_bus.find("\"bus\": \"1\", \"mode\""), 10, "\"bus\": \"9\"");
    CHECK(has(diagnostics_of(bad_bus), "unknown bus '9'"));
}

TEST_CASE("syntax errors carry line and column")
{
    const auto d = diagnostics_of("{\n  \"name\": ,\n}");
    REQUIRE(d.size() == 1);
    CHECK(d.front().rfind("case.json:2:", 0) == 0);
}

TEST_CASE("scenario validation")
{
    const Model m = parse_case(ts1_text).model;
    const ScenarioFile ok = parse_scenario(
        R"({"faults": [{"bus": "1", "kind": "1P2G", "z_ft": "j0.1"}], "x0": ["FSS"], "mode": "both"})", m);
    REQUIRE(ok.faults.size() == 1);
    CHECK(ok.faults.front().kind == FaultKind::single_phase_ground);
    CHECK(ok.x0 == StateVector{SatState::fss});
    CHECK(ok.mode == StudyMode::both);

    CHECK_THROWS_AS(parse_scenario(R"({"fault": {"bus": "1", "kind": "3P2G", "z_ft": [0, 0]}})", m), InputError);
    CHECK_THROWS_AS(parse_scenario(R"({"fault": {"bus": "2", "kind": "3P2G", "z_ft": "j0.1"}})", m), InputError);
    CHECK_THROWS_AS(parse_scenario(R"({"fault": {"bus": "1", "kind": "3P2G", "z_ft": "j0.1"}, "x0": ["USS", "USS"]})",
                                   m),
                    InputError);
    CHECK_THROWS_AS(parse_scenario(R"({"fault": {"bus": "1", "kind": "2P2G", "z_ft": "j0.1"}})", m), InputError);
}

TEST_CASE("missing circuit data file is reported clearly")
{
    const auto d = diagnostics_of(R"({"circuit_file": "nowhere.json", "sources": []})");
    CHECK(has(d, "circuit data file"));
    CHECK(has(d, "nowhere.json"));
}

TEST_CASE("records round trip and are deterministic")
{
    const Model m = load_case("test_system_1").model;
    std::vector<ResultRecord> records;
    for (FaultKind kind : {FaultKind::three_phase_ground, FaultKind::phase_phase, FaultKind::single_phase_ground}) {
        const FaultSpec fault{"1", kind, cd(0.0, 0.1)};
        records.push_back(make_iterative_record(m, fault, run_algorithm(m, fault)));
    }
    records.push_back(make_oracle_record(m, FaultSpec{"1", FaultKind::phase_phase, cd(0.0, 0.1)},
                                         exhaustive_oracle(m, FaultSpec{"1", FaultKind::phase_phase, cd(0.0, 0.1)})));
    const std::string text = emit_records(records);
    CHECK(load_records(text) == records);
    CHECK(emit_records(load_records(text)) == text);

    const std::string table = emit_table(records.front());
    CHECK(table.find("0.317") != std::string::npos);
    CHECK(table.find("FSS") != std::string::npos);
}

TEST_CASE("prefault solve sets the frozen reactive current")
{
    Model m = load_case("substitute_4bus").model;
    CHECK_THROWS_AS(require_i_d0(m), InputError);
    const ResultRecord pre = apply_prefault_i_d0(m, {});
    CHECK(pre.found());
    CHECK(pre.study == "prefault");
    REQUIRE(m.converters[2].i_d0);
    CHECK(*m.converters[2].i_d0 > 0.0);
    CHECK_NOTHROW(require_i_d0(m));
}

TEST_CASE("bundled fixtures resolve by name")
{
    CHECK(std::filesystem::exists(resolve_case_path("test_system_1")));
    CHECK_THROWS(load_case("no_such_case"));
}
