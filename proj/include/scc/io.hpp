#pragma once

// Case and scenario ingestion, study orchestration and result emission.
//
// Case and scenario files are JSON documents (schema in README.md). Complex
// quantities are written as [re, im] pairs in per-unit.

#include "scc/saturation.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scc {

/// Input problem with one diagnostic line per finding.
class InputError : public std::runtime_error {
public:
    explicit InputError(std::vector<std::string> diagnostics);
    const std::vector<std::string>& diagnostics() const { return diagnostics_; }

private:
    std::vector<std::string> diagnostics_;
};

struct CaseFile {
    Model model;
    SolveOptions<double> solver;
    std::string base_note;
};

enum class StudyMode { iterative, exhaustive, both };
enum class IdPolicy { given, prefault_solve };

struct ScenarioFile {
    std::vector<FaultSpec> faults;
    std::optional<StateVector> x0;
    std::optional<int> n_t_max;
    StudyMode mode = StudyMode::iterative;
    IdPolicy i_d0_policy = IdPolicy::given;
};

/// A bundled fixture name (e.g. "test_system_1") or a filesystem path.
std::filesystem::path resolve_case_path(std::string_view name_or_path);
std::filesystem::path data_directory();

CaseFile parse_case(std::string_view text, std::string_view source = "<case>",
                    const std::filesystem::path& base_dir = {});
CaseFile load_case(std::string_view name_or_path);

ScenarioFile parse_scenario(std::string_view text, const Model& model, std::string_view source = "<scenario>");
ScenarioFile load_scenario(const std::filesystem::path& path, const Model& model);

/// Accepts "0+0.1j", "j0.1", "-0.2j", "0.01+0.1j", "1" and "re,im".
std::optional<Complex<double>> parse_complex(std::string_view text);

struct PolarValue {
    double mag = 0.0;
    double deg = 0.0;

    static PolarValue from(Complex<double> z) { return {std::abs(z), angle_deg(z)}; }
    bool operator==(const PolarValue&) const = default;
};

struct BusRecord {
    std::string id;
    std::array<PolarValue, 3> seq;    // +, -, 0
    std::array<PolarValue, 3> phase;  // a, b, c (raw)
    bool operator==(const BusRecord&) const = default;
};

struct ConverterRecord {
    std::string id;
    std::string mode;
    std::string state;
    double i_pos = 0.0;
    double p_con = 0.0, q_con = 0.0;
    double p_cos = 0.0, p_sin = 0.0, q_cos = 0.0, q_sin = 0.0;
    std::optional<double> i_d0;
    bool operator==(const ConverterRecord&) const = default;
};

struct SourceRecord {
    std::string id;
    std::string kind;
    PolarValue i_pos;
    double p_con = 0.0, q_con = 0.0;
    bool operator==(const SourceRecord&) const = default;
};

struct PointRecord {
    std::size_t f = 0;
    std::vector<std::string> states;
    double omega = 1.0;
    double residual_norm = 0.0;
    std::vector<BusRecord> buses;
    std::vector<ConverterRecord> converters;
    std::vector<SourceRecord> sources;
    bool operator==(const PointRecord&) const = default;
};

struct TraceRecord {
    int n_t = 0;
    std::size_t f = 0;
    std::vector<std::string> states;
    bool converged = false;
    double residual_norm = 0.0;
    int solver_iters = 0;
    std::vector<std::string> next_states;
    bool fallback = false;
    bool operator==(const TraceRecord&) const = default;
};

struct FaultRecord {
    std::string bus;
    std::string kind;
    double z_re = 0.0, z_im = 0.0;
    bool operator==(const FaultRecord&) const = default;
};

struct ResultRecord {
    std::string case_name;
    std::string study;   // iterative | exhaustive | prefault
    FaultRecord fault;
    std::string status;  // equilibrium | no_equilibrium
    std::size_t combinations = 0;
    std::optional<int> n_t;
    std::optional<int> n_t_max;
    std::optional<std::string> termination;
    std::optional<PointRecord> equilibrium;
    std::vector<PointRecord> equilibria;
    std::vector<TraceRecord> trace;
    std::optional<double> wall_time_s;
    bool operator==(const ResultRecord&) const = default;

    bool found() const { return status == "equilibrium"; }
};

PointRecord make_point_record(const Model& model, const EquilibriumPoint& ep);
ResultRecord make_iterative_record(const Model& model, const FaultSpec& fault, const AlgorithmResult& result);
ResultRecord make_oracle_record(const Model& model, const FaultSpec& fault, const OracleResult& result);

/// Structured records document (JSON), full double precision.
std::string emit_records(std::span<const ResultRecord> records);
std::vector<ResultRecord> load_records(std::string_view text);

/// Human-readable table: magnitude/angle with 3 decimals and 0.1 degree,
/// phase voltages raw and scaled by 1/sqrt(3).
std::string emit_table(const ResultRecord& record);

enum class OutputFormat { table, records };
std::string emit_results(std::span<const ResultRecord> records, OutputFormat format);

/// Solves the fault-free case from all-USS and sets i_d0 = q_con / u+ on
/// every PQ converter. Returns the pre-fault study record.
ResultRecord apply_prefault_i_d0(Model& model, const AlgorithmOptions& options);

/// Checks that each PQ converter has i_d0 when a fault study needs it.
void require_i_d0(const Model& model);

} // namespace scc
