#include "support/reference.hpp"

#include <doctest.h>

using namespace scc;
using scc::testing::cd;

TEST_CASE("series branch stamps every sequence")
{
    const std::vector<Bus> buses{{"a", Wiring::four_wire}, {"b", Wiring::four_wire}};
    const std::vector<Branch> branches{{"ab", "a", "b", cd(0.1, 0.2), cd(0.1, 0.2), cd(0.3, 0.6)}};
    const auto y = assemble<double>(buses, branches);
    const cd y1 = 1.0 / cd(0.1, 0.2);
    const cd y0 = 1.0 / cd(0.3, 0.6);
    CHECK(std::abs(y(Sequence::pos, 0, Sequence::pos, 0) - y1) < 1e-14);
    CHECK(std::abs(y(Sequence::neg, 0, Sequence::neg, 1) + y1) < 1e-14);
    CHECK(std::abs(y(Sequence::zero, 1, Sequence::zero, 1) - y0) < 1e-14);
    CHECK(std::abs(y(Sequence::pos, 0, Sequence::neg, 0)) == 0.0);
}

TEST_CASE("open zero sequence and three-wire buses block the zero-sequence path")
{
    const std::vector<Bus> buses{{"a", Wiring::four_wire}, {"b", Wiring::three_wire}};
    const std::vector<Branch> branches{
        {"ab", "a", "b", cd(0.1, 0.2), cd(0.1, 0.2), cd(0.3, 0.6)},
        {"la", "a", std::string(ground_id), cd(2.0, 0.5), cd(2.0, 0.5), std::nullopt},
    };
    const auto y = assemble<double>(buses, branches);
    CHECK(y.block(Sequence::zero, Sequence::zero).cwiseAbs().maxCoeff() == 0.0);
    CHECK(std::abs(y(Sequence::pos, 0, Sequence::pos, 0) - (1.0 / cd(0.1, 0.2) + 1.0 / cd(2.0, 0.5))) < 1e-14);
}

TEST_CASE("fault stamps match the sequence image of the phase admittance")
{
    const cd z(0.0, 0.1);
    for (FaultKind k : {FaultKind::three_phase_ground, FaultKind::phase_phase, FaultKind::single_phase_ground}) {
        const Matrix3c<double> lib = fault_stamp<double>(k, z);
        const Eigen::Matrix3cd ref = scc::testing::ref_sequence_image(scc::testing::ref_fault_phase(k, z));
        CHECK((lib - ref).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("fault stamp sequence structure")
{
    const cd z(0.0, 0.1);
    const cd yf = 1.0 / z;

    const Matrix3c<double> s3 = fault_stamp<double>(FaultKind::three_phase_ground, z);
    CHECK((s3 - yf * Matrix3c<double>::Identity()).cwiseAbs().maxCoeff() < 1e-12);

    const Matrix3c<double> s1 = fault_stamp<double>(FaultKind::single_phase_ground, z);
    CHECK((s1 - Matrix3c<double>::Constant(yf / 3.0)).cwiseAbs().maxCoeff() < 1e-12);

    const Matrix3c<double> sp = fault_stamp<double>(FaultKind::phase_phase, z);
    CHECK(sp.row(2).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(sp.col(2).cwiseAbs().maxCoeff() < 1e-12);
    // Phase b is healthy, so a voltage on phase b alone draws no current.
    const Eigen::Vector3cd only_b =
        phase_to_sequence_matrix<double>() * Eigen::Vector3cd(0.0, 1.0, 0.0);
    CHECK((sequence_to_phase_matrix<double>() * (sp * only_b)).cwiseAbs().maxCoeff() < 1e-12);

    CHECK(fault_stamp<double>(FaultKind::none, z).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("apply_fault adds the block at the faulted bus only")
{
    const std::vector<Bus> buses{{"1", Wiring::four_wire}, {"2", Wiring::four_wire}};
    const std::vector<Branch> branches{{"12", "1", "2", cd(0.1, 0.2), cd(0.1, 0.2), cd(0.3, 0.6)}};
    auto y = assemble<double>(buses, branches);
    const auto before = y.matrix();
    apply_fault(y, buses, FaultSpec{"2", FaultKind::single_phase_ground, cd(0.0, 0.05)});
    const auto diff = (y.matrix() - before).eval();
    CHECK(std::abs(diff(y.index(Sequence::pos, 1), y.index(Sequence::zero, 1)) - 1.0 / cd(0.0, 0.15)) < 1e-12);
    CHECK(std::abs(diff(y.index(Sequence::pos, 0), y.index(Sequence::pos, 0))) == 0.0);
}

TEST_CASE("network input errors")
{
    const std::vector<Bus> buses{{"1", Wiring::four_wire}};
    CHECK_THROWS_AS(bus_index(buses, "9"), NetworkError);
    const std::vector<Branch> loop{{"11", "1", "1", cd(0.1, 0.1), cd(0.1, 0.1), std::nullopt}};
    CHECK_THROWS_AS(assemble<double>(buses, loop), NetworkError);
    const std::vector<Bus> dup{{"1", Wiring::four_wire}, {"1", Wiring::four_wire}};
    CHECK_THROWS_AS(validate_buses(dup), NetworkError);
}

TEST_CASE("fault kind names")
{
    CHECK(parse_fault_kind("3p2g") == FaultKind::three_phase_ground);
    CHECK(parse_fault_kind("P2P") == FaultKind::phase_phase);
    CHECK(parse_fault_kind("1P2G") == FaultKind::single_phase_ground);
    CHECK(parse_fault_kind("none") == FaultKind::none);
    CHECK_FALSE(parse_fault_kind("2P2G"));
    CHECK(to_string(FaultKind::phase_phase) == "P2P");
}

TEST_CASE("phase report scale is one over root three")
{
    CHECK(phase_report_scale<double>() * 0.549 == doctest::Approx(0.317).epsilon(0.002));
}
