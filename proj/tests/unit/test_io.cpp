// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <fstream>

using namespace emcm;
using Catch::Matchers::ContainsSubstring;

namespace {

ErrorCode code_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an emcm::Error");
    return ErrorCode::Io;
}

bool same_bits(double a, double b)
{
    return std::memcmp(&a, &b, sizeof a) == 0;
}

PoleResidueModel random_model(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    PoleResidueModel m;
    m.ports = 1 + rng() % 4;
    m.eta0 = 300.0 + 100.0 * u(rng);
    m.band = make_band(1e9 * (1.0 + std::abs(u(rng))), 3.1e9 + 1e8 * u(rng));
    const std::size_t n = rng() % 9;
    for (std::size_t i = 0; i < n; ++i) {
        PoleResidueTerm t;
        t.k = i == 0 ? 0.0 : 100.0 * std::abs(u(rng)) + i;
        t.c = RealVector(static_cast<Eigen::Index>(m.ports));
        for (auto& v : t.c)
            v = u(rng) * std::pow(10.0, 6.0 * u(rng));
        t.inband = rng() % 2 == 0;
        m.terms.push_back(t);
    }
    return m;
}

SParameterSweep random_sweep(std::mt19937_64& rng, std::size_t ports, std::size_t points)
{
    std::normal_distribution<double> g;
    SParameterSweep s;
    s.z_ref = 50.0;
    const auto p = static_cast<Eigen::Index>(ports);
    for (std::size_t i = 0; i < points; ++i) {
        s.frequencies_hz.push_back(1e9 + 1.234567891e6 * double(i));
        ComplexMatrix m(p, p);
        for (Eigen::Index r = 0; r < p; ++r)
            for (Eigen::Index c = 0; c <= r; ++c)
                m(r, c) = m(c, r) = Complex(g(rng), g(rng)) * std::pow(10.0, g(rng));
        s.matrices.push_back(m);
    }
    return s;
}

} // namespace

TEST_CASE("number formatting", "[io]")
{
    CHECK(format_number(0.0) == "0");
    CHECK(format_number(1.5) == "1.5");
    CHECK(format_number(1.0 / 3.0) == "0.333333333333333");
}

TEST_CASE("model files round trip bit for bit", "[io]")
{
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = random_model(rng);
        const auto back = parse_model(serialize_model(m));
        REQUIRE(back.ports == m.ports);
        CHECK(same_bits(back.eta0, m.eta0));
        REQUIRE(back.band.has_value());
        CHECK(same_bits(back.band->f1_hz(), m.band->f1_hz()));
        CHECK(same_bits(back.band->f2_hz(), m.band->f2_hz()));
        REQUIRE(back.terms.size() == m.terms.size());
        for (std::size_t i = 0; i < m.terms.size(); ++i) {
            CHECK(same_bits(back.terms[i].k, m.terms[i].k));
            CHECK(back.terms[i].inband == m.terms[i].inband);
            for (Eigen::Index j = 0; j < m.terms[i].c.size(); ++j)
                CHECK(same_bits(back.terms[i].c(j), m.terms[i].c(j)));
        }
        CHECK(serialize_model(back) == serialize_model(m));
    }
}

TEST_CASE("malformed model files name the field", "[io]")
{
    const std::string good = R"({"format":"emcm-model","version":1,"ports":2,"eta0":376.73,
        "terms":[{"k":1.0,"c":[0.5,0.25],"inband":false}]})";
    CHECK_NOTHROW(parse_model(good));

    const std::string no_ports = R"({"format":"emcm-model","version":1,"eta0":376.73,"terms":[]})";
    CHECK_THROWS_WITH(parse_model(no_ports), ContainsSubstring("ports"));
    CHECK(code_of([&] { parse_model(no_ports); }) == ErrorCode::Parse);

    const std::string short_c = R"({"format":"emcm-model","version":1,"ports":2,"eta0":376.73,
        "terms":[{"k":1.0,"c":[0.5],"inband":false}]})";
    CHECK_THROWS_WITH(parse_model(short_c), ContainsSubstring("terms[0].c"));
    CHECK(code_of([&] { parse_model("{not json"); }) == ErrorCode::Parse);
}

TEST_CASE("published coupling matrices parse", "[io]")
{
    const auto prototype = read_matrix_file(test::fixture("dualmode_prototype.cm"));
    CHECK(prototype.ports == 2);
    CHECK(prototype.order == 8);
    CHECK(prototype.matrix(2, 3) == 0.8058);
    REQUIRE(prototype.band.has_value());
    CHECK(prototype.band->f1_hz() == 12.21e9);

    const auto diplexer = read_matrix_file(test::fixture("diplexer_em.cm"));
    CHECK(diplexer.ports == 3);
    CHECK(diplexer.order == 11);
    CHECK(diplexer.matrix.rows() == 14);
    CHECK(test::max_abs(diplexer.matrix.topLeftCorner(3, 3)) == 0.0);

    for (const char* name : {"dualmode_prototype.cm", "dualmode_em.cm", "inline_prototype.cm", "inline_em.cm", "inline_em_iris.cm", "diplexer_em.cm", "diplexer_em_screws.cm",
                             "dualband_em.cm", "dualband_em_screws.cm"}) {
        const auto doc = read_matrix_file(test::fixture(name));
        const auto again = parse_matrix(serialize_matrix(doc));
        CHECK(again.matrix == doc.matrix);
        CHECK(again.ports == doc.ports);
        CHECK(again.band == doc.band);
        CHECK_NOTHROW(doc.classical());
    }
}

TEST_CASE("malformed coupling matrices", "[io]")
{
    CHECK(code_of([] { parse_matrix("ports 1\norder 1\n0 1\n1 0 3\n"); }) == ErrorCode::DimensionMismatch);
    CHECK(code_of([] { parse_matrix("ports 1\norder 1\n0 1\n"); }) == ErrorCode::DimensionMismatch);
    CHECK(code_of([] { parse_matrix("ports 1\norder 1\n0 1\n2 0\n"); }) == ErrorCode::Parse);
    CHECK(code_of([] { parse_matrix("order 1\n0 1\n1 0\n"); }) == ErrorCode::Parse);
    CHECK_THROWS_WITH(parse_matrix("ports 1\norder 1\n0 x\n1 0\n"), ContainsSubstring("line 3"));
    CHECK(code_of([] { parse_matrix("ports 1\norder 1\n0 1\n1 0\n").classical(); }) == ErrorCode::Validation);
    const auto doc = parse_matrix("# comment\nports 1\norder 1\nband 1e9 2e9\n0 1\n1 0.5\n");
    CHECK(doc.comments.size() == 1);
    CHECK(doc.classical().M(0, 0) == 0.5);
}

TEST_CASE("mask files accept only 0 and 1", "[io]")
{
    const auto dir = test::scratch_dir("io_mask");
    write_text_file(dir / "ok.mask", "ports 1\norder 2\n0 1 0\n1 1 1\n0 1 1\n");
    const auto mask = read_mask_file(dir / "ok.mask");
    CHECK(mask.allowed()(1, 2));
    CHECK_FALSE(mask.allowed()(0, 2));
    write_text_file(dir / "bad.mask", "ports 1\norder 2\n0 1 0\n1 1 0.5\n0 0.5 1\n");
    CHECK(code_of([&] { read_mask_file(dir / "bad.mask"); }) == ErrorCode::Parse);
}

TEST_CASE("affine and zero files round trip", "[io]")
{
    AffineOutOfBand oob{ComplexMatrix::Random(2, 2), ComplexMatrix::Random(2, 2)};
    oob.Z0 = (oob.Z0 + oob.Z0.transpose()).eval();
    const auto back = parse_affine(serialize_affine(oob));
    CHECK(back.Z0 == oob.Z0);
    CHECK(back.Z1 == oob.Z1);

    const auto ccm = test::load_fixture("dualmode_prototype.cm");
    const auto zeros = find_zeros(ccm);
    const auto parsed = parse_zeros(serialize_zeros(zeros, ccm.band));
    CHECK(parsed.transmission_zeros == zeros.transmission_zeros);
    CHECK(parsed.reflection_zeros == zeros.reflection_zeros);
    CHECK(parsed.prototype_poles == zeros.prototype_poles);
    CHECK_THAT(serialize_zeros(zeros, ccm.band), ContainsSubstring("f_hz"));
}

TEST_CASE("touchstone export", "[io]")
{
    SParameterSweep s;
    s.z_ref = 50.0;
    s.frequencies_hz = {1e9};
    s.matrices = {ComplexMatrix::Zero(2, 2)};
    const auto text = touchstone_text(s);
    CHECK_THAT(text, ContainsSubstring("# Hz S RI R 50"));
    std::istringstream in(text);
    std::string line;
    std::string data;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '!' && line[0] != '#')
            data = line;
    std::istringstream fields(data);
    std::vector<std::string> tok{std::istream_iterator<std::string>(fields), {}};
    REQUIRE(tok.size() == 9);
    CHECK(tok[0] == "1000000000");
    for (std::size_t i = 1; i < 9; ++i)
        CHECK(tok[i] == "0");

    s.matrices[0](1, 0) = s.matrices[0](0, 1) = Complex(0.25, -0.5);
    s.matrices[0](0, 0) = Complex(0.125, 0.0);
    const auto parsed = parse_touchstone(touchstone_text(s), 2);
    CHECK(parsed.sweep.matrices[0] == s.matrices[0]);
    CHECK(parsed.sweep.z_ref == 50.0);
}

TEST_CASE("touchstone import of larger networks and other formats", "[io]")
{
    std::mt19937_64 rng(6);
    const auto s = random_sweep(rng, 4, 7);
    const auto back = parse_touchstone(touchstone_text(s), 4);
    REQUIRE(back.sweep.matrices.size() == 7);
    for (std::size_t i = 0; i < 7; ++i)
        CHECK(relative_difference(back.sweep.matrices[i], s.matrices[i]) < 1e-14);

    const std::string ma = "# GHz S MA R 50\n1.0 0.5 90 0.1 0 0.1 0 0.5 -90\n";
    const auto p = parse_touchstone(ma, 2);
    CHECK(p.sweep.frequencies_hz[0] == 1e9);
    CHECK(std::abs(p.sweep.matrices[0](0, 0) - Complex(0.0, 0.5)) < 1e-15);
    const std::string db = "# MHz S DB R 50\n100 -20 0\n";
    CHECK(std::abs(parse_touchstone(db, 1).sweep.matrices[0](0, 0) - 0.1) < 1e-15);
}

TEST_CASE("CSV export round trips to 15 digits", "[io]")
{
    std::mt19937_64 rng(9);
    for (std::size_t ports : {1u, 2u, 3u, 11u}) {
        const auto s = random_sweep(rng, ports, 5);
        const auto back = parse_csv(csv_text(s));
        REQUIRE(back.sweep.matrices.size() == 5);
        for (std::size_t i = 0; i < 5; ++i) {
            CHECK(std::abs(back.sweep.frequencies_hz[i] - s.frequencies_hz[i]) <= 1e-14 * s.frequencies_hz[i]);
            for (Eigen::Index j = 0; j < s.matrices[i].size(); ++j) {
                const Complex a = back.sweep.matrices[i].data()[j];
                const Complex b = s.matrices[i].data()[j];
                CHECK(std::abs(a.real() - b.real()) <= 1e-14 * std::abs(b.real()));
                CHECK(std::abs(a.imag() - b.imag()) <= 1e-14 * std::abs(b.imag()));
            }
        }
    }
    CHECK_THAT(csv_text(random_sweep(rng, 2, 1)), ContainsSubstring("freq_hz,S11_re,S11_im,S12_re"));
    CHECK_THAT(csv_text(random_sweep(rng, 10, 1)), ContainsSubstring("S10_10_im"));
}

TEST_CASE("empty sweeps are not written", "[io]")
{
    const auto dir = test::scratch_dir("io_empty");
    const auto path = dir / "empty.s2p";
    std::filesystem::remove(path);
    SParameterSweep s;
    CHECK_THROWS_AS(export_touchstone(s, path), Error);
    CHECK_FALSE(std::filesystem::exists(path));
    CHECK_THROWS_AS(export_csv(s, dir / "empty.csv"), Error);
    CHECK_FALSE(std::filesystem::exists(dir / "empty.csv"));
}

TEST_CASE("sample files are converted to impedance", "[io]")
{
    std::mt19937_64 rng(19);
    const auto model = test::random_inband_model(rng, 2, 4, make_band(1e9, 1.2e9));
    const auto grid = linear_grid(0.95e9, 1.25e9, 9);
    const auto dir = test::scratch_dir("io_samples");
    export_touchstone(sweep_model(model, grid, 50.0), dir / "m.s2p");
    export_csv(sweep_model_impedance(model, grid), dir / "z.csv", NetworkParameter::Z);
    export_csv(sweep_model(model, grid, 75.0), dir / "s.csv");
    const auto a = read_samples(dir / "m.s2p");
    const auto b = read_samples(dir / "z.csv");
    const auto c = read_samples(dir / "s.csv", 75.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto z = eval_impedance(model, wavenumber_from_hz(grid[i]));
        CHECK(relative_difference(a.Z[i], z) < 1e-10);
        CHECK(relative_difference(b.Z[i], z) < 1e-13);
        CHECK(relative_difference(c.Z[i], z) < 1e-10);
    }
    CHECK(code_of([&] { read_samples(dir / "missing.csv"); }) == ErrorCode::Io);
}
