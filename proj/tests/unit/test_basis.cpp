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

using namespace emcm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("identity transform leaves the coupling matrix unchanged", "[basis]")
{
    const auto ccm = test::load_fixture("dualmode_prototype.cm");
    const auto out = apply_basis(ccm, BasisTransform::identity(ccm.order()));
    CHECK(out.D == ccm.D);
    CHECK(out.M == ccm.M);
}

TEST_CASE("non-orthogonal transforms are rejected", "[basis]")
{
    std::mt19937_64 rng(2);
    RealMatrix q = test::random_orthogonal(5, rng);
    CHECK_NOTHROW(BasisTransform(q));
    q(1, 2) += 1e-9;
    try {
        BasisTransform t(q);
        FAIL("accepted a perturbed transform");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotOrthogonal);
    }
    CHECK_THROWS_AS(BasisTransform(RealMatrix::Identity(2, 3)), Error);
    const ClassicalCouplingMatrix ccm = test::load_fixture("dualmode_prototype.cm");
    CHECK_THROWS_AS(apply_basis(ccm, BasisTransform::identity(3)), Error);
}

TEST_CASE("orthogonal transforms preserve the response", "[basis]")
{
    std::mt19937_64 rng(4);
    const auto band = make_band(10e9, 10.5e9);
    const auto model = test::random_inband_model(rng, 2, 7, band);
    const auto em = em_coupling_from_inband(model.terms);
    for (int trial = 0; trial < 5; ++trial) {
        const BasisTransform q(test::random_orthogonal(7, rng));
        const auto rotated = apply_basis(em, q);
        double worst = 0.0;
        for (double f : linear_grid(9.9e9, 10.6e9, 101)) {
            const double k = wavenumber_from_hz(f);
            worst = std::max(worst, relative_difference(impedance_from_em(rotated, model.eta0, k),
                                                        impedance_from_em(em, model.eta0, k)));
        }
        CHECK(worst < 1e-11);
    }
}

TEST_CASE("transversal form of a diagonal matrix is a signed permutation", "[basis]")
{
    ClassicalCouplingMatrix ccm{RealMatrix(1, 3), RealMatrix::Zero(3, 3), make_band(1e9, 1.1e9)};
    ccm.D << 0.3, -0.5, 0.9;
    ccm.M.diagonal() << 0.7, -1.2, 0.1;
    const auto t = to_transversal(ccm);
    CHECK(t.matrix.M.diagonal().isApprox(RealVector((RealVector(3) << -1.2, 0.1, 0.7).finished()), 1e-15));
    const RealMatrix abs_q = t.transform.matrix().cwiseAbs();
    CHECK((abs_q.colwise().sum().array() - 1.0).abs().maxCoeff() < 1e-15);
    CHECK((abs_q.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-15);
    CHECK(std::abs(t.matrix.D(0, 0)) == 0.5);
}

TEST_CASE("transversal form recovers planted eigenvalues and the basis up to signs", "[basis]")
{
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index n = 3 + trial;
        RealVector planted(n);
        std::uniform_real_distribution<double> u(1.0, 5.0);
        for (auto& v : planted)
            v = u(rng);
        std::sort(planted.begin(), planted.end());
        const RealMatrix q = test::random_orthogonal(n, rng);
        EmCouplingMatrix em{RealMatrix::Random(2, n), q * planted.asDiagonal() * q.transpose()};
        em.K = 0.5 * (em.K + em.K.transpose()).eval();
        const auto t = to_transversal(em);
        for (Eigen::Index i = 0; i < n; ++i) {
            CHECK_THAT(t.matrix.K(i, i), WithinRel(planted(i), 1e-12));
            const double overlap = std::abs(t.transform.matrix().col(i).dot(q.col(i)));
            CHECK_THAT(overlap, WithinAbs(1.0, 1e-9));
        }
        const auto back = apply_basis(t.matrix, t.transform.transposed());
        CHECK(test::max_abs(back.K - em.K) < 1e-12 * test::max_abs(em.K));
        CHECK(test::max_abs(back.C - em.C) < 1e-12);
    }
}

TEST_CASE("sign gauge removes diagonal sign flips", "[basis]")
{
    const auto ccm = test::load_fixture("dualmode_prototype.cm");
    RealVector signs(ccm.order());
    for (Eigen::Index i = 0; i < signs.size(); ++i)
        signs(i) = (i % 3 == 1) ? -1.0 : 1.0;
    const ClassicalCouplingMatrix flipped{ccm.D * signs.asDiagonal(),
                                          signs.asDiagonal() * ccm.M * signs.asDiagonal(), ccm.band};
    const auto a = fix_sign_gauge(ccm);
    const auto b = fix_sign_gauge(flipped);
    CHECK(a.D == b.D);
    CHECK(a.M == b.M);
}

TEST_CASE("comparison of published perturbation pairs", "[basis]")
{
    const auto a = read_matrix_file(test::fixture("inline_em.cm")).matrix;
    const auto b = read_matrix_file(test::fixture("inline_em_iris.cm")).matrix;
    const auto report = compare_coupling(a, b, 4);
    REQUIRE(report.entries.size() == 4);
    auto find = [&](std::size_t r, std::size_t c) {
        for (const auto& e : report.entries)
            if (e.row == r && e.col == c)
                return e.delta;
        return -1.0;
    };
    CHECK_THAT(find(5, 5), WithinAbs(0.0156, 1e-4));
    CHECK_THAT(find(6, 6), WithinAbs(0.0175, 1e-4));
    CHECK_THAT(find(5, 6), WithinAbs(0.0110, 1e-4));

    const auto c = read_matrix_file(test::fixture("diplexer_em.cm")).matrix;
    const auto d = read_matrix_file(test::fixture("diplexer_em_screws.cm")).matrix;
    const auto top2 = compare_coupling(c, d, 2);
    REQUIRE(top2.entries.size() == 2);
    CHECK(top2.entries[0].row == 5);
    CHECK(top2.entries[0].col == 5);
    CHECK(top2.entries[0].value_a == 0.6392);
    CHECK(top2.entries[0].value_b == 0.4939);
    CHECK(top2.entries[1].row == 11);
    CHECK(top2.entries[1].value_a == -0.6354);
    CHECK(top2.entries[1].value_b == -0.5096);
}

TEST_CASE("comparison properties", "[basis]")
{
    std::mt19937_64 rng(12);
    const RealMatrix a = test::random_symmetric(9, rng);
    const RealMatrix b = test::random_symmetric(9, rng);
    CHECK(compare_coupling(a, a, 0).entries.empty());
    const auto ab = compare_coupling(a, b, 0);
    const auto ba = compare_coupling(b, a, 0);
    REQUIRE(ab.entries.size() == ba.entries.size());
    CHECK(ab.entries.size() == 45);
    for (std::size_t i = 0; i < ab.entries.size(); ++i) {
        CHECK(ab.entries[i].delta == ba.entries[i].delta);
        if (i > 0)
            CHECK(ab.entries[i - 1].delta >= ab.entries[i].delta);
    }
    CompareOptions opt;
    opt.min_delta = 0.5;
    for (const auto& e : compare_coupling(a, b, opt).entries)
        CHECK(e.delta >= 0.5);
    CHECK_THROWS_AS(compare_coupling(a, RealMatrix::Zero(8, 8), 0), Error);
}
