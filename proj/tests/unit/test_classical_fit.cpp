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

ClassicalCouplingMatrix perturbed(const ClassicalCouplingMatrix& ccm, std::uint64_t seed, double amount)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-amount, amount);
    RealMatrix full = ccm.full();
    for (Eigen::Index i = 0; i < full.rows(); ++i)
        for (Eigen::Index j = i; j < full.cols(); ++j)
            if (full(i, j) != 0.0)
                full(j, i) = full(i, j) += u(rng);
    return ClassicalCouplingMatrix::from_full(full, ccm.ports(), ccm.band);
}

// Four-resonator inline chain: no cross couplings, so no finite transmission zeros.
ClassicalCouplingMatrix inline_chain()
{
    ClassicalCouplingMatrix ccm{RealMatrix::Zero(2, 4), RealMatrix::Zero(4, 4), make_band(1e9, 1.05e9)};
    ccm.D(0, 0) = 1.03;
    ccm.D(1, 3) = 1.03;
    ccm.M(0, 1) = ccm.M(1, 0) = 0.91;
    ccm.M(1, 2) = ccm.M(2, 1) = 0.70;
    ccm.M(2, 3) = ccm.M(3, 2) = 0.91;
    return ccm;
}

} // namespace

TEST_CASE("terminated response agrees with the impedance form", "[classical_fit]")
{
    const auto ccm = test::load_fixture("dualmode_prototype.cm");
    for (double k : {-1.7, -0.4, 0.13, 0.9, 2.2}) {
        const auto r = classical_response(ccm, k, 1.0);
        CHECK(relative_difference(r.S, z_to_s(eval_classical(ccm, k), 1.0)) < 1e-12);
        CHECK((r.S.adjoint() * r.S - ComplexMatrix::Identity(2, 2)).norm() < 1e-12);
        const double h = 1e-6;
        const ComplexMatrix fd = (classical_response(ccm, k + h).S - classical_response(ccm, k - h).S) / (2 * h);
        CHECK(relative_difference(r.dS, fd) < 1e-6);
    }
    const auto scaled = classical_response(ClassicalCouplingMatrix{ccm.D * std::sqrt(50.0), ccm.M, ccm.band}, 0.3, 50.0);
    CHECK(relative_difference(scaled.S, classical_response(ccm, 0.3).S) < 1e-13);
}

TEST_CASE("transmission zeros of the dual-mode filter", "[classical_fit]")
{
    const auto ccm = test::load_fixture("dualmode_prototype.cm");
    const auto zeros = find_zeros(ccm);
    REQUIRE(zeros.transmission_zeros.size() == 4);
    const double expected[] = {12.193e9, 12.201e9, 12.269e9, 12.277e9};
    for (std::size_t i = 0; i < 4; ++i) {
        const double k = zeros.transmission_zeros[i];
        CHECK(std::abs(hz_from_wavenumber(bandpass_map(k, ccm.band)) - expected[i]) < 3e6);
        CHECK(std::abs(classical_response(ccm, k).S(1, 0)) < 1e-8);
    }
}

TEST_CASE("inline chain has no finite transmission zeros", "[classical_fit]")
{
    const auto zeros = find_zeros(inline_chain());
    CHECK(zeros.transmission_zeros.empty());
    CHECK(zeros.prototype_poles.size() == 4);
}

TEST_CASE("reflection zeros agree with dense sampling of |S11|", "[classical_fit]")
{
    const auto ccm = test::load_fixture("dualmode_prototype.cm");
    const auto roots = reflection_zero_roots(ccm);
    REQUIRE(roots.size() == 8);
    for (const auto& r : roots) {
        CHECK(std::abs(r.real()) < 1.0);
        CHECK(std::abs(r.imag()) < 1e-3);
    }

    const std::size_t n = 200001;
    std::vector<double> mag(n);
    for (std::size_t i = 0; i < n; ++i)
        mag[i] = std::abs(classical_response(ccm, -1.0 + 2.0 * double(i) / double(n - 1)).S(0, 0));
    std::vector<double> minima;
    for (std::size_t i = 1; i + 1 < n; ++i)
        if (mag[i] < mag[i - 1] && mag[i] <= mag[i + 1] && mag[i] < 1e-3)
            minima.push_back(-1.0 + 2.0 * double(i) / double(n - 1));
    REQUIRE(minima.size() == 8);
    for (std::size_t i = 0; i < 8; ++i)
        CHECK_THAT(roots[i].real(), WithinAbs(minima[i], 2e-5));

    const auto set = find_zeros(ccm);
    CHECK(set.reflection_zeros.size() == 8);
    REQUIRE(set.prototype_poles.size() == 8);
    for (const auto& p : set.prototype_poles)
        CHECK(std::abs(p.imag()) > 1e-3);
    CHECK(code_of([&] { reflection_zero_roots(ccm, 2); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("topology masks", "[classical_fit]")
{
    const auto ccm = test::load_fixture("dualmode_prototype.cm");
    const auto mask = TopologyMask::from_pattern(ccm);
    CHECK(mask.respects(ccm));
    CHECK(mask.dimension() == 10);
    CHECK_FALSE(mask.allowed()(0, 1));
    CHECK(mask.allowed()(5, 5));

    auto off = ccm;
    off.M(0, 7) = off.M(7, 0) = 0.01;
    CHECK_FALSE(mask.respects(off));

    BoolMatrix asym = BoolMatrix::Constant(4, 4, false);
    asym(2, 3) = true;
    CHECK(code_of([&] { TopologyMask(asym, 2); }) == ErrorCode::Validation);
    CHECK(code_of([&] { TopologyMask(BoolMatrix::Constant(2, 2, true), 2); }) == ErrorCode::Validation);
}

TEST_CASE("fit preconditions", "[classical_fit]")
{
    const auto ccm = test::load_fixture("dualmode_prototype.cm");
    const auto mask = TopologyMask::from_pattern(ccm);
    const auto targets = find_zeros(ccm);
    auto off = ccm;
    off.M(0, 7) = off.M(7, 0) = 0.01;
    CHECK(code_of([&] { fit_classical(targets, mask, off); }) == ErrorCode::MaskViolation);
    CHECK(code_of([&] { fit_classical(ZeroSet{}, mask, ccm); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("satisfied targets need no iterations", "[classical_fit]")
{
    const auto chain = inline_chain();
    ZeroSet targets;
    targets.prototype_poles = prototype_poles(chain);
    const auto r = fit_classical(targets, TopologyMask::from_pattern(chain), chain);
    CHECK(r.iterations == 0);
    CHECK(r.converged);
    CHECK(r.residual < 1e-10);
    CHECK(r.matrix.M == chain.M);
}

TEST_CASE("zero-target fit recovers the dual-mode filter", "[classical_fit]")
{
    const auto ccm = test::load_fixture("dualmode_prototype.cm");
    const auto mask = TopologyMask::from_pattern(ccm);
    const auto targets = find_zeros(ccm);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto r = fit_classical(targets, mask, perturbed(ccm, seed, 0.02));
        CHECK(r.converged);
        CHECK(r.residual < 1e-8);
        CHECK(mask.respects(r.matrix));
        CHECK(test::max_abs(fix_sign_gauge(r.matrix).full() - fix_sign_gauge(ccm).full()) < 1e-4);
        for (std::size_t i = 1; i < r.residual_history.size(); ++i)
            CHECK(r.residual_history[i] <= r.residual_history[i - 1]);
    }
}

TEST_CASE("sampled-response fit recovers the dual-mode filter", "[classical_fit]")
{
    const auto ccm = test::load_fixture("dualmode_prototype.cm");
    SampledTargets targets;
    for (double k = -2.0; k <= 2.0; k += 0.05) {
        targets.normalized.push_back(k);
        targets.S.push_back(classical_response(ccm, k).S);
    }
    const auto r = fit_classical(targets, TopologyMask::from_pattern(ccm), perturbed(ccm, 9, 0.02));
    CHECK(r.residual < 1e-8);
    CHECK(test::max_abs(fix_sign_gauge(r.matrix).full() - fix_sign_gauge(ccm).full()) < 1e-4);
}
