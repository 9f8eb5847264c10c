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
#include <numbers>

using namespace emcm;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinRel;

namespace {

bool has_issue(const std::vector<ValidationIssue>& issues, IssueKind kind)
{
    return std::any_of(issues.begin(), issues.end(), [&](const auto& i) { return i.kind == kind; });
}

} // namespace

TEST_CASE("band quantities match high-precision values", "[model]")
{
    const auto band = make_band(12.21e9, 12.26e9);
    CHECK_THAT(band.f0_hz(), WithinRel(12234974458.493977584, 1e-15));
    CHECK_THAT(band.delta(), WithinRel(0.0040866452291846123987, 1e-13));
    CHECK_THAT(band.k0(), WithinRel(256.42610312540576741, 1e-15));

    const auto diplexer = make_band(2.478e9, 2.718e9);
    CHECK_THAT(diplexer.f0_hz(), WithinRel(2595227157.6877427552, 1e-15));
    CHECK_THAT(diplexer.delta(), WithinRel(0.092477453963541157958, 1e-14));
}

TEST_CASE("band validation names the offending field", "[model]")
{
    CHECK_THROWS_WITH(make_band(12.26e9, 12.21e9), ContainsSubstring("Reversed"));
    CHECK_THROWS_WITH(make_band(-1.0, 12.21e9), ContainsSubstring("NonPositive") && ContainsSubstring("f1_hz"));
    CHECK_THROWS_WITH(make_band(1.0, 0.0), ContainsSubstring("f2_hz"));
    CHECK_THROWS_WITH(make_band(1.0, NAN), ContainsSubstring("f2_hz"));
    CHECK_THROWS_AS(make_band(1.0, 1.0), Error);
    CHECK_THROWS_AS(make_band(1.0, 1e9), Error);
}

TEST_CASE("wavenumber conversion round trips", "[model]")
{
    CHECK_THAT(wavenumber_from_hz(kSpeedOfLight), WithinRel(2.0 * std::numbers::pi, 1e-15));
    for (double f : {1e6, 2.5e9, 12.234e9, 77e9})
        CHECK_THAT(hz_from_wavenumber(wavenumber_from_hz(f)), WithinRel(f, 1e-15));
}

TEST_CASE("validate_model reports structural issues", "[model]")
{
    PoleResidueModel empty;
    CHECK(validate_model(empty).empty());

    PoleResidueModel dup;
    dup.terms = {test::make_term(2.0, {1.0}, true), test::make_term(2.0, {0.5}, true)};
    CHECK(has_issue(validate_model(dup), IssueKind::DuplicatePole));

    PoleResidueModel len;
    len.ports = 2;
    len.terms = {test::make_term(2.0, {1.0})};
    const auto issues = validate_model(len);
    REQUIRE(has_issue(issues, IssueKind::LengthMismatch));
    CHECK(issues.front().term == 0);
    CHECK_THROWS_WITH(require_valid(len), ContainsSubstring("LengthMismatch"));

    PoleResidueModel neg;
    neg.terms = {test::make_term(-1.0, {1.0})};
    CHECK(has_issue(validate_model(neg), IssueKind::NegativePole));

    PoleResidueModel nan_c;
    nan_c.terms = {test::make_term(1.0, {NAN})};
    CHECK(has_issue(validate_model(nan_c), IssueKind::NonFinite));

    PoleResidueModel bad;
    bad.ports = 0;
    bad.eta0 = 0.0;
    const auto b = validate_model(bad);
    CHECK(has_issue(b, IssueKind::NoPorts));
    CHECK(has_issue(b, IssueKind::BadEta0));
}

TEST_CASE("order counts in-band terms", "[model]")
{
    PoleResidueModel m;
    m.terms = {test::make_term(0.0, {1.0}), test::make_term(2.0, {1.0}, true), test::make_term(3.0, {1.0}, true)};
    CHECK(m.order() == 2);
}
