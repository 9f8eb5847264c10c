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

#include "emcm/model.hpp"

#include "emcm/error.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace emcm {

double wavenumber_from_hz(double f_hz) noexcept
{
    return 2.0 * std::numbers::pi * f_hz / kSpeedOfLight;
}

double hz_from_wavenumber(double k) noexcept
{
    return k * kSpeedOfLight / (2.0 * std::numbers::pi);
}

FrequencyBand make_band(double f1_hz, double f2_hz)
{
    if (!std::isfinite(f1_hz) || !(f1_hz > 0.0))
        throw Error(ErrorCode::Validation, "NonPositive band: f1_hz must be finite and > 0");
    if (!std::isfinite(f2_hz) || !(f2_hz > 0.0))
        throw Error(ErrorCode::Validation, "NonPositive band: f2_hz must be finite and > 0");
    if (!(f2_hz > f1_hz))
        throw Error(ErrorCode::Validation, "Reversed band: f2_hz must exceed f1_hz");

    FrequencyBand band;
    band.f1_ = f1_hz;
    band.f2_ = f2_hz;
    band.f0_ = std::sqrt(f1_hz) * std::sqrt(f2_hz);
    band.k0_ = wavenumber_from_hz(band.f0_);
    band.delta_ = (f2_hz - f1_hz) / band.f0_;
    if (!(band.delta_ < 2.0))
        throw Error(ErrorCode::Validation, "delta: fractional bandwidth must be < 2");
    return band;
}

std::size_t PoleResidueModel::order() const
{
    std::size_t n = 0;
    for (const auto& t : terms)
        n += t.inband ? 1 : 0;
    return n;
}

std::string_view to_string(IssueKind kind) noexcept
{
    switch (kind) {
    case IssueKind::DuplicatePole: return "DuplicatePole";
    case IssueKind::LengthMismatch: return "LengthMismatch";
    case IssueKind::NonFinite: return "NonFinite";
    case IssueKind::NegativePole: return "NegativePole";
    case IssueKind::NoPorts: return "NoPorts";
    case IssueKind::BadEta0: return "BadEta0";
    }
    return "Unknown";
}

std::vector<ValidationIssue> validate_model(const PoleResidueModel& model)
{
    std::vector<ValidationIssue> issues;
    auto add = [&](IssueKind kind, std::size_t term, const std::string& what) {
        std::ostringstream os;
        os << "term " << term << ": " << what;
        issues.push_back({kind, term, os.str()});
    };

    if (model.ports == 0)
        issues.push_back({IssueKind::NoPorts, 0, "ports must be >= 1"});
    if (!std::isfinite(model.eta0) || !(model.eta0 > 0.0))
        issues.push_back({IssueKind::BadEta0, 0, "eta0 must be finite and > 0"});

    for (std::size_t n = 0; n < model.terms.size(); ++n) {
        const auto& t = model.terms[n];
        if (!std::isfinite(t.k))
            add(IssueKind::NonFinite, n, "k is not finite");
        else if (t.k < 0.0)
            add(IssueKind::NegativePole, n, "k must be >= 0");
        if (static_cast<std::size_t>(t.c.size()) != model.ports)
            add(IssueKind::LengthMismatch, n, "c has " + std::to_string(t.c.size()) + " entries, expected " +
                                                  std::to_string(model.ports));
        if (!t.c.allFinite())
            add(IssueKind::NonFinite, n, "c has non-finite entries");
    }

    for (std::size_t a = 0; a < model.terms.size(); ++a) {
        if (!model.terms[a].inband)
            continue;
        for (std::size_t b = a + 1; b < model.terms.size(); ++b) {
            if (model.terms[b].inband && model.terms[a].k == model.terms[b].k)
                add(IssueKind::DuplicatePole, b, "in-band pole duplicates term " + std::to_string(a));
        }
    }
    return issues;
}

void require_valid(const PoleResidueModel& model)
{
    const auto issues = validate_model(model);
    if (!issues.empty())
        throw Error(ErrorCode::Validation, std::string(to_string(issues.front().kind)) + ": " + issues.front().message);
}

} // namespace emcm
