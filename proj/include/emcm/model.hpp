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

#pragma once

#include "emcm/linalg.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace emcm {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kFreeSpaceImpedance = 376.730313668; // ohm

double wavenumber_from_hz(double f_hz) noexcept;
double hz_from_wavenumber(double k) noexcept;

// Analysis interval [f1, f2] and the quantities derived from it: the
// geometric center f0, its wavenumber k0 and the fractional bandwidth.
class FrequencyBand {
public:
    double f1_hz() const noexcept { return f1_; }
    double f2_hz() const noexcept { return f2_; }
    double f0_hz() const noexcept { return f0_; }
    double k0() const noexcept { return k0_; }
    double delta() const noexcept { return delta_; }

    double k1() const noexcept { return wavenumber_from_hz(f1_); }
    double k2() const noexcept { return wavenumber_from_hz(f2_); }

    bool operator==(const FrequencyBand&) const = default;

private:
    friend FrequencyBand make_band(double f1_hz, double f2_hz);
    FrequencyBand() = default;

    double f1_ = 0.0;
    double f2_ = 0.0;
    double f0_ = 0.0;
    double k0_ = 0.0;
    double delta_ = 0.0;
};

// Throws Error(Validation) naming the offending field when the band is not
// 0 < f1 < f2 or the fractional bandwidth falls outside (0, 2).
FrequencyBand make_band(double f1_hz, double f2_hz);

struct PoleResidueTerm {
    double k = 0.0;   // eigenresonance wavenumber, rad/m; 0 for the static term
    RealVector c;     // port couplings, one per port
    bool inband = false;
};

// Z(k) = j k eta0 sum_n c_n c_n^T / (k_n^2 - k^2)
struct PoleResidueModel {
    std::size_t ports = 1;
    std::vector<PoleResidueTerm> terms;
    double eta0 = kFreeSpaceImpedance;
    std::optional<FrequencyBand> band;

    std::size_t order() const; // number of in-band terms
};

enum class IssueKind { DuplicatePole, LengthMismatch, NonFinite, NegativePole, NoPorts, BadEta0 };

struct ValidationIssue {
    IssueKind kind;
    std::size_t term = 0; // index of the offending term, when applicable
    std::string message;
};

std::string_view to_string(IssueKind kind) noexcept;

// Report-style check: empty result iff the model is well formed.
std::vector<ValidationIssue> validate_model(const PoleResidueModel& model);

// Throws Error(Validation) carrying the first issue.
void require_valid(const PoleResidueModel& model);

enum class PortRole { Voltage, Current };

struct PortVector {
    ComplexVector values;
    PortRole role = PortRole::Current;
};

} // namespace emcm
