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

#include "emcm/error.hpp"

namespace emcm {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::Validation: return "ValidationError";
    case ErrorCode::PoleHit: return "PoleHit";
    case ErrorCode::SingularShift: return "SingularShift";
    case ErrorCode::SingularConversion: return "SingularConversion";
    case ErrorCode::EmptyInBand: return "EmptyInBand";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::PoleInsideBand: return "PoleInsideBand";
    case ErrorCode::NotOrthogonal: return "NotOrthogonal";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::ZeroResidue: return "ZeroResidue";
    case ErrorCode::MaskViolation: return "MaskViolation";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::Io: return "IoError";
    }
    return "Error";
}

} // namespace emcm
