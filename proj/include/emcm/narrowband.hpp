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

#include "emcm/impedance.hpp"

namespace emcm {

// Low-pass prototype D (ports x N) and M (N x N) valid over `band`.
// Z(K) = D (jK Id + jM)^-1 D^T.
struct ClassicalCouplingMatrix {
    RealMatrix D;
    RealMatrix M;
    FrequencyBand band;

    std::size_t ports() const noexcept { return static_cast<std::size_t>(D.rows()); }
    std::size_t order() const noexcept { return static_cast<std::size_t>(M.rows()); }

    // (P+N) x (P+N) layout with the zero port block first.
    RealMatrix full() const;
    static ClassicalCouplingMatrix from_full(const RealMatrix& full, std::size_t ports, const FrequencyBand& band);
};

// A = F'(j0)/j, B = F(j0)/j
struct CenterLinearization {
    RealMatrix A;
    RealMatrix B;
};

// Z_out(K) ~ Z0 + Z1 K
struct AffineOutOfBand {
    ComplexMatrix Z0;
    ComplexMatrix Z1;

    static AffineOutOfBand zero(std::size_t ports);
    ComplexMatrix at(double normalized) const { return Z0 + Z1 * normalized; }
};

// K = (k/k0 - k0/k) / delta
double lowpass_map(double k, const FrequencyBand& band);

// k = (k0/2) (K delta + sqrt(K^2 delta^2 + 4))
double bandpass_map(double normalized, const FrequencyBand& band);

// dk/dK of bandpass_map.
double bandpass_map_derivative(double normalized, const FrequencyBand& band);

// F(jK) = j k(K) Id + K / (j k(K))
ComplexMatrix assemble_F(const EmCouplingMatrix& em, const FrequencyBand& band, double normalized);

CenterLinearization center_linearization(const EmCouplingMatrix& em, const FrequencyBand& band);

// M = A^-1/2 B A^-1/2, D = sqrt(eta0) C A^-1/2
ClassicalCouplingMatrix reduce_to_classical(const EmCouplingMatrix& em, const FrequencyBand& band, double eta0);

// Exact spectral inverse of reduce_to_classical.
EmCouplingMatrix inverse_reduce(const ClassicalCouplingMatrix& ccm, double eta0);

// First-order expansion of the out-of-band series in K about the band center.
AffineOutOfBand taylor_outofband(const std::vector<PoleResidueTerm>& outofband, std::size_t ports, double eta0,
                                 const FrequencyBand& band);

ComplexMatrix eval_classical(const ClassicalCouplingMatrix& ccm, double normalized);

// Classical response plus the affine out-of-band load, converted to S.
ComplexMatrix eval_total_s(const ClassicalCouplingMatrix& ccm, const AffineOutOfBand& oob, double f_hz,
                           double z_ref);

// Everything needed to replace a pole-residue model inside its band.
struct NarrowbandModel {
    ClassicalCouplingMatrix classical;
    AffineOutOfBand outofband;
};

NarrowbandModel narrowband_model(const PoleResidueModel& model, const FrequencyBand& band);

} // namespace emcm
