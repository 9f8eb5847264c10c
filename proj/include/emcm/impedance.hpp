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

#include "emcm/model.hpp"

#include <vector>

namespace emcm {

// Second-order EM system: Z_in(k) = j k eta0 C (K - k^2 Id)^-1 C^T.
struct EmCouplingMatrix {
    RealMatrix C; // ports x N
    RealMatrix K; // N x N, symmetric

    std::size_t ports() const noexcept { return static_cast<std::size_t>(C.rows()); }
    std::size_t order() const noexcept { return static_cast<std::size_t>(K.rows()); }
};

// Throws Validation when K is not symmetric (1e-12 relative), has a negative
// eigenvalue, or the block shapes disagree.
void require_valid(const EmCouplingMatrix& em);

enum class StateBasis { ExactEm, Narrowband };

struct StateSolution {
    ComplexVector amplitudes;
    StateBasis basis = StateBasis::ExactEm;
};

struct SParameterSweep {
    std::vector<double> frequencies_hz;
    std::vector<ComplexMatrix> matrices;
    double z_ref = kFreeSpaceImpedance;

    std::size_t ports() const { return matrices.empty() ? 0 : static_cast<std::size_t>(matrices.front().rows()); }
};

// Full pole-residue series. PoleHit when |k - k_n| / k_n < 1e-12 for any term.
ComplexMatrix eval_impedance(const PoleResidueModel& model, double k);

// Same series restricted to the given terms.
ComplexMatrix eval_terms(const std::vector<PoleResidueTerm>& terms, std::size_t ports, double eta0, double k);

struct InbandSplit {
    std::vector<PoleResidueTerm> inband;
    std::vector<PoleResidueTerm> outofband;
};

// Terms with k_n in the closed interval [k(f1), k(f2)] are in-band; the
// `inband` flag of each returned term is rewritten accordingly.
InbandSplit split_inband(const PoleResidueModel& model, const FrequencyBand& band);

// Transversal EM coupling matrix: K = diag(k_n^2), columns of C are c_n.
EmCouplingMatrix em_coupling_from_inband(const std::vector<PoleResidueTerm>& inband);

ComplexMatrix impedance_from_em(const EmCouplingMatrix& em, double eta0, double k);

// E = -(K - k^2 Id)^-1 C^T i
StateSolution solve_state(const EmCouplingMatrix& em, double eta0, double k, const PortVector& current);

// S = (Z/z_ref - Id)(Z/z_ref + Id)^-1
ComplexMatrix z_to_s(const ComplexMatrix& z, double z_ref);

// Inverse of z_to_s, used when importing S-parameter data.
ComplexMatrix s_to_z(const ComplexMatrix& s, double z_ref);

// Evenly spaced grid; a single point yields {f_start}.
std::vector<double> linear_grid(double f_start, double f_stop, std::size_t points);

// Exact S-parameters of the full model over a frequency grid. Points are
// evaluated independently, optionally on several threads (0 = auto from the
// EMCM_THREADS environment variable, default 1).
SParameterSweep sweep_model(const PoleResidueModel& model, const std::vector<double>& frequencies_hz,
                            double z_ref, unsigned threads = 0);

// Same grid, impedance matrices instead of S.
SParameterSweep sweep_model_impedance(const PoleResidueModel& model, const std::vector<double>& frequencies_hz,
                                      unsigned threads = 0);

} // namespace emcm
