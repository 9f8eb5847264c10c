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

#include "emcm/narrowband.hpp"

#include <vector>

namespace emcm {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Couplings allowed to be nonzero in an intended topology, in the
// (P+N) x (P+N) ports-first layout.
class TopologyMask {
public:
    // Throws Validation unless `allowed` is square, symmetric and larger than the port block.
    // The port block is cleared and the resonator diagonal forced on.
    TopologyMask(BoolMatrix allowed, std::size_t ports);

    // Nonzero pattern of a coupling matrix plus the resonator diagonal.
    static TopologyMask from_pattern(const ClassicalCouplingMatrix& ccm, double zero_tol = 0.0);

    const BoolMatrix& allowed() const noexcept { return allowed_; }
    std::size_t ports() const noexcept { return ports_; }
    std::size_t dimension() const noexcept { return static_cast<std::size_t>(allowed_.rows()); }

    bool respects(const ClassicalCouplingMatrix& ccm) const;

private:
    BoolMatrix allowed_;
    std::size_t ports_;
};

struct ZeroSet {
    std::vector<double> transmission_zeros; // normalized K, ascending
    std::vector<Complex> reflection_zeros;  // complex K, ascending real part
    std::vector<Complex> prototype_poles;   // ascending real part

    bool empty() const
    {
        return transmission_zeros.empty() && reflection_zeros.empty() && prototype_poles.empty();
    }
};

// Response of the port-terminated prototype. z_ref = 1 for normalized
// matrices such as the published ones.
struct ClassicalResponse {
    ComplexMatrix S;
    ComplexMatrix dS; // dS/dK
};

ClassicalResponse classical_response(const ClassicalCouplingMatrix& ccm, double normalized, double z_ref = 1.0);

// Complex K where the terminated system matrix is singular, ascending real part.
std::vector<Complex> prototype_poles(const ClassicalCouplingMatrix& ccm, double z_ref = 1.0);

struct ZeroScanOptions {
    double k_lo = -10.0;
    double k_hi = 10.0;
    std::size_t grid_points = 4001;
    std::size_t input_port = 0;  // 0-based
    std::size_t output_port = 1; // 0-based
    double z_ref = 1.0;
    double zero_threshold = 1e-6;
    double refine_tol = 1e-10;
};

// Complex K where S_in,in vanishes: the eigenvalues of the terminated system
// with the input port's termination reversed. Ascending real part.
std::vector<Complex> reflection_zero_roots(const ClassicalCouplingMatrix& ccm, std::size_t input_port = 0,
                                           double z_ref = 1.0);

// Transmission zeros by scan-and-polish: local minima of |S_out,in| on the
// grid are polished by bisection on d|S|^2/dK followed by Newton on S itself
// and kept when |S| < zero_threshold. Reflection zeros and poles are the
// eigenvalue roots with real part inside the scan range.
ZeroSet find_zeros(const ClassicalCouplingMatrix& ccm, const ZeroScanOptions& options = {});

struct ZeroTargetWeights {
    double transmission = 1.0;
    double reflection = 1.0;
    double poles = 1.0;
};

struct SampledTargets {
    std::vector<double> normalized; // K grid
    std::vector<ComplexMatrix> S;
};

struct ClassicalFitOptions {
    std::size_t max_iters = 200;
    double tol = 1e-10;
    double z_ref = 1.0;
    std::size_t input_port = 0;
    std::size_t output_port = 1;
    ZeroTargetWeights weights;
    double initial_damping = 1e-3;
};

struct ClassicalFitResult {
    ClassicalCouplingMatrix matrix;
    double residual = 0.0; // Euclidean norm of the weighted residual vector
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> residual_history; // accepted steps, non-increasing
};

// Damped least squares over the masked free entries. Zero/pole targets:
// each target transmission zero contributes the Newton distance
// S(K_t)/S'(K_t) of the computed response; each target reflection zero and
// pole contributes its offset from the nearest unclaimed computed root. Throws MaskViolation when `init` has entries
// outside the mask.
ClassicalFitResult fit_classical(const ZeroSet& targets, const TopologyMask& mask,
                                 const ClassicalCouplingMatrix& init, const ClassicalFitOptions& options = {});

ClassicalFitResult fit_classical(const SampledTargets& targets, const TopologyMask& mask,
                                 const ClassicalCouplingMatrix& init, const ClassicalFitOptions& options = {});

} // namespace emcm
