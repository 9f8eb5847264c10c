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

#include <optional>
#include <vector>

namespace emcm {

// Orthogonal change of basis for the resonator state.
class BasisTransform {
public:
    // Throws NotOrthogonal unless Q^T Q = Id to 1e-12.
    explicit BasisTransform(RealMatrix q);

    static BasisTransform identity(std::size_t n);

    const RealMatrix& matrix() const noexcept { return q_; }
    BasisTransform transposed() const;

private:
    RealMatrix q_;
};

// C' = C Q, K' = Q^T K Q
EmCouplingMatrix apply_basis(const EmCouplingMatrix& em, const BasisTransform& q);
ClassicalCouplingMatrix apply_basis(const ClassicalCouplingMatrix& ccm, const BasisTransform& q);

template <typename Coupling>
struct TransversalForm {
    Coupling matrix;         // diagonal resonator block, eigenvalues ascending
    BasisTransform transform; // apply_basis(matrix, transform.transposed()) recovers the input
};

TransversalForm<EmCouplingMatrix> to_transversal(const EmCouplingMatrix& em);
TransversalForm<ClassicalCouplingMatrix> to_transversal(const ClassicalCouplingMatrix& ccm);

// Gauge fixing for the +-1 diagonal similarity: each resonator state is
// flipped so that its first nonzero coupling (scanning ports, then earlier
// resonators) is positive.
ClassicalCouplingMatrix fix_sign_gauge(const ClassicalCouplingMatrix& ccm);

struct CouplingDelta {
    std::size_t row = 0; // 1-based, ports first
    std::size_t col = 0; // 1-based, row <= col
    double value_a = 0.0;
    double value_b = 0.0;
    double delta = 0.0; // |a - b|
};

struct ComparisonReport {
    std::vector<CouplingDelta> entries; // descending delta
};

struct CompareOptions {
    std::size_t top_k = 0;    // 0 = no limit
    double min_delta = 0.0;   // entries with delta below this are dropped; zero deltas never listed
    std::optional<Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>> support; // restrict to these positions
};

ComparisonReport compare_coupling(const RealMatrix& a, const RealMatrix& b, const CompareOptions& options);
ComparisonReport compare_coupling(const RealMatrix& a, const RealMatrix& b, std::size_t top_k);

} // namespace emcm
