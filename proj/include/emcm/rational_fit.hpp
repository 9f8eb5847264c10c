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

struct SweepSamples {
    std::vector<double> frequencies_hz; // strictly increasing
    std::vector<ComplexMatrix> Z;       // symmetric impedance matrices, ohm
};

// Throws Validation when lengths differ, frequencies are not strictly
// increasing, or a matrix is not symmetric to 1e-8.
void require_valid(const SweepSamples& samples);

struct Rank1Residue {
    RealVector c;
    double quality = 0.0;     // |lambda2| / |lambda1|
    bool sign_flipped = false; // dominant eigenvalue was negative
};

// Dominant eigenpair of a symmetric residue, c = sqrt(|lambda1|) u1 with the
// first nonzero component positive. ZeroResidue when R = 0.
Rank1Residue rank1_project(const RealMatrix& residue);

inline constexpr double kRank1Warning = 1e-3;

struct FitOptions {
    std::size_t n_poles = 0;
    double eta0 = kFreeSpaceImpedance;
    std::size_t max_iters = 50;
    double tol = 1e-12;
};

struct FitReport {
    PoleResidueModel model;
    double residual = 0.0;     // mean relative Frobenius error per sample
    double max_residual = 0.0; // worst sample
    std::vector<double> rank1_quality; // per term, aligned with model.terms
    std::vector<double> residual_history; // accepted iterates, non-increasing
    std::size_t iterations = 0;
    bool converged = false;
    bool sign_flipped = false; // some residue had a negative dominant eigenvalue

    bool rank1_warning() const;
};

// Rational fit of Z(k) / (j k eta0) in the variable s = k^2 with real poles:
// pole relocation by vector fitting, symmetric residue least squares per
// pole, rank-1 projection. Terms whose pole lies inside the sampled range are
// flagged in-band.
FitReport fit_pole_residue(const SweepSamples& samples, const FitOptions& options);

} // namespace emcm
