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

#include <Eigen/Dense>

#include <complex>
#include <functional>

namespace emcm {

using Complex = std::complex<double>;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr Complex kJ{0.0, 1.0};

// Relative symmetry test: max|A - A^T| <= tol * max(1, max|A|).
template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& a, double tol)
{
    if (a.rows() != a.cols())
        return false;
    if (a.size() == 0)
        return true;
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

struct SymmetricEigen {
    RealVector values;  // ascending
    RealMatrix vectors; // columns
};

SymmetricEigen symmetric_eigen(const RealMatrix& a);

// f(A) = V f(Lambda) V^T for symmetric A.
RealMatrix spectral_map(const RealMatrix& a, const std::function<double(double)>& f);

// A^p for symmetric positive definite A. Eigenvalues at or below
// 1e-13 * max eigenvalue raise NotPositiveDefinite naming `what`.
RealMatrix spd_power(const RealMatrix& a, double exponent, const char* what);

// Column sign convention for eigenvector matrices: the component of largest
// magnitude is made positive (first such component on ties).
void fix_column_signs(RealMatrix& vectors);

double relative_difference(const ComplexMatrix& a, const ComplexMatrix& b);

} // namespace emcm
