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

#include "emcm/linalg.hpp"

#include "emcm/error.hpp"

#include <cmath>
#include <string>

namespace emcm {

SymmetricEigen symmetric_eigen(const RealMatrix& a)
{
    if (a.size() == 0)
        return {RealVector(0), RealMatrix(0, 0)};
    // Symmetrize so round-off asymmetry never leaks into the eigenvectors.
    const RealMatrix sym = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<RealMatrix> solver(sym);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorCode::InvalidArgument, "symmetric eigendecomposition failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

RealMatrix spectral_map(const RealMatrix& a, const std::function<double(double)>& f)
{
    const auto eig = symmetric_eigen(a);
    RealVector mapped(eig.values.size());
    for (Eigen::Index i = 0; i < eig.values.size(); ++i)
        mapped(i) = f(eig.values(i));
    return eig.vectors * mapped.asDiagonal() * eig.vectors.transpose();
}

RealMatrix spd_power(const RealMatrix& a, double exponent, const char* what)
{
    const auto eig = symmetric_eigen(a);
    if (eig.values.size() == 0)
        return RealMatrix(0, 0);
    const double largest = eig.values.maxCoeff();
    const double floor = 1e-13 * std::abs(largest);
    if (!(largest > 0.0) || eig.values.minCoeff() <= floor) {
        throw Error(ErrorCode::NotPositiveDefinite,
                    std::string(what) + " has eigenvalue " + std::to_string(eig.values.minCoeff()) +
                        " (largest " + std::to_string(largest) + ")");
    }
    RealVector mapped = eig.values.array().pow(exponent).matrix();
    return eig.vectors * mapped.asDiagonal() * eig.vectors.transpose();
}

void fix_column_signs(RealMatrix& vectors)
{
    for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
        Eigen::Index best = 0;
        double best_abs = -1.0;
        for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
            // Near-ties resolved toward the first index for reproducibility.
            if (std::abs(vectors(i, j)) > best_abs * (1.0 + 1e-12)) {
                best_abs = std::abs(vectors(i, j));
                best = i;
            }
        }
        if (vectors.rows() > 0 && vectors(best, j) < 0.0)
            vectors.col(j) *= -1.0;
    }
}

double relative_difference(const ComplexMatrix& a, const ComplexMatrix& b)
{
    const double scale = std::max(a.norm(), b.norm());
    if (scale == 0.0)
        return 0.0;
    return (a - b).norm() / scale;
}

} // namespace emcm
