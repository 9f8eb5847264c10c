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

#include "emcm/basis.hpp"

#include "emcm/error.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace emcm {

BasisTransform::BasisTransform(RealMatrix q) : q_(std::move(q))
{
    if (q_.rows() != q_.cols())
        throw Error(ErrorCode::NotOrthogonal, "basis transform must be square");
    const auto n = q_.rows();
    const double err = n == 0 ? 0.0 : (q_.transpose() * q_ - RealMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
    if (!(err <= 1e-12))
        throw Error(ErrorCode::NotOrthogonal, "Q^T Q deviates from identity by " + std::to_string(err));
}

BasisTransform BasisTransform::identity(std::size_t n)
{
    const auto m = static_cast<Eigen::Index>(n);
    return BasisTransform(RealMatrix::Identity(m, m));
}

BasisTransform BasisTransform::transposed() const
{
    return BasisTransform(q_.transpose());
}

namespace {

void require_order(Eigen::Index order, const BasisTransform& q)
{
    if (q.matrix().rows() != order)
        throw Error(ErrorCode::DimensionMismatch, "basis transform dimension differs from the resonator count");
}

RealMatrix congruence(const RealMatrix& k, const RealMatrix& q)
{
    RealMatrix out = q.transpose() * k * q;
    return 0.5 * (out + out.transpose());
}

} // namespace

EmCouplingMatrix apply_basis(const EmCouplingMatrix& em, const BasisTransform& q)
{
    require_order(em.K.rows(), q);
    return {em.C * q.matrix(), congruence(em.K, q.matrix())};
}

ClassicalCouplingMatrix apply_basis(const ClassicalCouplingMatrix& ccm, const BasisTransform& q)
{
    require_order(ccm.M.rows(), q);
    return {ccm.D * q.matrix(), congruence(ccm.M, q.matrix()), ccm.band};
}

namespace {

BasisTransform eigenbasis(const RealMatrix& k)
{
    if (!is_symmetric(k, 1e-12))
        throw Error(ErrorCode::Validation, "resonator block must be symmetric");
    auto eig = symmetric_eigen(k);
    fix_column_signs(eig.vectors);
    return BasisTransform(std::move(eig.vectors));
}

RealMatrix exact_diagonal(const RealMatrix& k)
{
    return RealMatrix(k.diagonal().asDiagonal());
}

} // namespace

TransversalForm<EmCouplingMatrix> to_transversal(const EmCouplingMatrix& em)
{
    auto q = eigenbasis(em.K);
    auto out = apply_basis(em, q);
    out.K = exact_diagonal(out.K);
    return {std::move(out), std::move(q)};
}

TransversalForm<ClassicalCouplingMatrix> to_transversal(const ClassicalCouplingMatrix& ccm)
{
    auto q = eigenbasis(ccm.M);
    auto out = apply_basis(ccm, q);
    out.M = exact_diagonal(out.M);
    return {std::move(out), std::move(q)};
}

ClassicalCouplingMatrix fix_sign_gauge(const ClassicalCouplingMatrix& ccm)
{
    ClassicalCouplingMatrix out = ccm;
    const auto n = out.M.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        double lead = 0.0;
        for (Eigen::Index p = 0; p < out.D.rows() && lead == 0.0; ++p)
            lead = out.D(p, i);
        for (Eigen::Index j = 0; j < i && lead == 0.0; ++j)
            lead = out.M(j, i);
        if (lead < 0.0) {
            out.D.col(i) *= -1.0;
            out.M.row(i) *= -1.0;
            out.M.col(i) *= -1.0;
        }
    }
    return out;
}

ComparisonReport compare_coupling(const RealMatrix& a, const RealMatrix& b, const CompareOptions& options)
{
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
        throw Error(ErrorCode::DimensionMismatch, "compared matrices must be square with equal dimensions");
    if (options.support && (options.support->rows() != a.rows() || options.support->cols() != a.cols()))
        throw Error(ErrorCode::DimensionMismatch, "support mask dimension differs from the matrices");

    ComparisonReport report;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = i; j < a.cols(); ++j) {
            if (options.support && !(*options.support)(i, j))
                continue;
            const double delta = std::abs(a(i, j) - b(i, j));
            if (delta == 0.0 || delta < options.min_delta)
                continue;
            report.entries.push_back({static_cast<std::size_t>(i + 1), static_cast<std::size_t>(j + 1), a(i, j), b(i, j),
                                      delta});
        }
    }
    // Deltas equal up to decimal round-off (fixtures are printed to 4 places)
    // count as ties so the (row, col) order decides.
    auto key = [](double delta) { return std::round(delta * 1e12); };
    std::sort(report.entries.begin(), report.entries.end(), [&](const CouplingDelta& x, const CouplingDelta& y) {
        const double kx = key(x.delta);
        const double ky = key(y.delta);
        if (kx != ky)
            return kx > ky;
        return std::tie(x.row, x.col) < std::tie(y.row, y.col);
    });
    if (options.top_k > 0 && report.entries.size() > options.top_k)
        report.entries.resize(options.top_k);
    return report;
}

ComparisonReport compare_coupling(const RealMatrix& a, const RealMatrix& b, std::size_t top_k)
{
    CompareOptions options;
    options.top_k = top_k;
    return compare_coupling(a, b, options);
}

} // namespace emcm
