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

#include "emcm/narrowband.hpp"

#include "emcm/error.hpp"

#include <cmath>
#include <string>

namespace emcm {

RealMatrix ClassicalCouplingMatrix::full() const
{
    const auto p = D.rows();
    const auto n = M.rows();
    RealMatrix out = RealMatrix::Zero(p + n, p + n);
    out.block(0, p, p, n) = D;
    out.block(p, 0, n, p) = D.transpose();
    out.block(p, p, n, n) = M;
    return out;
}

ClassicalCouplingMatrix ClassicalCouplingMatrix::from_full(const RealMatrix& full, std::size_t ports,
                                                           const FrequencyBand& band)
{
    const auto p = static_cast<Eigen::Index>(ports);
    if (full.rows() != full.cols() || full.rows() <= p)
        throw Error(ErrorCode::DimensionMismatch, "coupling matrix must be square and larger than the port block");
    const auto n = full.rows() - p;
    return {full.block(0, p, p, n), full.block(p, p, n, n), band};
}

AffineOutOfBand AffineOutOfBand::zero(std::size_t ports)
{
    const auto p = static_cast<Eigen::Index>(ports);
    return {ComplexMatrix::Zero(p, p), ComplexMatrix::Zero(p, p)};
}

double lowpass_map(double k, const FrequencyBand& band)
{
    if (!std::isfinite(k) || !(k > 0.0))
        throw Error(ErrorCode::InvalidArgument, "wavenumber must be finite and > 0");
    // (k/k0 - k0/k)/delta with k0^2 = k1 k2, rearranged so the band edges map
    // to -1 and +1 exactly and without cancellation near k0.
    const double k1 = band.k1();
    const double k2 = band.k2();
    return (k * (k - k1) - k1 * (k2 - k)) / (k * (k2 - k1));
}

double bandpass_map(double normalized, const FrequencyBand& band)
{
    const double x = normalized * band.delta();
    const double root = std::sqrt(x * x + 4.0);
    if (x >= 0.0)
        return 0.5 * band.k0() * (x + root);
    return 2.0 * band.k0() / (root - x);
}

double bandpass_map_derivative(double normalized, const FrequencyBand& band)
{
    const double x = normalized * band.delta();
    return 0.5 * band.k0() * band.delta() * (1.0 + x / std::sqrt(x * x + 4.0));
}

ComplexMatrix assemble_F(const EmCouplingMatrix& em, const FrequencyBand& band, double normalized)
{
    const double k = bandpass_map(normalized, band);
    RealMatrix inner = -em.K / k;
    inner.diagonal().array() += k;
    return kJ * inner.cast<Complex>();
}

CenterLinearization center_linearization(const EmCouplingMatrix& em, const FrequencyBand& band)
{
    if (em.K.rows() != em.K.cols())
        throw Error(ErrorCode::DimensionMismatch, "K must be square");
    if (!is_symmetric(em.K, 1e-12))
        throw Error(ErrorCode::Validation, "K must be symmetric");
    const double k0 = band.k0();
    const auto n = em.K.rows();
    if (n > 0) {
        const auto eig = symmetric_eigen(em.K);
        if (eig.values.minCoeff() < -1e-12 * std::max(1.0, eig.values.cwiseAbs().maxCoeff()))
            throw Error(ErrorCode::NotPositiveDefinite,
                        "K has negative eigenvalue " + std::to_string(eig.values.minCoeff()));
    }
    CenterLinearization lin;
    lin.A = 0.5 * band.delta() * (k0 * RealMatrix::Identity(n, n) + em.K / k0);
    lin.B = k0 * RealMatrix::Identity(n, n) - em.K / k0;
    lin.A = 0.5 * (lin.A + lin.A.transpose()).eval();
    lin.B = 0.5 * (lin.B + lin.B.transpose()).eval();
    return lin;
}

ClassicalCouplingMatrix reduce_to_classical(const EmCouplingMatrix& em, const FrequencyBand& band, double eta0)
{
    if (em.C.cols() != em.K.rows())
        throw Error(ErrorCode::DimensionMismatch, "C columns must match the order of K");
    const auto lin = center_linearization(em, band);
    const RealMatrix a_inv_sqrt = spd_power(lin.A, -0.5, "F'(j0)/j");
    ClassicalCouplingMatrix ccm{std::sqrt(eta0) * em.C * a_inv_sqrt, a_inv_sqrt * lin.B * a_inv_sqrt, band};
    ccm.M = 0.5 * (ccm.M + ccm.M.transpose()).eval();
    return ccm;
}

EmCouplingMatrix inverse_reduce(const ClassicalCouplingMatrix& ccm, double eta0)
{
    if (ccm.D.cols() != ccm.M.rows() || ccm.M.rows() != ccm.M.cols())
        throw Error(ErrorCode::DimensionMismatch, "D columns must match the order of M");
    if (!is_symmetric(ccm.M, 1e-12))
        throw Error(ErrorCode::Validation, "M must be symmetric");
    const double k0 = ccm.band.k0();
    const double delta = ccm.band.delta();
    const auto eig = symmetric_eigen(ccm.M);
    const auto n = eig.values.size();

    RealVector kappa(n);
    RealVector a_sqrt(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mu = eig.values(i);
        const double den = 2.0 + delta * mu;
        if (!(den > 0.0))
            throw Error(ErrorCode::OutOfRange, "M eigenvalue " + std::to_string(mu) + " at or below -2/delta");
        kappa(i) = k0 * k0 * (2.0 - delta * mu) / den;
        if (kappa(i) < 0.0)
            throw Error(ErrorCode::OutOfRange, "M eigenvalue " + std::to_string(mu) + " maps to a negative K eigenvalue");
        a_sqrt(i) = std::sqrt(0.5 * delta * (k0 + kappa(i) / k0));
    }
    const RealMatrix& u = eig.vectors;
    EmCouplingMatrix em;
    em.K = u * kappa.asDiagonal() * u.transpose();
    em.K = 0.5 * (em.K + em.K.transpose()).eval();
    em.C = ccm.D * (u * a_sqrt.asDiagonal() * u.transpose()) / std::sqrt(eta0);
    return em;
}

AffineOutOfBand taylor_outofband(const std::vector<PoleResidueTerm>& outofband, std::size_t ports, double eta0,
                                 const FrequencyBand& band)
{
    const double lo = band.k1();
    const double hi = band.k2();
    const double k0 = band.k0();
    const auto p = static_cast<Eigen::Index>(ports);
    RealMatrix value = RealMatrix::Zero(p, p);
    RealMatrix slope = RealMatrix::Zero(p, p);
    for (const auto& t : outofband) {
        if (t.k >= lo && t.k <= hi)
            throw Error(ErrorCode::PoleInsideBand, "out-of-band term at k = " + std::to_string(t.k) + " lies inside the band");
        if (t.c.size() != p)
            throw Error(ErrorCode::DimensionMismatch, "term coupling vector length differs from port count");
        const RealMatrix residue = t.c * t.c.transpose();
        const double gap = (t.k - k0) * (t.k + k0);
        // d/dk [k / (k_n^2 - k^2)] = (k_n^2 + k^2) / (k_n^2 - k^2)^2
        value += residue * (k0 / gap);
        slope += residue * ((t.k * t.k + k0 * k0) / (gap * gap));
    }
    const Complex scale(0.0, eta0);
    const double dk_dK = 0.5 * k0 * band.delta();
    return {scale * value.cast<Complex>(), (scale * dk_dK) * slope.cast<Complex>()};
}

ComplexMatrix eval_classical(const ClassicalCouplingMatrix& ccm, double normalized)
{
    const auto n = ccm.M.rows();
    if (n == 0)
        return ComplexMatrix::Zero(ccm.D.rows(), ccm.D.rows());
    RealMatrix shifted = ccm.M;
    shifted.diagonal().array() += normalized;
    Eigen::PartialPivLU<RealMatrix> lu(shifted);
    if (!(lu.rcond() > 1e-13))
        throw Error(ErrorCode::SingularShift, "-K = " + std::to_string(-normalized) + " is an eigenvalue of M");
    // D (jK + jM)^-1 D^T = -j D (K + M)^-1 D^T
    RealMatrix z = ccm.D * lu.solve(ccm.D.transpose());
    z = 0.5 * (z + z.transpose()).eval();
    return Complex(0.0, -1.0) * z.cast<Complex>();
}

ComplexMatrix eval_total_s(const ClassicalCouplingMatrix& ccm, const AffineOutOfBand& oob, double f_hz, double z_ref)
{
    const double normalized = lowpass_map(wavenumber_from_hz(f_hz), ccm.band);
    return z_to_s(eval_classical(ccm, normalized) + oob.at(normalized), z_ref);
}

NarrowbandModel narrowband_model(const PoleResidueModel& model, const FrequencyBand& band)
{
    require_valid(model);
    const auto split = split_inband(model, band);
    const auto em = em_coupling_from_inband(split.inband);
    return {reduce_to_classical(em, band, model.eta0), taylor_outofband(split.outofband, model.ports, model.eta0, band)};
}

} // namespace emcm
