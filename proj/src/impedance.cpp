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

#include "emcm/impedance.hpp"

#include "emcm/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

namespace emcm {
namespace {

constexpr double kPoleTolerance = 1e-12;
constexpr double kSingularRcond = 1e-13;

void require_positive_k(double k)
{
    if (!std::isfinite(k) || !(k > 0.0))
        throw Error(ErrorCode::InvalidArgument, "wavenumber must be finite and > 0");
}

Eigen::PartialPivLU<ComplexMatrix> factor_shift(const RealMatrix& K, double k)
{
    ComplexMatrix shifted = K.cast<Complex>();
    shifted.diagonal().array() -= k * k;
    Eigen::PartialPivLU<ComplexMatrix> lu(shifted);
    if (!(lu.rcond() > kSingularRcond))
        throw Error(ErrorCode::SingularShift, "k^2 = " + std::to_string(k * k) + " is an eigenvalue of K");
    return lu;
}

unsigned resolve_threads(unsigned requested)
{
    if (requested > 0)
        return requested;
    if (const char* env = std::getenv("EMCM_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0)
            return static_cast<unsigned>(v);
    }
    return 1;
}

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn)
{
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    // Each worker owns a strided slice; outputs are written by index.
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> failures(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < count; i += threads)
                    fn(i);
            } catch (...) {
                failures[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool)
        th.join();
    for (auto& f : failures)
        if (f)
            std::rethrow_exception(f);
}

} // namespace

void require_valid(const EmCouplingMatrix& em)
{
    if (em.K.rows() != em.K.cols())
        throw Error(ErrorCode::Validation, "K must be square");
    if (em.C.cols() != em.K.rows())
        throw Error(ErrorCode::Validation, "C has " + std::to_string(em.C.cols()) + " columns, K has order " +
                                               std::to_string(em.K.rows()));
    if (!em.C.allFinite() || !em.K.allFinite())
        throw Error(ErrorCode::Validation, "C and K must be finite");
    if (!is_symmetric(em.K, 1e-12))
        throw Error(ErrorCode::Validation, "K must be symmetric");
    if (em.K.size() > 0) {
        const auto eig = symmetric_eigen(em.K);
        if (eig.values.minCoeff() < -1e-12 * std::max(1.0, eig.values.cwiseAbs().maxCoeff()))
            throw Error(ErrorCode::Validation, "K has a negative eigenvalue");
    }
}

ComplexMatrix eval_terms(const std::vector<PoleResidueTerm>& terms, std::size_t ports, double eta0, double k)
{
    require_positive_k(k);
    const auto p = static_cast<Eigen::Index>(ports);
    RealMatrix series = RealMatrix::Zero(p, p);
    for (const auto& t : terms) {
        if (t.c.size() != p)
            throw Error(ErrorCode::DimensionMismatch, "term coupling vector length differs from port count");
        if (t.k > 0.0 && std::abs(k - t.k) < kPoleTolerance * t.k)
            throw Error(ErrorCode::PoleHit, "k = " + std::to_string(k) + " coincides with pole " + std::to_string(t.k));
        const double denom = (t.k - k) * (t.k + k);
        series.noalias() += (t.c * t.c.transpose()) / denom;
    }
    return Complex(0.0, k * eta0) * series.cast<Complex>();
}

ComplexMatrix eval_impedance(const PoleResidueModel& model, double k)
{
    return eval_terms(model.terms, model.ports, model.eta0, k);
}

InbandSplit split_inband(const PoleResidueModel& model, const FrequencyBand& band)
{
    InbandSplit split;
    const double lo = band.k1();
    const double hi = band.k2();
    for (auto t : model.terms) {
        t.inband = t.k >= lo && t.k <= hi;
        (t.inband ? split.inband : split.outofband).push_back(std::move(t));
    }
    return split;
}

EmCouplingMatrix em_coupling_from_inband(const std::vector<PoleResidueTerm>& inband)
{
    if (inband.empty())
        throw Error(ErrorCode::EmptyInBand, "no in-band terms to build a coupling matrix from");
    const auto n = static_cast<Eigen::Index>(inband.size());
    const auto p = inband.front().c.size();
    EmCouplingMatrix em{RealMatrix(p, n), RealMatrix::Zero(n, n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& t = inband[static_cast<std::size_t>(i)];
        if (t.c.size() != p)
            throw Error(ErrorCode::DimensionMismatch, "in-band terms disagree on port count");
        em.C.col(i) = t.c;
        em.K(i, i) = t.k * t.k;
    }
    return em;
}

ComplexMatrix impedance_from_em(const EmCouplingMatrix& em, double eta0, double k)
{
    require_positive_k(k);
    if (em.order() == 0)
        return ComplexMatrix::Zero(em.C.rows(), em.C.rows());
    const auto lu = factor_shift(em.K, k);
    const ComplexMatrix ct = em.C.transpose().cast<Complex>();
    ComplexMatrix z = Complex(0.0, k * eta0) * (em.C.cast<Complex>() * lu.solve(ct));
    return 0.5 * (z + z.transpose()).eval();
}

StateSolution solve_state(const EmCouplingMatrix& em, double /*eta0*/, double k, const PortVector& current)
{
    require_positive_k(k);
    if (current.values.size() != em.C.rows())
        throw Error(ErrorCode::DimensionMismatch, "current vector length differs from port count");
    StateSolution out;
    out.basis = StateBasis::ExactEm;
    if (em.order() == 0) {
        out.amplitudes = ComplexVector(0);
        return out;
    }
    const auto lu = factor_shift(em.K, k);
    out.amplitudes = -lu.solve(em.C.transpose().cast<Complex>() * current.values);
    return out;
}

ComplexMatrix z_to_s(const ComplexMatrix& z, double z_ref)
{
    if (z.rows() != z.cols())
        throw Error(ErrorCode::DimensionMismatch, "impedance matrix must be square");
    if (!(z_ref > 0.0))
        throw Error(ErrorCode::InvalidArgument, "reference impedance must be > 0");
    const auto p = z.rows();
    const ComplexMatrix zn = z / z_ref;
    const ComplexMatrix id = ComplexMatrix::Identity(p, p);
    Eigen::PartialPivLU<ComplexMatrix> lu(zn + id);
    if (!(lu.rcond() > kSingularRcond))
        throw Error(ErrorCode::SingularConversion, "Z/z_ref + Id is singular");
    ComplexMatrix s = lu.solve(zn - id);
    return 0.5 * (s + s.transpose()).eval();
}

ComplexMatrix s_to_z(const ComplexMatrix& s, double z_ref)
{
    if (s.rows() != s.cols())
        throw Error(ErrorCode::DimensionMismatch, "scattering matrix must be square");
    const auto p = s.rows();
    const ComplexMatrix id = ComplexMatrix::Identity(p, p);
    Eigen::PartialPivLU<ComplexMatrix> lu(id - s);
    if (!(lu.rcond() > kSingularRcond))
        throw Error(ErrorCode::SingularConversion, "Id - S is singular");
    return z_ref * lu.solve(id + s);
}

std::vector<double> linear_grid(double f_start, double f_stop, std::size_t points)
{
    if (points == 0)
        throw Error(ErrorCode::InvalidArgument, "grid needs at least one point");
    if (points == 1)
        return {f_start};
    std::vector<double> grid(points);
    const double step = (f_stop - f_start) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = f_start + step * static_cast<double>(i);
    grid.back() = f_stop;
    return grid;
}

SParameterSweep sweep_model(const PoleResidueModel& model, const std::vector<double>& frequencies_hz, double z_ref,
                            unsigned threads)
{
    require_valid(model);
    SParameterSweep sweep;
    sweep.frequencies_hz = frequencies_hz;
    sweep.z_ref = z_ref;
    sweep.matrices.resize(frequencies_hz.size());
    parallel_for(frequencies_hz.size(), resolve_threads(threads), [&](std::size_t i) {
        sweep.matrices[i] = z_to_s(eval_impedance(model, wavenumber_from_hz(frequencies_hz[i])), z_ref);
    });
    return sweep;
}

SParameterSweep sweep_model_impedance(const PoleResidueModel& model, const std::vector<double>& frequencies_hz,
                                      unsigned threads)
{
    require_valid(model);
    SParameterSweep sweep;
    sweep.frequencies_hz = frequencies_hz;
    sweep.z_ref = 1.0;
    sweep.matrices.resize(frequencies_hz.size());
    parallel_for(frequencies_hz.size(), resolve_threads(threads), [&](std::size_t i) {
        sweep.matrices[i] = eval_impedance(model, wavenumber_from_hz(frequencies_hz[i]));
    });
    return sweep;
}

} // namespace emcm
