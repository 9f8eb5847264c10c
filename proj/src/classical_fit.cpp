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

#include "emcm/classical_fit.hpp"

#include "emcm/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace emcm {

TopologyMask::TopologyMask(BoolMatrix allowed, std::size_t ports) : allowed_(std::move(allowed)), ports_(ports)
{
    const auto p = static_cast<Eigen::Index>(ports);
    if (allowed_.rows() != allowed_.cols() || allowed_.rows() <= p)
        throw Error(ErrorCode::Validation, "topology mask must be square and larger than the port block");
    for (Eigen::Index i = 0; i < allowed_.rows(); ++i)
        for (Eigen::Index j = 0; j < i; ++j)
            if (allowed_(i, j) != allowed_(j, i))
                throw Error(ErrorCode::Validation, "topology mask must be symmetric");
    allowed_.topLeftCorner(p, p).setConstant(false);
    for (Eigen::Index i = p; i < allowed_.rows(); ++i)
        allowed_(i, i) = true;
}

TopologyMask TopologyMask::from_pattern(const ClassicalCouplingMatrix& ccm, double zero_tol)
{
    const RealMatrix full = ccm.full();
    BoolMatrix allowed = (full.cwiseAbs().array() > zero_tol).matrix();
    allowed = (allowed.array() || allowed.transpose().array()).matrix();
    return TopologyMask(std::move(allowed), ccm.ports());
}

bool TopologyMask::respects(const ClassicalCouplingMatrix& ccm) const
{
    const RealMatrix full = ccm.full();
    if (full.rows() != allowed_.rows() || ccm.ports() != ports_)
        return false;
    for (Eigen::Index i = 0; i < full.rows(); ++i)
        for (Eigen::Index j = 0; j < full.cols(); ++j)
            if (!allowed_(i, j) && full(i, j) != 0.0)
                return false;
    return true;
}

ClassicalResponse classical_response(const ClassicalCouplingMatrix& ccm, double normalized, double z_ref)
{
    // S = -Id + 2 Dn W^-1 Dn^T, W = j(K + M) + Dn^T Dn, Dn = D / sqrt(z_ref)
    const ComplexMatrix dn = (ccm.D / std::sqrt(z_ref)).cast<Complex>();
    ComplexMatrix w = (dn.transpose() * dn).eval();
    w += kJ * ccm.M.cast<Complex>();
    w.diagonal().array() += kJ * normalized;
    Eigen::PartialPivLU<ComplexMatrix> lu(w);
    const ComplexMatrix x = lu.solve(dn.transpose());
    ClassicalResponse out;
    out.S = 2.0 * dn * x;
    out.S.diagonal().array() -= 1.0;
    out.dS = Complex(0.0, -2.0) * dn * lu.solve(x);
    return out;
}

namespace {

bool by_real_part(Complex x, Complex y)
{
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
}

// K with det(j(K + M) + G) = 0, i.e. -eig(M - jG)
std::vector<Complex> shifted_roots(const RealMatrix& m, const RealMatrix& g)
{
    ComplexMatrix a = m.cast<Complex>();
    a -= kJ * g.cast<Complex>();
    Eigen::ComplexEigenSolver<ComplexMatrix> solver(a, false);
    std::vector<Complex> roots;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i)
        roots.push_back(-solver.eigenvalues()(i));
    std::sort(roots.begin(), roots.end(), by_real_part);
    return roots;
}

} // namespace

std::vector<Complex> prototype_poles(const ClassicalCouplingMatrix& ccm, double z_ref)
{
    const RealMatrix dn = ccm.D / std::sqrt(z_ref);
    return shifted_roots(ccm.M, dn.transpose() * dn);
}

std::vector<Complex> reflection_zero_roots(const ClassicalCouplingMatrix& ccm, std::size_t input_port, double z_ref)
{
    if (input_port >= ccm.ports())
        throw Error(ErrorCode::InvalidArgument, "input port out of range");
    const RealMatrix dn = ccm.D / std::sqrt(z_ref);
    const RealVector d = dn.row(static_cast<Eigen::Index>(input_port)).transpose();
    // det(W - 2 d d^T) = -det(W) S_in,in
    return shifted_roots(ccm.M, dn.transpose() * dn - 2.0 * d * d.transpose());
}

namespace {

using EntryFn = std::function<std::pair<Complex, Complex>(double)>;

std::vector<double> scan_zeros(const EntryFn& entry, const ZeroScanOptions& o)
{
    const std::size_t g = o.grid_points;
    std::vector<double> grid(g);
    std::vector<double> mag(g);
    for (std::size_t i = 0; i < g; ++i) {
        grid[i] = o.k_lo + (o.k_hi - o.k_lo) * static_cast<double>(i) / static_cast<double>(g - 1);
        mag[i] = std::norm(entry(grid[i]).first);
    }
    auto slope = [&](double k) {
        const auto [s, ds] = entry(k);
        return 2.0 * (std::conj(s) * ds).real();
    };

    std::vector<double> zeros;
    for (std::size_t i = 1; i + 1 < g; ++i) {
        if (!(mag[i] <= mag[i - 1] && mag[i] <= mag[i + 1]) || (mag[i] == mag[i - 1] && mag[i] == mag[i + 1]))
            continue;
        double lo = grid[i - 1];
        double hi = grid[i + 1];
        for (int it = 0; it < 200 && hi - lo > o.refine_tol; ++it) {
            const double mid = 0.5 * (lo + hi);
            (slope(mid) < 0.0 ? lo : hi) = mid;
        }
        double k = 0.5 * (lo + hi);
        for (int it = 0; it < 30; ++it) {
            const auto [s, ds] = entry(k);
            if (std::abs(ds) == 0.0)
                break;
            const double step = (s / ds).real();
            const double next = k - step;
            if (next < grid[i - 1] || next > grid[i + 1] || std::abs(entry(next).first) > std::abs(s))
                break;
            k = next;
            if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(k)))
                break;
        }
        if (std::abs(entry(k).first) < o.zero_threshold) {
            if (zeros.empty() || k - zeros.back() > 1e-8)
                zeros.push_back(k);
        }
    }
    return zeros;
}

} // namespace

ZeroSet find_zeros(const ClassicalCouplingMatrix& ccm, const ZeroScanOptions& options)
{
    if (options.grid_points < 11)
        throw Error(ErrorCode::InvalidArgument, "zero scan needs at least 11 grid points");
    if (!(options.k_hi > options.k_lo))
        throw Error(ErrorCode::InvalidArgument, "zero scan range is empty");
    const auto p = ccm.ports();
    if (options.input_port >= p)
        throw Error(ErrorCode::InvalidArgument, "input port out of range");

    const auto in = static_cast<Eigen::Index>(options.input_port);
    ZeroSet zs;
    if (options.output_port < p && options.output_port != options.input_port) {
        const auto out = static_cast<Eigen::Index>(options.output_port);
        zs.transmission_zeros = scan_zeros(
            [&](double k) {
                const auto r = classical_response(ccm, k, options.z_ref);
                return std::pair{r.S(out, in), r.dS(out, in)};
            },
            options);
    }
    auto in_range = [&](Complex k) { return k.real() >= options.k_lo && k.real() <= options.k_hi; };
    for (const Complex k : reflection_zero_roots(ccm, options.input_port, options.z_ref))
        if (in_range(k))
            zs.reflection_zeros.push_back(k);
    for (const Complex k : prototype_poles(ccm, options.z_ref))
        if (in_range(k))
            zs.prototype_poles.push_back(k);
    return zs;
}

namespace {

struct FreeEntries {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> positions;

    explicit FreeEntries(const TopologyMask& mask)
    {
        const auto& a = mask.allowed();
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            for (Eigen::Index j = i; j < a.cols(); ++j)
                if (a(i, j))
                    positions.emplace_back(i, j);
    }

    RealVector pack(const RealMatrix& full) const
    {
        RealVector x(static_cast<Eigen::Index>(positions.size()));
        for (std::size_t k = 0; k < positions.size(); ++k)
            x(static_cast<Eigen::Index>(k)) = full(positions[k].first, positions[k].second);
        return x;
    }

    ClassicalCouplingMatrix unpack(const RealVector& x, const ClassicalCouplingMatrix& like) const
    {
        RealMatrix full = RealMatrix::Zero(like.ports() + like.order(), like.ports() + like.order());
        for (std::size_t k = 0; k < positions.size(); ++k) {
            const auto [i, j] = positions[k];
            full(i, j) = full(j, i) = x(static_cast<Eigen::Index>(k));
        }
        return ClassicalCouplingMatrix::from_full(full, like.ports(), like.band);
    }
};

using ResidualFn = std::function<RealVector(const ClassicalCouplingMatrix&)>;

void check_inputs(const TopologyMask& mask, const ClassicalCouplingMatrix& init, const ClassicalFitOptions& o)
{
    if (mask.dimension() != init.ports() + init.order() || mask.ports() != init.ports())
        throw Error(ErrorCode::DimensionMismatch, "topology mask does not match the initial matrix");
    if (!mask.respects(init))
        throw Error(ErrorCode::MaskViolation, "initial matrix has nonzero couplings outside the topology mask");
    if (o.input_port >= init.ports() || (init.ports() > 1 && o.output_port >= init.ports()))
        throw Error(ErrorCode::InvalidArgument, "port index out of range");
}

ClassicalFitResult damped_least_squares(const ResidualFn& residual, const TopologyMask& mask,
                                        const ClassicalCouplingMatrix& init, const ClassicalFitOptions& o)
{
    const FreeEntries free(mask);
    RealVector x = free.pack(init.full());
    ClassicalFitResult result{init, 0.0, 0, false, {}};
    RealVector r = residual(init);
    double f = r.norm();
    result.residual = f;
    if (f <= o.tol) {
        result.converged = true;
        return result;
    }
    result.residual_history.push_back(f);

    const auto nx = x.size();
    double lambda = o.initial_damping;
    for (std::size_t it = 0; it < o.max_iters; ++it) {
        RealMatrix jac(r.size(), nx);
        for (Eigen::Index j = 0; j < nx; ++j) {
            const double h = 1e-7 * std::max(1.0, std::abs(x(j)));
            RealVector xp = x;
            RealVector xm = x;
            xp(j) += h;
            xm(j) -= h;
            jac.col(j) = (residual(free.unpack(xp, init)) - residual(free.unpack(xm, init))) / (2.0 * h);
        }
        const RealMatrix jtj = jac.transpose() * jac;
        const RealVector grad = jac.transpose() * r;

        bool accepted = false;
        while (lambda < 1e16) {
            RealMatrix a = jtj;
            for (Eigen::Index j = 0; j < nx; ++j)
                a(j, j) += lambda * std::max(jtj(j, j), 1e-12);
            const RealVector step = a.ldlt().solve(-grad);
            const RealVector xn = x + step;
            const auto candidate = free.unpack(xn, init);
            const RealVector rn = residual(candidate);
            const double fn = rn.norm();
            if (std::isfinite(fn) && fn < f) {
                if (!mask.respects(candidate))
                    throw Error(ErrorCode::MaskViolation, "fit produced a coupling outside the topology mask");
                const double gain = (f - fn) / f;
                x = xn;
                r = rn;
                f = fn;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                result.residual_history.push_back(f);
                if (gain < 1e-14)
                    lambda = 1e16; // stalled at round-off
                break;
            }
            lambda *= 10.0;
        }
        result.iterations = it + 1;
        if (f <= o.tol) {
            result.converged = true;
            break;
        }
        if (!accepted || lambda >= 1e16)
            break;
    }
    result.matrix = free.unpack(x, init);
    result.residual = f;
    return result;
}

} // namespace

ClassicalFitResult fit_classical(const ZeroSet& targets, const TopologyMask& mask, const ClassicalCouplingMatrix& init,
                                 const ClassicalFitOptions& options)
{
    check_inputs(mask, init, options);
    if (targets.empty())
        throw Error(ErrorCode::InvalidArgument, "no fit targets");
    if (targets.prototype_poles.size() > init.order() || targets.reflection_zeros.size() > init.order())
        throw Error(ErrorCode::InvalidArgument, "more pole or reflection zero targets than resonators");
    if (!targets.transmission_zeros.empty() && init.ports() < 2)
        throw Error(ErrorCode::InvalidArgument, "transmission zero targets need two ports");

    const auto in = static_cast<Eigen::Index>(options.input_port);
    const auto out = static_cast<Eigen::Index>(options.output_port);
    const auto& w = options.weights;
    auto residual = [&](const ClassicalCouplingMatrix& ccm) {
        std::vector<double> r;
        auto newton_distance = [&](double k, Eigen::Index row, Eigen::Index col, double weight) {
            const auto resp = classical_response(ccm, k, options.z_ref);
            const Complex s = resp.S(row, col);
            const Complex ds = resp.dS(row, col);
            const Complex d = std::abs(ds) > 0.0 ? s / ds : s * 1e12;
            r.push_back(weight * d.real());
            r.push_back(weight * d.imag());
        };
        for (double k : targets.transmission_zeros)
            newton_distance(k, out, in, w.transmission);
        auto match_roots = [&](const std::vector<Complex>& wanted, std::vector<Complex> computed, double weight) {
            for (const Complex t : wanted) {
                auto best = std::min_element(computed.begin(), computed.end(), [&](Complex x, Complex y) {
                    return std::abs(x - t) < std::abs(y - t);
                });
                const Complex d = *best - t;
                computed.erase(best);
                r.push_back(weight * d.real());
                r.push_back(weight * d.imag());
            }
        };
        if (!targets.reflection_zeros.empty())
            match_roots(targets.reflection_zeros, reflection_zero_roots(ccm, options.input_port, options.z_ref),
                        w.reflection);
        if (!targets.prototype_poles.empty())
            match_roots(targets.prototype_poles, prototype_poles(ccm, options.z_ref), w.poles);
        return RealVector(Eigen::Map<const RealVector>(r.data(), static_cast<Eigen::Index>(r.size())));
    };
    return damped_least_squares(residual, mask, init, options);
}

ClassicalFitResult fit_classical(const SampledTargets& targets, const TopologyMask& mask,
                                 const ClassicalCouplingMatrix& init, const ClassicalFitOptions& options)
{
    check_inputs(mask, init, options);
    if (targets.normalized.empty() || targets.normalized.size() != targets.S.size())
        throw Error(ErrorCode::InvalidArgument, "sampled targets need matching, non-empty K and S lists");
    const auto p = static_cast<Eigen::Index>(init.ports());
    for (const auto& s : targets.S)
        if (s.rows() != p || s.cols() != p)
            throw Error(ErrorCode::DimensionMismatch, "sampled S matrix dimension differs from the port count");

    auto residual = [&](const ClassicalCouplingMatrix& ccm) {
        RealVector r(static_cast<Eigen::Index>(targets.S.size()) * p * (p + 1));
        Eigen::Index at = 0;
        for (std::size_t i = 0; i < targets.S.size(); ++i) {
            const ComplexMatrix s = classical_response(ccm, targets.normalized[i], options.z_ref).S;
            for (Eigen::Index a = 0; a < p; ++a) {
                for (Eigen::Index b = a; b < p; ++b) {
                    const Complex d = s(a, b) - targets.S[i](a, b);
                    r(at++) = d.real();
                    r(at++) = d.imag();
                }
            }
        }
        return r;
    };
    return damped_least_squares(residual, mask, init, options);
}

} // namespace emcm
