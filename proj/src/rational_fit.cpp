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

#include "emcm/rational_fit.hpp"

#include "emcm/error.hpp"
#include "emcm/impedance.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace emcm {

void require_valid(const SweepSamples& samples)
{
    if (samples.frequencies_hz.size() != samples.Z.size())
        throw Error(ErrorCode::Validation, "sample frequency and matrix counts differ");
    for (std::size_t i = 0; i < samples.Z.size(); ++i) {
        if (!(samples.frequencies_hz[i] > 0.0))
            throw Error(ErrorCode::Validation, "sample frequencies must be > 0");
        if (i > 0 && !(samples.frequencies_hz[i] > samples.frequencies_hz[i - 1]))
            throw Error(ErrorCode::Validation, "sample frequencies must be strictly increasing");
        const auto& z = samples.Z[i];
        if (z.rows() != z.cols() || z.rows() != samples.Z.front().rows())
            throw Error(ErrorCode::Validation, "sample " + std::to_string(i) + " has inconsistent dimensions");
        if (!z.allFinite())
            throw Error(ErrorCode::Validation, "sample " + std::to_string(i) + " is not finite");
        const double scale = std::max(1e-300, z.cwiseAbs().maxCoeff());
        if ((z - z.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
            throw Error(ErrorCode::Validation, "sample " + std::to_string(i) + " is not symmetric");
    }
}

Rank1Residue rank1_project(const RealMatrix& residue)
{
    if (residue.rows() != residue.cols() || residue.size() == 0)
        throw Error(ErrorCode::DimensionMismatch, "residue must be a non-empty square matrix");
    if (residue.cwiseAbs().maxCoeff() == 0.0)
        throw Error(ErrorCode::ZeroResidue, "residue matrix is zero");

    const auto eig = symmetric_eigen(residue);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(eig.values.size()));
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = static_cast<Eigen::Index>(i);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::abs(eig.values(a)) > std::abs(eig.values(b));
    });

    const double lambda1 = eig.values(order[0]);
    Rank1Residue out;
    out.sign_flipped = lambda1 < 0.0;
    out.quality = order.size() > 1 ? std::abs(eig.values(order[1])) / std::abs(lambda1) : 0.0;
    out.c = std::sqrt(std::abs(lambda1)) * eig.vectors.col(order[0]);

    const double cutoff = 1e-12 * out.c.norm();
    for (Eigen::Index i = 0; i < out.c.size(); ++i) {
        if (std::abs(out.c(i)) > cutoff) {
            if (out.c(i) < 0.0)
                out.c = -out.c;
            break;
        }
    }
    return out;
}

bool FitReport::rank1_warning() const
{
    return std::any_of(rank1_quality.begin(), rank1_quality.end(), [](double q) { return q > kRank1Warning; });
}

namespace {

// Fit data in the normalized variable x = k^2 / scale:
//   G(x) = Z(k) / (j k eta0) = sum_m R_m / (p_m - x)   (R absorbs the scale)
struct FitProblem {
    std::size_t ports = 0;
    double scale = 1.0;
    RealVector x;                 // normalized k^2 per sample
    RealVector weight;            // inverse sample magnitude
    std::vector<RealVector> data; // one vector per upper-triangular entry
    std::vector<std::pair<Eigen::Index, Eigen::Index>> entries;
};

FitProblem build_problem(const SweepSamples& samples, double eta0)
{
    FitProblem fp;
    const auto ns = static_cast<Eigen::Index>(samples.Z.size());
    const auto p = samples.Z.front().rows();
    fp.ports = static_cast<std::size_t>(p);
    for (Eigen::Index a = 0; a < p; ++a)
        for (Eigen::Index b = a; b < p; ++b)
            fp.entries.emplace_back(a, b);

    RealVector s(ns);
    for (Eigen::Index i = 0; i < ns; ++i) {
        const double k = wavenumber_from_hz(samples.frequencies_hz[static_cast<std::size_t>(i)]);
        s(i) = k * k;
    }
    fp.scale = s.maxCoeff();
    fp.x = s / fp.scale;

    fp.data.assign(fp.entries.size(), RealVector(ns));
    fp.weight.resize(ns);
    for (Eigen::Index i = 0; i < ns; ++i) {
        const double k = std::sqrt(s(i));
        const ComplexMatrix g = samples.Z[static_cast<std::size_t>(i)] / Complex(0.0, k * eta0);
        // G is real for lossless data; the imaginary part is discarded.
        RealMatrix gr = g.real();
        gr = 0.5 * (gr + gr.transpose()).eval();
        for (std::size_t e = 0; e < fp.entries.size(); ++e)
            fp.data[e](i) = gr(fp.entries[e].first, fp.entries[e].second);
        const double norm = gr.norm();
        fp.weight(i) = norm > 0.0 ? 1.0 / norm : 1.0;
    }
    return fp;
}

// Poles for relocation: real poles have imag == 0, complex pairs are stored
// once with imag > 0.
using PoleList = std::vector<Complex>;

Eigen::Index basis_size(const PoleList& poles)
{
    Eigen::Index n = 0;
    for (const auto& a : poles)
        n += a.imag() == 0.0 ? 1 : 2;
    return n;
}

RealMatrix relocation_basis(const PoleList& poles, const RealVector& x)
{
    RealMatrix phi(x.size(), basis_size(poles));
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Eigen::Index col = 0;
        for (const auto& a : poles) {
            const Complex v = 1.0 / (Complex(x(i), 0.0) - a);
            if (a.imag() == 0.0) {
                phi(i, col++) = v.real();
            } else {
                phi(i, col++) = 2.0 * v.real();
                phi(i, col++) = -2.0 * v.imag();
            }
        }
    }
    return phi;
}

PoleList relocate(const FitProblem& fp, const PoleList& poles)
{
    const RealMatrix phi = relocation_basis(poles, fp.x);
    const auto ns = phi.rows();
    const auto n = phi.cols();
    const auto ne = static_cast<Eigen::Index>(fp.entries.size());

    RealMatrix stacked(ne * n, n);
    RealVector rhs(ne * n);
    for (Eigen::Index e = 0; e < ne; ++e) {
        const RealVector& g = fp.data[static_cast<std::size_t>(e)];
        RealMatrix a(ns, 2 * n);
        RealVector b(ns);
        for (Eigen::Index i = 0; i < ns; ++i) {
            const double w = fp.weight(i);
            a.row(i).head(n) = w * phi.row(i);
            a.row(i).tail(n) = -w * g(i) * phi.row(i);
            b(i) = w * g(i);
        }
        Eigen::HouseholderQR<RealMatrix> qr(a);
        const RealMatrix r = qr.matrixQR().topRows(2 * n).triangularView<Eigen::Upper>();
        const RealVector qtb = (qr.householderQ().transpose() * b).head(2 * n);
        stacked.middleRows(e * n, n) = r.block(n, n, n, n);
        rhs.segment(e * n, n) = qtb.tail(n);
    }

    RealVector colscale = stacked.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < n; ++j)
        if (colscale(j) == 0.0)
            colscale(j) = 1.0;
    const RealMatrix scaled = stacked * colscale.cwiseInverse().asDiagonal();
    const RealVector sigma = Eigen::CompleteOrthogonalDecomposition<RealMatrix>(scaled).solve(rhs).cwiseQuotient(colscale);

    // Zeros of sigma(x) = 1 + sum r~ phi: eig(A - b r~^T) in real block form.
    RealMatrix h = RealMatrix::Zero(n, n);
    RealVector bvec = RealVector::Zero(n);
    Eigen::Index col = 0;
    for (const auto& a : poles) {
        if (a.imag() == 0.0) {
            h(col, col) = a.real();
            bvec(col) = 1.0;
            ++col;
        } else {
            h(col, col) = a.real();
            h(col, col + 1) = a.imag();
            h(col + 1, col) = -a.imag();
            h(col + 1, col + 1) = a.real();
            bvec(col) = 2.0;
            col += 2;
        }
    }
    h -= bvec * sigma.transpose();
    Eigen::EigenSolver<RealMatrix> solver(h, false);
    PoleList next;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        const Complex z = solver.eigenvalues()(i);
        if (z.imag() >= 0.0)
            next.push_back(z);
    }
    return next;
}

struct Candidate {
    PoleResidueModel model;
    std::vector<double> quality;
    bool sign_flipped = false;
    double residual = std::numeric_limits<double>::infinity();
    double max_residual = std::numeric_limits<double>::infinity();
};

std::vector<double> realize_poles(const PoleList& poles)
{
    std::vector<double> real;
    for (const auto& a : poles)
        real.push_back(std::max(0.0, a.real()));
    std::sort(real.begin(), real.end());
    std::vector<double> unique;
    for (double p : real) {
        if (unique.empty() || p - unique.back() > 1e-10 * std::max(1.0, p))
            unique.push_back(p);
    }
    return unique;
}

void score(const SweepSamples& samples, Candidate& cand)
{
    double sum = 0.0;
    double worst = 0.0;
    try {
        for (std::size_t i = 0; i < samples.Z.size(); ++i) {
            const ComplexMatrix z = eval_impedance(cand.model, wavenumber_from_hz(samples.frequencies_hz[i]));
            const double ref = samples.Z[i].norm();
            const double err = (z - samples.Z[i]).norm() / (ref > 0.0 ? ref : 1.0);
            sum += err;
            worst = std::max(worst, err);
        }
    } catch (const Error&) {
        return; // a fitted pole sits on a sample; leave the candidate at +inf
    }
    cand.residual = sum / static_cast<double>(samples.Z.size());
    cand.max_residual = worst;
    if (!std::isfinite(cand.residual))
        cand.residual = cand.max_residual = std::numeric_limits<double>::infinity();
}

Candidate fit_residues(const SweepSamples& samples, const FitProblem& fp, const std::vector<double>& poles,
                       double eta0)
{
    Candidate cand;
    cand.model.ports = fp.ports;
    cand.model.eta0 = eta0;
    const auto ns = fp.x.size();
    const auto n = static_cast<Eigen::Index>(poles.size());
    const auto ne = static_cast<Eigen::Index>(fp.entries.size());

    RealMatrix a(ns, n);
    RealMatrix b(ns, ne);
    for (Eigen::Index i = 0; i < ns; ++i) {
        const double w = fp.weight(i);
        for (Eigen::Index m = 0; m < n; ++m)
            a(i, m) = w / (poles[static_cast<std::size_t>(m)] - fp.x(i));
        for (Eigen::Index e = 0; e < ne; ++e)
            b(i, e) = w * fp.data[static_cast<std::size_t>(e)](i);
    }
    if (!a.allFinite())
        return cand;
    RealVector colscale = a.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < n; ++j)
        if (colscale(j) == 0.0)
            colscale(j) = 1.0;
    const RealMatrix coeffs = colscale.cwiseInverse().asDiagonal() *
                              Eigen::CompleteOrthogonalDecomposition<RealMatrix>(a * colscale.cwiseInverse().asDiagonal())
                                  .solve(b);

    const double lo = fp.x.minCoeff();
    const double hi = fp.x.maxCoeff();
    const auto p = static_cast<Eigen::Index>(fp.ports);
    for (Eigen::Index m = 0; m < n; ++m) {
        RealMatrix residue(p, p);
        for (Eigen::Index e = 0; e < ne; ++e) {
            const auto [r, c] = fp.entries[static_cast<std::size_t>(e)];
            residue(r, c) = residue(c, r) = coeffs(m, e);
        }
        if (residue.cwiseAbs().maxCoeff() == 0.0)
            continue;
        const auto projected = rank1_project(residue);
        const double pole = poles[static_cast<std::size_t>(m)];
        PoleResidueTerm term;
        term.k = std::sqrt(pole * fp.scale);
        term.c = projected.c * std::sqrt(fp.scale);
        term.inband = pole >= lo && pole <= hi;
        cand.model.terms.push_back(std::move(term));
        cand.quality.push_back(projected.quality);
        cand.sign_flipped = cand.sign_flipped || projected.sign_flipped;
    }
    score(samples, cand);
    return cand;
}

// Damped Gauss-Newton on the rank-1 parameters (p_m, c_m) in the normalized
// variable, starting from the projected candidate.
Candidate polish(const SweepSamples& samples, const FitProblem& fp, const Candidate& start, double eta0,
                 std::size_t max_iters)
{
    const auto p = static_cast<Eigen::Index>(fp.ports);
    const auto n = static_cast<Eigen::Index>(start.model.terms.size());
    const auto ne = static_cast<Eigen::Index>(fp.entries.size());
    const auto ns = fp.x.size();
    const auto stride = 1 + p;
    if (n == 0)
        return start;

    RealVector theta(n * stride);
    for (Eigen::Index m = 0; m < n; ++m) {
        const auto& t = start.model.terms[static_cast<std::size_t>(m)];
        theta(m * stride) = t.k * t.k / fp.scale;
        theta.segment(m * stride + 1, p) = t.c / std::sqrt(fp.scale);
    }

    auto residual = [&](const RealVector& th, RealMatrix* jac) {
        RealVector r(ns * ne);
        if (jac)
            jac->setZero(ns * ne, th.size());
        for (Eigen::Index i = 0; i < ns; ++i) {
            const double w = fp.weight(i);
            for (Eigen::Index e = 0; e < ne; ++e)
                r(i * ne + e) = -w * fp.data[static_cast<std::size_t>(e)](i);
            for (Eigen::Index m = 0; m < n; ++m) {
                const double inv = 1.0 / (th(m * stride) - fp.x(i));
                const auto c = th.segment(m * stride + 1, p);
                for (Eigen::Index e = 0; e < ne; ++e) {
                    const auto [a, b] = fp.entries[static_cast<std::size_t>(e)];
                    const Eigen::Index row = i * ne + e;
                    r(row) += w * c(a) * c(b) * inv;
                    if (!jac)
                        continue;
                    (*jac)(row, m * stride) = -w * c(a) * c(b) * inv * inv;
                    (*jac)(row, m * stride + 1 + a) += w * c(b) * inv;
                    (*jac)(row, m * stride + 1 + b) += w * c(a) * inv;
                }
            }
        }
        return r;
    };

    RealMatrix jac;
    RealVector r = residual(theta, &jac);
    double f = r.norm();
    double lambda = 1e-3;
    for (std::size_t it = 0; it < max_iters && std::isfinite(f); ++it) {
        const RealVector colnorm = jac.colwise().norm().transpose().cwiseMax(1e-300);
        bool accepted = false;
        while (lambda < 1e16) {
            // min |J d + r|^2 + lambda |diag(colnorm) d|^2 via QR, not the normal equations
            RealMatrix a(jac.rows() + jac.cols(), jac.cols());
            a.topRows(jac.rows()) = jac;
            a.bottomRows(jac.cols()) = (std::sqrt(lambda) * colnorm).asDiagonal();
            RealVector b = RealVector::Zero(a.rows());
            b.head(r.size()) = -r;
            const RealMatrix scaled = a * colnorm.cwiseInverse().asDiagonal();
            RealVector next = theta + colnorm.cwiseInverse().cwiseProduct(scaled.colPivHouseholderQr().solve(b));
            for (Eigen::Index m = 0; m < n; ++m)
                next(m * stride) = std::max(next(m * stride), 0.0);
            RealMatrix jn;
            const RealVector rn = residual(next, &jn);
            const double fn = rn.norm();
            if (std::isfinite(fn) && fn < f) {
                const double gain = (f - fn) / f;
                theta = next;
                r = rn;
                jac = std::move(jn);
                f = fn;
                lambda = std::max(lambda / 3.0, 1e-15);
                accepted = true;
                if (gain < 1e-15)
                    lambda = 1e16;
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted || lambda >= 1e16)
            break;
    }

    Candidate out;
    out.model.ports = fp.ports;
    out.model.eta0 = eta0;
    const double lo = fp.x.minCoeff();
    const double hi = fp.x.maxCoeff();
    for (Eigen::Index m = 0; m < n; ++m) {
        PoleResidueTerm term;
        const double pole = theta(m * stride);
        term.k = std::sqrt(pole * fp.scale);
        term.c = theta.segment(m * stride + 1, p) * std::sqrt(fp.scale);
        for (Eigen::Index i = 0; i < p; ++i) {
            if (term.c(i) != 0.0) {
                if (term.c(i) < 0.0)
                    term.c = -term.c;
                break;
            }
        }
        term.inband = pole >= lo && pole <= hi;
        out.model.terms.push_back(std::move(term));
    }
    std::sort(out.model.terms.begin(), out.model.terms.end(),
              [](const PoleResidueTerm& a, const PoleResidueTerm& b) { return a.k < b.k; });
    if (!validate_model(out.model).empty())
        return start;
    score(samples, out);
    return out;
}

PoleList initial_poles(const FitProblem& fp, std::size_t n_poles)
{
    const auto ns = fp.x.size();
    const double lo = fp.x.minCoeff();
    const double hi = fp.x.maxCoeff();
    const double span = hi - lo;

    // Static candidate when the data magnitude grows toward DC.
    const Eigen::Index decile = std::max<Eigen::Index>(1, ns / 10);
    auto median_norm = [&](Eigen::Index first) {
        std::vector<double> v;
        for (Eigen::Index i = first; i < first + decile; ++i)
            v.push_back(1.0 / fp.weight(i));
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
        return v[v.size() / 2];
    };
    const bool dc_growth = median_norm(0) > median_norm(ns - decile);

    PoleList poles;
    std::size_t remaining = n_poles;
    if (dc_growth && remaining > 0) {
        poles.emplace_back(0.0, 0.0);
        --remaining;
    }
    if (remaining % 2 == 1) {
        poles.emplace_back(hi + 0.5 * span, 0.0);
        --remaining;
    }
    const std::size_t pairs = remaining / 2;
    for (std::size_t i = 0; i < pairs; ++i) {
        const double beta = pairs == 1 ? 0.5 * (lo + hi) : lo + span * static_cast<double>(i) / static_cast<double>(pairs - 1);
        const double alpha = span / static_cast<double>(std::max<std::size_t>(pairs, 1)) / 4.0;
        poles.emplace_back(beta, alpha);
    }
    return poles;
}

} // namespace

FitReport fit_pole_residue(const SweepSamples& samples, const FitOptions& options)
{
    if (options.n_poles == 0)
        throw Error(ErrorCode::InsufficientSamples, "n_poles must be >= 1");
    if (samples.Z.size() < 2 * options.n_poles + 2)
        throw Error(ErrorCode::InsufficientSamples, std::to_string(samples.Z.size()) + " samples cannot determine " +
                                                        std::to_string(options.n_poles) + " poles");
    require_valid(samples);
    if (!(options.eta0 > 0.0))
        throw Error(ErrorCode::InvalidArgument, "eta0 must be > 0");

    const FitProblem fp = build_problem(samples, options.eta0);
    PoleList poles = initial_poles(fp, options.n_poles);

    FitReport report;
    Candidate best;
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t it = 1; it <= std::max<std::size_t>(options.max_iters, 1); ++it) {
        poles = relocate(fp, poles);
        report.iterations = it;
        Candidate cand = fit_residues(samples, fp, realize_poles(poles), options.eta0);
        if (cand.residual < best.residual) {
            best = cand;
            report.residual_history.push_back(best.residual);
        }
        const double change = std::abs(previous - cand.residual);
        previous = cand.residual;
        if (std::isfinite(cand.residual) && change < std::max(options.tol * cand.residual, 1e-13)) {
            report.converged = true;
            break;
        }
    }

    if (std::isfinite(best.residual)) {
        Candidate polished = polish(samples, fp, best, options.eta0, 10 * options.max_iters);
        if (polished.residual < best.residual) {
            // quality of the unconstrained residues at the polished poles
            std::vector<double> poles;
            for (const auto& t : polished.model.terms)
                poles.push_back(t.k * t.k / fp.scale);
            polished.quality = fit_residues(samples, fp, poles, options.eta0).quality;
            if (polished.quality.size() != polished.model.terms.size())
                polished.quality.assign(polished.model.terms.size(), 0.0);
            best = std::move(polished);
            report.residual_history.push_back(best.residual);
        }
    }

    report.model = std::move(best.model);
    report.rank1_quality = std::move(best.quality);
    report.sign_flipped = best.sign_flipped;
    report.residual = best.residual;
    report.max_residual = best.max_residual;
    return report;
}

} // namespace emcm
