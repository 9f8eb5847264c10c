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

#include "emcm/cli.hpp"
#include "emcm/emcm.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace emcm::test {

inline std::filesystem::path fixture(const std::string& name)
{
    return std::filesystem::path(EMCM_FIXTURE_DIR) / name;
}

inline ClassicalCouplingMatrix load_fixture(const std::string& name)
{
    return read_matrix_file(fixture(name)).classical();
}

// Haar-ish orthogonal matrix from the QR of a Gaussian matrix.
inline RealMatrix random_orthogonal(Eigen::Index n, std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    RealMatrix a(n, n);
    for (Eigen::Index i = 0; i < a.size(); ++i)
        a.data()[i] = g(rng);
    Eigen::HouseholderQR<RealMatrix> qr(a);
    RealMatrix q = qr.householderQ();
    const RealMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < n; ++j)
        if (r(j, j) < 0.0)
            q.col(j) = -q.col(j);
    return q;
}

inline RealMatrix random_symmetric(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0)
{
    std::normal_distribution<double> g(0.0, scale);
    RealMatrix a(n, n);
    for (Eigen::Index i = 0; i < a.size(); ++i)
        a.data()[i] = g(rng);
    return 0.5 * (a + a.transpose());
}

// N distinct poles inside the band, kept off the band center by a small gap.
inline PoleResidueModel random_inband_model(std::mt19937_64& rng, std::size_t ports, std::size_t order,
                                            const FrequencyBand& band)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g;
    PoleResidueModel model;
    model.ports = ports;
    model.band = band;
    const double k1 = band.k1();
    const double k2 = band.k2();
    const double gap = 1e-3 * (k2 - k1);
    std::vector<double> ks;
    while (ks.size() < order) {
        const double k = k1 + (k2 - k1) * u(rng);
        if (std::abs(k - band.k0()) < gap)
            continue;
        if (std::any_of(ks.begin(), ks.end(), [&](double x) { return std::abs(x - k) < gap; }))
            continue;
        ks.push_back(k);
    }
    for (double k : ks) {
        PoleResidueTerm t;
        t.k = k;
        t.c.resize(static_cast<Eigen::Index>(ports));
        for (auto& v : t.c)
            v = 0.05 * g(rng);
        t.inband = true;
        model.terms.push_back(std::move(t));
    }
    return model;
}

inline PoleResidueTerm make_term(double k, std::initializer_list<double> c, bool inband = false)
{
    PoleResidueTerm t;
    t.k = k;
    t.c = Eigen::Map<const RealVector>(c.begin(), static_cast<Eigen::Index>(c.size()));
    t.inband = inband;
    return t;
}

// Two-port model with six resonances in 10-10.6 GHz, a static term and four
// higher-order poles spread across an 8-13 GHz sweep.
inline PoleResidueModel synthetic_fit_model(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    PoleResidueModel m;
    m.ports = 2;
    auto term = [&](double f_hz, bool inband, double scale) {
        PoleResidueTerm t;
        t.k = f_hz > 0.0 ? wavenumber_from_hz(f_hz) : 0.0;
        t.c = RealVector(2);
        t.c << scale * (1 + 0.5 * u(rng)), scale * (1 + 0.5 * u(rng)) * (u(rng) < 0 ? -1 : 1);
        t.inband = inband;
        m.terms.push_back(t);
    };
    const double f1 = 10e9;
    const double f2 = 10.6e9;
    for (int n = 0; n < 6; ++n)
        term(f1 + (f2 - f1) * (n + 0.5 + 0.3 * u(rng)) / 6, true, 0.05);
    term(0.0, false, 1.0);
    term(7.2e9, false, 0.5);
    term(12.03e9, false, 0.3);
    term(12.81e9, false, 0.3);
    term(17e9, false, 0.6);
    return m;
}

inline SweepSamples sample_model(const PoleResidueModel& m, double f_start, double f_stop, std::size_t points)
{
    SweepSamples s;
    s.frequencies_hz = linear_grid(f_start, f_stop, points);
    for (double f : s.frequencies_hz)
        s.Z.push_back(eval_impedance(m, wavenumber_from_hz(f)));
    return s;
}

// Largest relative distance from a reference pole to the nearest fitted pole.
inline double worst_pole_error(const std::vector<PoleResidueTerm>& reference, const PoleResidueModel& fitted)
{
    double worst = 0.0;
    for (const auto& r : reference) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& t : fitted.terms)
            best = std::min(best, std::abs(t.k - r.k) / r.k);
        worst = std::max(worst, best);
    }
    return worst;
}

inline double max_abs(const RealMatrix& a)
{
    return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

inline CliResult cli(const std::vector<std::string>& args)
{
    std::ostringstream out;
    std::ostringstream err;
    CliResult r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

inline std::filesystem::path scratch_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("emcm_tests_" + name);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace emcm::test
