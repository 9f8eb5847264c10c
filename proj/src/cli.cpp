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

#include "emcm/cli.hpp"

#include "emcm/emcm.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <ostream>

namespace emcm {
namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

FrequencyBand parse_band_flag(const std::string& text)
{
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw UsageError("--band expects f1:f2 in Hz, got '" + text + "'");
    char* end = nullptr;
    const std::string a = text.substr(0, colon);
    const std::string b = text.substr(colon + 1);
    const double f1 = std::strtod(a.c_str(), &end);
    if (a.empty() || *end != '\0')
        throw UsageError("--band: bad f1 '" + a + "'");
    const double f2 = std::strtod(b.c_str(), &end);
    if (b.empty() || *end != '\0')
        throw UsageError("--band: bad f2 '" + b + "'");
    return make_band(f1, f2);
}

FrequencyBand resolve_band(const std::string& flag, const std::optional<FrequencyBand>& fallback, const char* what)
{
    if (!flag.empty())
        return parse_band_flag(flag);
    if (fallback)
        return *fallback;
    throw UsageError(std::string(what) + " has no band; pass --band f1:f2");
}

std::string hz(double f)
{
    return format_number(f);
}

ClassicalCouplingMatrix load_classical(const std::string& path, const std::string& band_flag)
{
    MatrixDocument doc = read_matrix_file(path);
    doc.band = resolve_band(band_flag, doc.band, path.c_str());
    return doc.classical();
}

void write_or_print(const std::string& path, const std::string& text, std::ostream& out)
{
    if (path.empty() || path == "-")
        out << text;
    else
        write_text_file(path, text);
}

// ---------------------------------------------------------------------------

struct EvalArgs {
    std::string model;
    double f_start = 0.0;
    double f_stop = 0.0;
    std::size_t points = 201;
    double zref = 0.0;
    std::string out;
    std::string format = "touchstone";
    std::string param = "S";
    unsigned threads = 0;
};

int run_eval(const EvalArgs& a, CLI::App& cmd, std::ostream& out)
{
    const PoleResidueModel model = read_model_file(a.model);
    const bool have_start = cmd.count("--f-start") > 0;
    const bool have_stop = cmd.count("--f-stop") > 0;
    double f_start = a.f_start;
    double f_stop = a.f_stop;
    if (!have_start || !have_stop) {
        if (!model.band)
            throw UsageError("model has no band; pass --f-start and --f-stop");
        if (!have_start)
            f_start = model.band->f1_hz();
        if (!have_stop)
            f_stop = model.band->f2_hz();
    }
    if (a.points == 0)
        throw UsageError("--points must be >= 1");
    const auto grid = linear_grid(f_start, f_stop, a.points);
    const double zref = cmd.count("--zref") > 0 ? a.zref : model.eta0;
    SParameterSweep sweep;
    NetworkParameter kind = NetworkParameter::S;
    if (a.param == "Z") {
        sweep = sweep_model_impedance(model, grid, a.threads);
        sweep.z_ref = zref;
        kind = NetworkParameter::Z;
    } else {
        sweep = sweep_model(model, grid, zref, a.threads);
    }
    const std::string text = a.format == "csv" ? csv_text(sweep, kind) : touchstone_text(sweep, kind);
    write_or_print(a.out, text, out);
    return 0;
}

// ---------------------------------------------------------------------------

struct NarrowbandArgs {
    std::string model;
    std::string band;
    std::string out;
    std::string oob_out;
    double zref = kFreeSpaceImpedance;
};

int run_narrowband(const NarrowbandArgs& a, std::ostream& out)
{
    const PoleResidueModel model = read_model_file(a.model);
    const FrequencyBand band = resolve_band(a.band, model.band, a.model.c_str());
    NarrowbandModel nb = narrowband_model(model, band);
    // normalized so that z_ref = 1 reproduces S at the requested reference
    nb.classical.D /= std::sqrt(a.zref);
    nb.outofband.Z0 /= a.zref;
    nb.outofband.Z1 /= a.zref;

    MatrixDocument doc = MatrixDocument::from(nb.classical);
    doc.comments = {"narrowband coupling matrix", "normalized to z_ref " + format_number(a.zref)};
    write_or_print(a.out, serialize_matrix(doc), out);
    const std::string oob_path = a.oob_out.empty() && !a.out.empty() && a.out != "-" ? a.out + ".oob.json" : a.oob_out;
    if (!oob_path.empty())
        write_text_file(oob_path, serialize_affine(nb.outofband));
    return 0;
}

// ---------------------------------------------------------------------------

struct InverseArgs {
    std::string matrix;
    std::string band;
    std::string out;
    double eta0 = kFreeSpaceImpedance;
    double zref = 1.0;
};

int run_inverse(const InverseArgs& a, std::ostream& out)
{
    ClassicalCouplingMatrix ccm = load_classical(a.matrix, a.band);
    ccm.D *= std::sqrt(a.zref);
    const EmCouplingMatrix em = inverse_reduce(ccm, a.eta0);
    const auto tf = to_transversal(em);

    PoleResidueModel model;
    model.ports = ccm.ports();
    model.eta0 = a.eta0;
    model.band = ccm.band;
    for (Eigen::Index n = 0; n < tf.matrix.K.rows(); ++n) {
        PoleResidueTerm term;
        term.k = std::sqrt(std::max(tf.matrix.K(n, n), 0.0));
        term.c = tf.matrix.C.col(n);
        term.inband = true;
        model.terms.push_back(std::move(term));
    }
    if (a.out.empty() || a.out == "-") {
        out << serialize_model(model);
    } else {
        write_model_file(a.out, model);
        out << "eigenresonances_hz\n";
        for (const auto& t : model.terms)
            out << hz(hz_from_wavenumber(t.k)) << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct BasisArgs {
    std::string matrix;
    std::string band;
    std::string apply;
    std::string out;
    std::string transform_out;
    bool gauge = false;
};

int run_basis(const BasisArgs& a, std::ostream& out)
{
    const ClassicalCouplingMatrix ccm = load_classical(a.matrix, a.band);
    ClassicalCouplingMatrix result = ccm;
    std::optional<RealMatrix> transform;
    if (!a.apply.empty()) {
        result = apply_basis(ccm, BasisTransform(parse_plain_matrix(read_text_file(a.apply))));
    } else {
        const auto tf = to_transversal(ccm);
        result = tf.matrix;
        transform = tf.transform.matrix();
    }
    if (a.gauge)
        result = fix_sign_gauge(result);
    MatrixDocument doc = MatrixDocument::from(result);
    doc.comments = {a.apply.empty() ? "transversal form" : "transformed basis"};
    write_or_print(a.out, serialize_matrix(doc), out);
    if (transform) {
        if (!a.transform_out.empty())
            write_text_file(a.transform_out, serialize_plain_matrix(*transform));
        else if (!a.out.empty() && a.out != "-")
            write_text_file(a.out + ".transform", serialize_plain_matrix(*transform));
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct ZerosArgs {
    std::string matrix;
    std::string band;
    std::string out;
    ZeroScanOptions scan;
    std::size_t input = 1;
    std::size_t output = 2;
};

int run_zeros(ZerosArgs a, std::ostream& out)
{
    const ClassicalCouplingMatrix ccm = load_classical(a.matrix, a.band);
    if (a.input == 0 || a.output == 0)
        throw UsageError("port numbers are 1-based");
    a.scan.input_port = a.input - 1;
    a.scan.output_port = a.output - 1;
    const ZeroSet zs = find_zeros(ccm, a.scan);
    if (!a.out.empty())
        write_or_print(a.out, serialize_zeros(zs, ccm.band), out);
    if (a.out == "-")
        return 0;
    auto list = [&](const char* name, const std::vector<double>& ks) {
        out << name << " " << ks.size() << "\n";
        for (double k : ks)
            out << "  K " << format_number(k) << "  f_hz " << hz(hz_from_wavenumber(bandpass_map(k, ccm.band)))
                << "\n";
    };
    list("transmission_zeros", zs.transmission_zeros);
    auto complex_list = [&](const char* name, const std::vector<Complex>& ks) {
        out << name << " " << ks.size() << "\n";
        for (const Complex k : ks)
            out << "  K " << format_number(k.real()) << " " << format_number(k.imag()) << "j  f_hz "
                << hz(hz_from_wavenumber(bandpass_map(k.real(), ccm.band))) << "\n";
    };
    complex_list("reflection_zeros", zs.reflection_zeros);
    complex_list("poles", zs.prototype_poles);
    return 0;
}

// ---------------------------------------------------------------------------

struct FitModelArgs {
    std::string samples;
    std::string out;
    std::string band;
    FitOptions fit;
    double zref = kFreeSpaceImpedance;
};

int run_fit_model(FitModelArgs a, std::ostream& out, std::ostream& err)
{
    const SweepSamples samples = read_samples(a.samples, a.zref);
    FitReport report = fit_pole_residue(samples, a.fit);
    if (!a.band.empty()) {
        const FrequencyBand band = parse_band_flag(a.band);
        report.model.band = band;
        const auto split = split_inband(report.model, band);
        report.model.terms.clear();
        report.model.terms.insert(report.model.terms.end(), split.inband.begin(), split.inband.end());
        report.model.terms.insert(report.model.terms.end(), split.outofband.begin(), split.outofband.end());
    }
    write_or_print(a.out, serialize_model(report.model), out);
    std::ostream& log = (a.out.empty() || a.out == "-") ? err : out;
    log << "residual_mean " << format_number(report.residual) << "\n";
    log << "residual_max " << format_number(report.max_residual) << "\n";
    log << "iterations " << report.iterations << (report.converged ? " converged" : " not-converged") << "\n";
    if (report.rank1_warning())
        err << "warning: some residues are not rank-1 (quality above " << format_number(kRank1Warning) << ")\n";
    if (report.sign_flipped)
        err << "warning: some residues had a negative dominant eigenvalue\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct FitClassicalArgs {
    std::string targets;
    std::string target_matrix;
    std::string mask;
    std::string init;
    std::string band;
    std::string out;
    ClassicalFitOptions fit;
    std::size_t input = 1;
    std::size_t output = 2;
};

int run_fit_classical(FitClassicalArgs a, std::ostream& out, std::ostream& err)
{
    if (a.targets.empty() == a.target_matrix.empty())
        throw UsageError("pass exactly one of --targets and --target-matrix");
    if (a.input == 0 || a.output == 0)
        throw UsageError("port numbers are 1-based");
    a.fit.input_port = a.input - 1;
    a.fit.output_port = a.output - 1;
    const ClassicalCouplingMatrix init = load_classical(a.init, a.band);
    const TopologyMask mask = a.mask.empty() ? TopologyMask::from_pattern(init) : read_mask_file(a.mask);
    ZeroSet targets;
    if (!a.targets.empty()) {
        targets = parse_zeros(read_text_file(a.targets));
    } else {
        ZeroScanOptions scan;
        scan.input_port = a.fit.input_port;
        scan.output_port = a.fit.output_port;
        scan.z_ref = a.fit.z_ref;
        targets = find_zeros(load_classical(a.target_matrix, a.band), scan);
    }
    const ClassicalFitResult result = fit_classical(targets, mask, init, a.fit);
    MatrixDocument doc = MatrixDocument::from(result.matrix);
    doc.comments = {"fitted coupling matrix"};
    write_or_print(a.out, serialize_matrix(doc), out);
    std::ostream& log = (a.out.empty() || a.out == "-") ? err : out;
    log << "residual " << format_number(result.residual) << "\n";
    log << "iterations " << result.iterations << (result.converged ? " converged" : " not-converged") << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct CompareArgs {
    std::string a;
    std::string b;
    std::string support;
    std::size_t top = 10;
    double min_delta = 0.0;
};

int run_compare(const CompareArgs& c, std::ostream& out)
{
    const MatrixDocument a = read_matrix_file(c.a);
    const MatrixDocument b = read_matrix_file(c.b);
    CompareOptions options;
    options.top_k = c.top;
    options.min_delta = c.min_delta;
    if (!c.support.empty()) {
        const RealMatrix s = read_matrix_file(c.support).matrix;
        options.support = (s.array() != 0.0).matrix();
    }
    const ComparisonReport report = compare_coupling(a.matrix, b.matrix, options);
    out << "row col a b delta\n";
    for (const auto& e : report.entries)
        out << e.row << " " << e.col << " " << format_number(e.value_a) << " " << format_number(e.value_b) << " "
            << format_number(e.delta) << "\n";
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Coupled-resonator EM coupling matrix toolbox", "emcm"};
    app.require_subcommand(1);

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "Sweep a pole-residue model and export S or Z parameters");
    eval->add_option("--model", eval_args.model, "Model file")->required();
    eval->add_option("--f-start", eval_args.f_start, "First frequency (Hz), default band f1");
    eval->add_option("--f-stop", eval_args.f_stop, "Last frequency (Hz), default band f2");
    eval->add_option("--points", eval_args.points, "Number of grid points")->capture_default_str();
    eval->add_option("--zref", eval_args.zref, "Reference impedance (ohm), default eta0");
    eval->add_option("--out", eval_args.out, "Output file, stdout when omitted");
    eval->add_option("--format", eval_args.format, "touchstone or csv")
        ->check(CLI::IsMember({"touchstone", "csv"}))
        ->capture_default_str();
    eval->add_option("--param", eval_args.param, "S or Z")->check(CLI::IsMember({"S", "Z"}))->capture_default_str();
    eval->add_option("--threads", eval_args.threads, "Worker threads, 0 = EMCM_THREADS or 1");

    NarrowbandArgs nb_args;
    auto* nb = app.add_subcommand("narrowband", "Reduce a model to a classical coupling matrix plus out-of-band term");
    nb->add_option("--model", nb_args.model, "Model file")->required();
    nb->add_option("--band", nb_args.band, "Band f1:f2 in Hz, default the model band");
    nb->add_option("--out", nb_args.out, "Matrix file, stdout when omitted");
    nb->add_option("--oob-out", nb_args.oob_out, "Out-of-band term file, default <out>.oob.json");
    nb->add_option("--zref", nb_args.zref, "Port normalization impedance (ohm)")->capture_default_str();

    InverseArgs inv_args;
    auto* inv = app.add_subcommand("inverse", "Recover the EM model behind a classical coupling matrix");
    inv->add_option("matrix", inv_args.matrix, "Matrix file")->required();
    inv->add_option("--band", inv_args.band, "Band f1:f2 in Hz, default the file band");
    inv->add_option("--out", inv_args.out, "Model file, stdout when omitted");
    inv->add_option("--eta0", inv_args.eta0, "Wave impedance (ohm)")->capture_default_str();
    inv->add_option("--zref", inv_args.zref, "Normalization impedance of the matrix file")->capture_default_str();

    BasisArgs basis_args;
    auto* basis = app.add_subcommand("basis", "Transversal form of a coupling matrix, or apply a transform");
    basis->add_option("matrix", basis_args.matrix, "Matrix file")->required();
    basis->add_option("--band", basis_args.band, "Band f1:f2 in Hz, default the file band");
    basis->add_option("--apply", basis_args.apply, "Orthogonal transform to apply (plain matrix file)");
    basis->add_option("--out", basis_args.out, "Matrix file, stdout when omitted");
    basis->add_option("--transform-out", basis_args.transform_out, "Transform file, default <out>.transform");
    basis->add_flag("--gauge", basis_args.gauge, "Fix the resonator sign gauge");

    ZerosArgs zeros_args;
    auto* zeros = app.add_subcommand("zeros", "Transmission and reflection zeros and poles of a coupling matrix");
    zeros->add_option("matrix", zeros_args.matrix, "Matrix file")->required();
    zeros->add_option("--band", zeros_args.band, "Band f1:f2 in Hz, default the file band");
    zeros->add_option("--out", zeros_args.out, "Zero list (JSON), '-' for stdout");
    zeros->add_option("--k-lo", zeros_args.scan.k_lo, "Scan start (normalized)")->capture_default_str();
    zeros->add_option("--k-hi", zeros_args.scan.k_hi, "Scan stop (normalized)")->capture_default_str();
    zeros->add_option("--grid", zeros_args.scan.grid_points, "Scan grid points")->capture_default_str();
    zeros->add_option("--input", zeros_args.input, "Input port (1-based)")->capture_default_str();
    zeros->add_option("--output", zeros_args.output, "Output port (1-based)")->capture_default_str();
    zeros->add_option("--zref", zeros_args.scan.z_ref, "Normalized port impedance")->capture_default_str();

    FitModelArgs fm_args;
    auto* fm = app.add_subcommand("fit-model", "Fit a pole-residue model to sampled impedance or S data");
    fm->add_option("samples", fm_args.samples, "CSV or .sNp file")->required();
    fm->add_option("--poles", fm_args.fit.n_poles, "Number of poles, static term included")->required();
    fm->add_option("--tol", fm_args.fit.tol, "Relative residual change tolerance")->capture_default_str();
    fm->add_option("--max-iters", fm_args.fit.max_iters, "Iteration limit")->capture_default_str();
    fm->add_option("--eta0", fm_args.fit.eta0, "Wave impedance (ohm)")->capture_default_str();
    fm->add_option("--zref", fm_args.zref, "Reference impedance of S data in CSV files")->capture_default_str();
    fm->add_option("--band", fm_args.band, "Band f1:f2 in Hz for the in-band flags");
    fm->add_option("--out", fm_args.out, "Model file, stdout when omitted");

    FitClassicalArgs fc_args;
    auto* fc = app.add_subcommand("fit-classical", "Fit a coupling matrix to target zeros and poles under a mask");
    fc->add_option("--targets", fc_args.targets, "Zero list (JSON)");
    fc->add_option("--target-matrix", fc_args.target_matrix, "Take targets from this matrix file");
    fc->add_option("--mask", fc_args.mask, "Topology mask file, default the init pattern");
    fc->add_option("--init", fc_args.init, "Initial matrix file")->required();
    fc->add_option("--band", fc_args.band, "Band f1:f2 in Hz, default the file band");
    fc->add_option("--out", fc_args.out, "Fitted matrix file, stdout when omitted");
    fc->add_option("--max-iters", fc_args.fit.max_iters, "Iteration limit")->capture_default_str();
    fc->add_option("--tol", fc_args.fit.tol, "Residual tolerance")->capture_default_str();
    fc->add_option("--input", fc_args.input, "Input port (1-based)")->capture_default_str();
    fc->add_option("--output", fc_args.output, "Output port (1-based)")->capture_default_str();

    CompareArgs cmp_args;
    auto* cmp = app.add_subcommand("compare", "Rank coupling differences between two matrix files");
    cmp->add_option("a", cmp_args.a, "First matrix file")->required();
    cmp->add_option("b", cmp_args.b, "Second matrix file")->required();
    cmp->add_option("--top", cmp_args.top, "Entries to list, 0 = all")->capture_default_str();
    cmp->add_option("--min-delta", cmp_args.min_delta, "Drop entries below this delta")->capture_default_str();
    cmp->add_option("--support", cmp_args.support, "Restrict to the nonzero pattern of this matrix file");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    try {
        if (*eval)
            return run_eval(eval_args, *eval, out);
        if (*nb)
            return run_narrowband(nb_args, out);
        if (*inv)
            return run_inverse(inv_args, out);
        if (*basis)
            return run_basis(basis_args, out);
        if (*zeros)
            return run_zeros(zeros_args, out);
        if (*fm)
            return run_fit_model(fm_args, out, err);
        if (*fc)
            return run_fit_classical(fc_args, out, err);
        if (*cmp)
            return run_compare(cmp_args, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace emcm
