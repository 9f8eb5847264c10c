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

#include "emcm/io.hpp"

#include "emcm/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <regex>
#include <sstream>

namespace emcm {

using nlohmann::json;

std::string format_number(double value)
{
    if (value == 0.0)
        return "0";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", value);
    return buf;
}

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad())
        throw Error(ErrorCode::Io, "read failed on '" + path.string() + "'");
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out)
        throw Error(ErrorCode::Io, "write failed on '" + path.string() + "'");
}

namespace {

[[noreturn]] void parse_fail(const std::string& message)
{
    throw Error(ErrorCode::Parse, message);
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& message)
{
    throw Error(ErrorCode::Parse, "line " + std::to_string(line) + ": " + message);
}

// strtod on a whole token, nothing else accepted.
bool to_double(std::string_view token, double& value)
{
    if (token.empty())
        return false;
    const std::string s(token);
    char* end = nullptr;
    errno = 0;
    value = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && errno != ERANGE && std::isfinite(value);
}

std::vector<std::string_view> split_ws(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
            ++i;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])))
            ++i;
        if (i > start)
            out.push_back(line.substr(start, i - start));
    }
    return out;
}

std::vector<std::string_view> split_lines(std::string_view text)
{
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos)
            end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        lines.push_back(line);
        start = end + 1;
    }
    return lines;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

// ---------------------------------------------------------------------------
// JSON field access with a path for error messages

json parse_json(std::string_view text)
{
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const auto upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + upto, '\n'));
        parse_fail(line, std::string("malformed JSON (") + e.what() + ")");
    }
}

const json& field(const json& obj, const std::string& name, const std::string& where)
{
    if (!obj.is_object())
        parse_fail("field '" + where + "': expected an object");
    const auto it = obj.find(name);
    if (it == obj.end())
        parse_fail("missing field '" + (where.empty() ? name : where + "." + name) + "'");
    return *it;
}

double number(const json& j, const std::string& where)
{
    if (!j.is_number())
        parse_fail("field '" + where + "': expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v))
        parse_fail("field '" + where + "': not finite");
    return v;
}

std::size_t count(const json& j, const std::string& where)
{
    if (!j.is_number_unsigned())
        parse_fail("field '" + where + "': expected a non-negative integer");
    return j.get<std::size_t>();
}

const json& array(const json& j, const std::string& where)
{
    if (!j.is_array())
        parse_fail("field '" + where + "': expected an array");
    return j;
}

void check_format(const json& doc, const std::string& expected)
{
    const json& f = field(doc, "format", "");
    if (!f.is_string() || f.get<std::string>() != expected)
        parse_fail("field 'format': expected \"" + expected + "\"");
}

json band_json(const FrequencyBand& band)
{
    return json{{"f1_hz", band.f1_hz()}, {"f2_hz", band.f2_hz()}};
}

FrequencyBand band_from_json(const json& j, const std::string& where)
{
    const double f1 = number(field(j, "f1_hz", where), where + ".f1_hz");
    const double f2 = number(field(j, "f2_hz", where), where + ".f2_hz");
    try {
        return make_band(f1, f2);
    } catch (const Error& e) {
        parse_fail("field '" + where + "': " + e.what());
    }
}

json complex_matrix_json(const ComplexMatrix& m)
{
    json re = json::array();
    json im = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json rr = json::array();
        json ri = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            rr.push_back(m(i, j).real());
            ri.push_back(m(i, j).imag());
        }
        re.push_back(std::move(rr));
        im.push_back(std::move(ri));
    }
    return json{{"re", re}, {"im", im}};
}

ComplexMatrix complex_matrix_from_json(const json& j, std::size_t n, const std::string& where)
{
    ComplexMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (const char* part : {"re", "im"}) {
        const std::string w = where + "." + part;
        const json& rows = array(field(j, part, where), w);
        if (rows.size() != n)
            parse_fail("field '" + w + "': expected " + std::to_string(n) + " rows");
        for (std::size_t r = 0; r < n; ++r) {
            const std::string wr = w + "[" + std::to_string(r) + "]";
            const json& row = array(rows[r], wr);
            if (row.size() != n)
                parse_fail("field '" + wr + "': expected " + std::to_string(n) + " entries");
            for (std::size_t c = 0; c < n; ++c) {
                const double v = number(row[c], wr + "[" + std::to_string(c) + "]");
                auto& e = m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
                e = part[0] == 'r' ? Complex(v, e.imag()) : Complex(e.real(), v);
            }
        }
    }
    return m;
}

} // namespace

// ---------------------------------------------------------------------------
// Model files

PoleResidueModel parse_model(std::string_view text)
{
    const json doc = parse_json(text);
    check_format(doc, "emcm-model");
    const std::size_t version = count(field(doc, "version", ""), "version");
    if (version != static_cast<std::size_t>(kModelFormatVersion))
        parse_fail("field 'version': unsupported version " + std::to_string(version));

    PoleResidueModel model;
    model.ports = count(field(doc, "ports", ""), "ports");
    if (model.ports == 0)
        parse_fail("field 'ports': must be >= 1");
    model.eta0 = number(field(doc, "eta0", ""), "eta0");
    if (!(model.eta0 > 0.0))
        parse_fail("field 'eta0': must be > 0");
    if (doc.contains("band") && !doc.at("band").is_null())
        model.band = band_from_json(doc.at("band"), "band");

    const json& terms = array(field(doc, "terms", ""), "terms");
    for (std::size_t n = 0; n < terms.size(); ++n) {
        const std::string w = "terms[" + std::to_string(n) + "]";
        PoleResidueTerm term;
        term.k = number(field(terms[n], "k", w), w + ".k");
        if (term.k < 0.0)
            parse_fail("field '" + w + ".k': must be >= 0");
        const json& c = array(field(terms[n], "c", w), w + ".c");
        if (c.size() != model.ports)
            parse_fail("field '" + w + ".c': length " + std::to_string(c.size()) + " differs from ports " +
                       std::to_string(model.ports));
        term.c.resize(static_cast<Eigen::Index>(c.size()));
        for (std::size_t p = 0; p < c.size(); ++p)
            term.c(static_cast<Eigen::Index>(p)) = number(c[p], w + ".c[" + std::to_string(p) + "]");
        const json& inband = field(terms[n], "inband", w);
        if (!inband.is_boolean())
            parse_fail("field '" + w + ".inband': expected true or false");
        term.inband = inband.get<bool>();
        model.terms.push_back(std::move(term));
    }
    const auto issues = validate_model(model);
    if (!issues.empty())
        parse_fail("invalid model: " + issues.front().message);
    return model;
}

std::string serialize_model(const PoleResidueModel& model)
{
    require_valid(model);
    json terms = json::array();
    for (const auto& t : model.terms) {
        json c = json::array();
        for (Eigen::Index p = 0; p < t.c.size(); ++p)
            c.push_back(t.c(p));
        terms.push_back(json{{"k", t.k}, {"c", c}, {"inband", t.inband}});
    }
    json doc = json::object();
    doc["format"] = "emcm-model";
    doc["version"] = kModelFormatVersion;
    doc["ports"] = model.ports;
    doc["eta0"] = model.eta0;
    if (model.band)
        doc["band"] = band_json(*model.band);
    doc["terms"] = terms;
    return doc.dump(2) + "\n";
}

PoleResidueModel read_model_file(const std::filesystem::path& path)
{
    return parse_model(read_text_file(path));
}

void write_model_file(const std::filesystem::path& path, const PoleResidueModel& model)
{
    write_text_file(path, serialize_model(model));
}

// ---------------------------------------------------------------------------
// Coupling matrix files

ClassicalCouplingMatrix MatrixDocument::classical() const
{
    if (!band)
        throw Error(ErrorCode::Validation, "matrix file has no band line");
    const auto p = static_cast<Eigen::Index>(ports);
    if (matrix.topLeftCorner(p, p).cwiseAbs().maxCoeff() != 0.0)
        throw Error(ErrorCode::Validation, "port block of a coupling matrix must be zero");
    return ClassicalCouplingMatrix::from_full(matrix, ports, *band);
}

MatrixDocument MatrixDocument::from(const ClassicalCouplingMatrix& ccm)
{
    MatrixDocument doc;
    doc.ports = ccm.ports();
    doc.order = ccm.order();
    doc.band = ccm.band;
    doc.matrix = ccm.full();
    return doc;
}

MatrixDocument parse_matrix(std::string_view text)
{
    MatrixDocument doc;
    std::optional<std::size_t> ports;
    std::optional<std::size_t> order;
    std::vector<std::vector<double>> rows;
    std::size_t first_body_line = 0;

    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t ln = i + 1;
        const std::string_view line = trim(lines[i]);
        if (line.empty())
            continue;
        if (line.front() == '#') {
            doc.comments.emplace_back(trim(line.substr(1)));
            continue;
        }
        const auto tok = split_ws(line);
        if (tok[0] == "ports" || tok[0] == "order") {
            if (!rows.empty())
                parse_fail(ln, "header line '" + std::string(tok[0]) + "' after the matrix body");
            double v = 0.0;
            if (tok.size() != 2 || !to_double(tok[1], v) || v < 0.0 || v != std::floor(v))
                parse_fail(ln, "expected '" + std::string(tok[0]) + " <count>'");
            (tok[0] == "ports" ? ports : order) = static_cast<std::size_t>(v);
            continue;
        }
        if (tok[0] == "band") {
            if (!rows.empty())
                parse_fail(ln, "header line 'band' after the matrix body");
            double f1 = 0.0;
            double f2 = 0.0;
            if (tok.size() != 3 || !to_double(tok[1], f1) || !to_double(tok[2], f2))
                parse_fail(ln, "expected 'band <f1_hz> <f2_hz>'");
            try {
                doc.band = make_band(f1, f2);
            } catch (const Error& e) {
                parse_fail(ln, e.what());
            }
            continue;
        }
        std::vector<double> row;
        for (const auto t : tok) {
            double v = 0.0;
            if (!to_double(t, v))
                parse_fail(ln, "bad number '" + std::string(t) + "'");
            row.push_back(v);
        }
        if (rows.empty())
            first_body_line = ln;
        rows.push_back(std::move(row));
    }

    if (!ports)
        parse_fail("missing header field 'ports'");
    if (!order)
        parse_fail("missing header field 'order'");
    if (*ports == 0)
        parse_fail("header field 'ports' must be >= 1");
    doc.ports = *ports;
    doc.order = *order;
    const std::size_t n = doc.ports + doc.order;
    if (rows.size() != n)
        throw Error(ErrorCode::DimensionMismatch, "matrix body has " + std::to_string(rows.size()) +
                                                      " rows, header implies " + std::to_string(n));
    for (std::size_t r = 0; r < n; ++r)
        if (rows[r].size() != n)
            throw Error(ErrorCode::DimensionMismatch, "line " + std::to_string(first_body_line + r) + ": row has " +
                                                          std::to_string(rows[r].size()) + " entries, expected " +
                                                          std::to_string(n));

    doc.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            doc.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    for (Eigen::Index r = 0; r < doc.matrix.rows(); ++r)
        for (Eigen::Index c = r + 1; c < doc.matrix.cols(); ++c)
            if (std::abs(doc.matrix(r, c) - doc.matrix(c, r)) > 1e-9)
                parse_fail("matrix is not symmetric at (" + std::to_string(r + 1) + "," + std::to_string(c + 1) + ")");
    return doc;
}

std::string serialize_matrix(const MatrixDocument& doc)
{
    const auto n = static_cast<Eigen::Index>(doc.ports + doc.order);
    if (doc.matrix.rows() != n || doc.matrix.cols() != n)
        throw Error(ErrorCode::DimensionMismatch, "matrix size differs from ports + order");
    std::string out;
    for (const auto& c : doc.comments)
        out += c.empty() ? "#\n" : "# " + c + "\n";
    out += "ports " + std::to_string(doc.ports) + "\n";
    out += "order " + std::to_string(doc.order) + "\n";
    if (doc.band)
        out += "band " + format_number(doc.band->f1_hz()) + " " + format_number(doc.band->f2_hz()) + "\n";
    out += serialize_plain_matrix(doc.matrix);
    return out;
}

MatrixDocument read_matrix_file(const std::filesystem::path& path)
{
    return parse_matrix(read_text_file(path));
}

void write_matrix_file(const std::filesystem::path& path, const MatrixDocument& doc)
{
    write_text_file(path, serialize_matrix(doc));
}

TopologyMask read_mask_file(const std::filesystem::path& path)
{
    const MatrixDocument doc = read_matrix_file(path);
    BoolMatrix allowed(doc.matrix.rows(), doc.matrix.cols());
    for (Eigen::Index r = 0; r < allowed.rows(); ++r) {
        for (Eigen::Index c = 0; c < allowed.cols(); ++c) {
            const double v = doc.matrix(r, c);
            if (v != 0.0 && v != 1.0)
                parse_fail("mask entries must be 0 or 1, found " + format_number(v));
            allowed(r, c) = v == 1.0;
        }
    }
    return TopologyMask(std::move(allowed), doc.ports);
}

RealMatrix parse_plain_matrix(std::string_view text)
{
    std::vector<std::vector<double>> rows;
    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string_view line = trim(lines[i]);
        if (line.empty() || line.front() == '#')
            continue;
        std::vector<double> row;
        for (const auto t : split_ws(line)) {
            double v = 0.0;
            if (!to_double(t, v))
                parse_fail(i + 1, "bad number '" + std::string(t) + "'");
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    const std::size_t n = rows.size();
    if (n == 0)
        parse_fail("empty matrix");
    RealMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        if (rows[r].size() != n)
            throw Error(ErrorCode::DimensionMismatch, "matrix is not square");
        for (std::size_t c = 0; c < n; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
    return m;
}

std::string serialize_plain_matrix(const RealMatrix& m)
{
    std::string out;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c > 0)
                out += ' ';
            out += format_number(m(r, c));
        }
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Affine out-of-band term and zeros

std::string serialize_affine(const AffineOutOfBand& oob)
{
    json doc = json::object();
    doc["format"] = "emcm-affine";
    doc["ports"] = oob.Z0.rows();
    doc["Z0"] = complex_matrix_json(oob.Z0);
    doc["Z1"] = complex_matrix_json(oob.Z1);
    return doc.dump(2) + "\n";
}

AffineOutOfBand parse_affine(std::string_view text)
{
    const json doc = parse_json(text);
    check_format(doc, "emcm-affine");
    const std::size_t p = count(field(doc, "ports", ""), "ports");
    if (p == 0)
        parse_fail("field 'ports': must be >= 1");
    return AffineOutOfBand{complex_matrix_from_json(field(doc, "Z0", ""), p, "Z0"),
                           complex_matrix_from_json(field(doc, "Z1", ""), p, "Z1")};
}

std::string serialize_zeros(const ZeroSet& zeros, const std::optional<FrequencyBand>& band)
{
    auto real_list = [&](const std::vector<double>& ks) {
        json out = json::array();
        for (double k : ks) {
            json z{{"K", k}};
            if (band)
                z["f_hz"] = hz_from_wavenumber(bandpass_map(k, *band));
            out.push_back(std::move(z));
        }
        return out;
    };
    auto complex_list = [&](const std::vector<Complex>& ks) {
        json out = json::array();
        for (const Complex k : ks) {
            json z{{"re", k.real()}, {"im", k.imag()}};
            if (band)
                z["f_hz"] = hz_from_wavenumber(bandpass_map(k.real(), *band));
            out.push_back(std::move(z));
        }
        return out;
    };
    json doc = json::object();
    doc["format"] = "emcm-zeros";
    if (band)
        doc["band"] = band_json(*band);
    doc["transmission_zeros"] = real_list(zeros.transmission_zeros);
    doc["reflection_zeros"] = complex_list(zeros.reflection_zeros);
    doc["poles"] = complex_list(zeros.prototype_poles);
    return doc.dump(2) + "\n";
}

ZeroSet parse_zeros(std::string_view text)
{
    const json doc = parse_json(text);
    check_format(doc, "emcm-zeros");
    ZeroSet zs;
    auto real_list = [&](const char* name, std::vector<double>& out) {
        if (!doc.contains(name))
            return;
        const json& list = array(doc.at(name), name);
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string w = std::string(name) + "[" + std::to_string(i) + "]";
            out.push_back(number(field(list[i], "K", w), w + ".K"));
        }
        std::sort(out.begin(), out.end());
    };
    real_list("transmission_zeros", zs.transmission_zeros);
    auto complex_list = [&](const char* name, std::vector<Complex>& out) {
        if (!doc.contains(name))
            return;
        const json& list = array(doc.at(name), name);
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string w = std::string(name) + "[" + std::to_string(i) + "]";
            out.emplace_back(number(field(list[i], "re", w), w + ".re"), number(field(list[i], "im", w), w + ".im"));
        }
        std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
            return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
        });
    };
    complex_list("reflection_zeros", zs.reflection_zeros);
    complex_list("poles", zs.prototype_poles);
    return zs;
}

// ---------------------------------------------------------------------------
// Sweeps

namespace {

void require_exportable(const SParameterSweep& sweep)
{
    if (sweep.frequencies_hz.empty() || sweep.matrices.empty())
        throw Error(ErrorCode::Io, "empty sweep, nothing to export");
    if (sweep.frequencies_hz.size() != sweep.matrices.size())
        throw Error(ErrorCode::Validation, "sweep frequency and matrix counts differ");
    const auto p = sweep.matrices.front().rows();
    for (const auto& m : sweep.matrices)
        if (m.rows() != p || m.cols() != p)
            throw Error(ErrorCode::DimensionMismatch, "sweep matrices differ in size");
}

char kind_letter(NetworkParameter kind)
{
    return kind == NetworkParameter::S ? 'S' : 'Z';
}

std::string port_label(char letter, std::size_t ports, std::size_t i, std::size_t j)
{
    std::string s(1, letter);
    s += std::to_string(i + 1);
    if (ports > 9)
        s += '_';
    s += std::to_string(j + 1);
    return s;
}

} // namespace

std::string touchstone_text(const SParameterSweep& sweep, NetworkParameter kind)
{
    require_exportable(sweep);
    const auto p = sweep.matrices.front().rows();
    const double scale = kind == NetworkParameter::Z ? 1.0 / sweep.z_ref : 1.0;
    std::string out = "# Hz ";
    out += kind_letter(kind);
    out += " RI R " + format_number(sweep.z_ref) + "\n";
    auto pair = [&](const Complex& v) {
        return format_number(v.real() * scale) + " " + format_number(v.imag() * scale);
    };
    for (std::size_t n = 0; n < sweep.matrices.size(); ++n) {
        const auto& m = sweep.matrices[n];
        out += format_number(sweep.frequencies_hz[n]);
        if (p <= 2) {
            // column-major gives 11, 21, 12, 22
            for (Eigen::Index c = 0; c < p; ++c)
                for (Eigen::Index r = 0; r < p; ++r)
                    out += " " + pair(m(r, c));
            out += "\n";
            continue;
        }
        // one matrix row per line, at most 4 pairs per line
        for (Eigen::Index r = 0; r < p; ++r) {
            for (Eigen::Index c = 0; c < p; ++c) {
                if (c % 4 == 0 && (r > 0 || c > 0))
                    out += "\n";
                out += " " + pair(m(r, c));
            }
        }
        out += "\n";
    }
    return out;
}

void export_touchstone(const SParameterSweep& sweep, const std::filesystem::path& path, NetworkParameter kind)
{
    write_text_file(path, touchstone_text(sweep, kind));
}

std::string csv_text(const SParameterSweep& sweep, NetworkParameter kind)
{
    require_exportable(sweep);
    const auto p = static_cast<std::size_t>(sweep.matrices.front().rows());
    std::string out = "freq_hz";
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            const std::string label = port_label(kind_letter(kind), p, i, j);
            out += "," + label + "_re," + label + "_im";
        }
    }
    out += "\n";
    for (std::size_t n = 0; n < sweep.matrices.size(); ++n) {
        out += format_number(sweep.frequencies_hz[n]);
        const auto& m = sweep.matrices[n];
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                out += "," + format_number(m(i, j).real()) + "," + format_number(m(i, j).imag());
        out += "\n";
    }
    return out;
}

void export_csv(const SParameterSweep& sweep, const std::filesystem::path& path, NetworkParameter kind)
{
    write_text_file(path, csv_text(sweep, kind));
}

ParsedSweep parse_csv(std::string_view text)
{
    const auto lines = split_lines(text);
    std::size_t i = 0;
    while (i < lines.size() && (trim(lines[i]).empty() || trim(lines[i]).front() == '#'))
        ++i;
    if (i == lines.size())
        parse_fail("CSV has no header row");

    auto split_commas = [](std::string_view line) {
        std::vector<std::string_view> out;
        std::size_t start = 0;
        while (true) {
            const std::size_t end = line.find(',', start);
            out.push_back(trim(line.substr(start, end == std::string_view::npos ? end : end - start)));
            if (end == std::string_view::npos)
                break;
            start = end + 1;
        }
        return out;
    };

    const auto header = split_commas(lines[i]);
    if (header.empty() || header[0] != "freq_hz")
        parse_fail(i + 1, "first column must be 'freq_hz'");
    const std::size_t values = header.size() - 1;
    const auto p = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(values) / 2.0)));
    if (p == 0 || 2 * p * p != values)
        parse_fail(i + 1, "column count does not match a square port matrix");
    ParsedSweep parsed;
    const char letter = header[1].empty() ? '?' : header[1][0];
    if (letter == 'S')
        parsed.kind = NetworkParameter::S;
    else if (letter == 'Z')
        parsed.kind = NetworkParameter::Z;
    else
        parse_fail(i + 1, "columns must be S or Z parameters");
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = 0; b < p; ++b) {
            const std::string label = port_label(letter, p, a, b);
            const std::size_t col = 1 + 2 * (a * p + b);
            if (header[col] != label + "_re" || header[col + 1] != label + "_im")
                parse_fail(i + 1, "unexpected column '" + std::string(header[col]) + "', expected '" + label + "_re'");
        }
    }

    for (++i; i < lines.size(); ++i) {
        const std::string_view line = trim(lines[i]);
        if (line.empty() || line.front() == '#')
            continue;
        const auto cells = split_commas(line);
        if (cells.size() != header.size())
            parse_fail(i + 1, "expected " + std::to_string(header.size()) + " columns");
        std::vector<double> v(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c)
            if (!to_double(cells[c], v[c]))
                parse_fail(i + 1, "bad number '" + std::string(cells[c]) + "'");
        ComplexMatrix m(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = 0; b < p; ++b)
                m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                    Complex(v[1 + 2 * (a * p + b)], v[2 + 2 * (a * p + b)]);
        parsed.sweep.frequencies_hz.push_back(v[0]);
        parsed.sweep.matrices.push_back(std::move(m));
    }
    if (parsed.sweep.matrices.empty())
        parse_fail("CSV has no data rows");
    return parsed;
}

ParsedSweep parse_touchstone(std::string_view text, std::size_t ports)
{
    if (ports == 0)
        throw Error(ErrorCode::InvalidArgument, "Touchstone port count must be >= 1");
    double unit = 1e9;
    char param = 'S';
    std::string format = "MA";
    double r = 50.0;
    bool have_option = false;
    std::vector<double> data;

    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string_view line = lines[i];
        if (const auto bang = line.find('!'); bang != std::string_view::npos)
            line = line.substr(0, bang);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '#') {
            if (have_option)
                continue;
            have_option = true;
            const auto tok = split_ws(line.substr(1));
            for (std::size_t t = 0; t < tok.size(); ++t) {
                std::string u(tok[t]);
                std::transform(u.begin(), u.end(), u.begin(), [](unsigned char ch) { return std::toupper(ch); });
                if (u == "HZ")
                    unit = 1.0;
                else if (u == "KHZ")
                    unit = 1e3;
                else if (u == "MHZ")
                    unit = 1e6;
                else if (u == "GHZ")
                    unit = 1e9;
                else if (u == "S" || u == "Z" || u == "Y")
                    param = u[0];
                else if (u == "RI" || u == "MA" || u == "DB")
                    format = u;
                else if (u == "R") {
                    if (t + 1 >= tok.size() || !to_double(tok[t + 1], r) || !(r > 0.0))
                        parse_fail(i + 1, "bad reference resistance");
                    ++t;
                } else
                    parse_fail(i + 1, "unsupported option '" + std::string(tok[t]) + "'");
            }
            continue;
        }
        for (const auto t : split_ws(line)) {
            double v = 0.0;
            if (!to_double(t, v))
                parse_fail(i + 1, "bad number '" + std::string(t) + "'");
            data.push_back(v);
        }
    }

    const std::size_t per = 1 + 2 * ports * ports;
    if (data.empty() || data.size() % per != 0)
        parse_fail("Touchstone data does not divide into " + std::to_string(ports) + "-port records");

    ParsedSweep parsed;
    parsed.kind = param == 'S' ? NetworkParameter::S : NetworkParameter::Z;
    parsed.sweep.z_ref = r;
    const auto p = static_cast<Eigen::Index>(ports);
    for (std::size_t at = 0; at < data.size(); at += per) {
        ComplexMatrix m(p, p);
        for (Eigen::Index e = 0; e < p * p; ++e) {
            const double a = data[at + 1 + 2 * static_cast<std::size_t>(e)];
            const double b = data[at + 2 + 2 * static_cast<std::size_t>(e)];
            Complex v;
            if (format == "RI")
                v = Complex(a, b);
            else {
                const double mag = format == "MA" ? a : std::pow(10.0, a / 20.0);
                v = std::polar(mag, b * std::numbers::pi / 180.0);
            }
            // 2-port records are column-major, larger ones row-major
            const Eigen::Index row = ports == 2 ? e % p : e / p;
            const Eigen::Index col = ports == 2 ? e / p : e % p;
            m(row, col) = v;
        }
        if (param == 'Z') {
            m *= r;
        } else if (param == 'Y') {
            Eigen::PartialPivLU<ComplexMatrix> lu(m);
            if (!(std::abs(lu.determinant()) > 0.0))
                throw Error(ErrorCode::SingularConversion, "singular Y matrix in Touchstone data");
            m = lu.inverse() * r;
        }
        parsed.sweep.frequencies_hz.push_back(data[at] * unit);
        parsed.sweep.matrices.push_back(std::move(m));
    }
    return parsed;
}

SweepSamples read_samples(const std::filesystem::path& path, double csv_z_ref)
{
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    ParsedSweep parsed;
    static const std::regex snp(R"(\.s(\d+)p)");
    std::smatch match;
    if (ext == ".csv") {
        parsed = parse_csv(read_text_file(path));
        parsed.sweep.z_ref = csv_z_ref;
    } else if (std::regex_match(ext, match, snp)) {
        parsed = parse_touchstone(read_text_file(path), std::stoul(match[1].str()));
    } else {
        throw Error(ErrorCode::InvalidArgument, "unknown sample file type '" + ext + "' (expected .csv or .sNp)");
    }
    SweepSamples samples;
    samples.frequencies_hz = parsed.sweep.frequencies_hz;
    for (const auto& m : parsed.sweep.matrices)
        samples.Z.push_back(parsed.kind == NetworkParameter::S ? s_to_z(m, parsed.sweep.z_ref) : m);
    require_valid(samples);
    return samples;
}

} // namespace emcm
