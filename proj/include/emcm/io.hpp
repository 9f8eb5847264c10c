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

#include "emcm/basis.hpp"
#include "emcm/classical_fit.hpp"
#include "emcm/rational_fit.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace emcm {

// Text helpers shared by every writer: 15 significant digits.
std::string format_number(double value);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

// ---------------------------------------------------------------------------
// Model files (JSON)
// ---------------------------------------------------------------------------

inline constexpr int kModelFormatVersion = 1;

PoleResidueModel parse_model(std::string_view text);
std::string serialize_model(const PoleResidueModel& model);
PoleResidueModel read_model_file(const std::filesystem::path& path);
void write_model_file(const std::filesystem::path& path, const PoleResidueModel& model);

// ---------------------------------------------------------------------------
// Coupling matrix files
//
//   # comment
//   ports P
//   order N
//   band f1 f2            (optional)
//   (P+N) rows of (P+N) numbers, ports first
// ---------------------------------------------------------------------------

struct MatrixDocument {
    std::size_t ports = 0;
    std::size_t order = 0;
    std::optional<FrequencyBand> band;
    RealMatrix matrix;
    std::vector<std::string> comments;

    ClassicalCouplingMatrix classical() const; // needs a band
    static MatrixDocument from(const ClassicalCouplingMatrix& ccm);
};

MatrixDocument parse_matrix(std::string_view text);
std::string serialize_matrix(const MatrixDocument& doc);
MatrixDocument read_matrix_file(const std::filesystem::path& path);
void write_matrix_file(const std::filesystem::path& path, const MatrixDocument& doc);

// Mask files use the matrix layout with 0/1 entries and no band.
TopologyMask read_mask_file(const std::filesystem::path& path);

// Plain whitespace-separated square matrix.
RealMatrix parse_plain_matrix(std::string_view text);
std::string serialize_plain_matrix(const RealMatrix& m);

// ---------------------------------------------------------------------------
// Out-of-band affine term and zero targets (JSON)
// ---------------------------------------------------------------------------

std::string serialize_affine(const AffineOutOfBand& oob);
AffineOutOfBand parse_affine(std::string_view text);

std::string serialize_zeros(const ZeroSet& zeros, const std::optional<FrequencyBand>& band);
ZeroSet parse_zeros(std::string_view text);

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

enum class NetworkParameter { S, Z };

// "# Hz S RI R <z_ref>" followed by one record per frequency. Z data are
// written normalized to z_ref, as Touchstone v1 expects.
std::string touchstone_text(const SParameterSweep& sweep, NetworkParameter kind = NetworkParameter::S);
void export_touchstone(const SParameterSweep& sweep, const std::filesystem::path& path,
                       NetworkParameter kind = NetworkParameter::S);

// Header "freq_hz,S11_re,S11_im,..." in row-major port order; Z in ohm.
// Port labels are separated by '_' (S10_11) once P exceeds 9.
std::string csv_text(const SParameterSweep& sweep, NetworkParameter kind = NetworkParameter::S);
void export_csv(const SParameterSweep& sweep, const std::filesystem::path& path,
                NetworkParameter kind = NetworkParameter::S);

struct ParsedSweep {
    SParameterSweep sweep;
    NetworkParameter kind = NetworkParameter::S;
};

ParsedSweep parse_csv(std::string_view text);

// Touchstone v1 reader: Hz/kHz/MHz/GHz, S/Z/Y, RI/MA/DB.
ParsedSweep parse_touchstone(std::string_view text, std::size_t ports);

// Impedance samples from a CSV or .sNp file; S and Y data are converted to Z.
// `csv_z_ref` is the reference impedance assumed for S data in CSV files.
SweepSamples read_samples(const std::filesystem::path& path, double csv_z_ref = kFreeSpaceImpedance);

} // namespace emcm
