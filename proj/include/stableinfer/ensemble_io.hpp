#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "stableinfer/series_sampler.hpp"

namespace stableinfer {

/// Binary layout: "SFE1", then little-endian u64 spec_hash, seed, n_samples,
/// n_coeffs, grid_size, then f64 coefficients (row-major) and f64 grid values.
void write_sfe1(std::ostream& out, const FieldEnsemble& e);
FieldEnsemble read_sfe1(std::istream& in);
void write_sfe1(const std::filesystem::path& path, const FieldEnsemble& e);
FieldEnsemble read_sfe1(const std::filesystem::path& path);

/// "# config_hash=<hex>,seed=<u64>"
std::string csv_comment(std::uint64_t config_hash, std::uint64_t seed);

/// Comment line, header row, then rows at 17 significant digits.
void write_table_csv(const std::filesystem::path& path, const std::string& comment,
                     const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

enum class CsvContent { coefficients, grid };

/// One row per sample: "sample,c1..cN" or "sample,x0..x{G-1}".
void write_ensemble_csv(const std::filesystem::path& path, const FieldEnsemble& e,
                        CsvContent content, std::uint64_t config_hash);

}  // namespace stableinfer
