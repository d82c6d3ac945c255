#include "stableinfer/ensemble_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "stableinfer/errors.hpp"
#include "stableinfer/hash.hpp"

namespace stableinfer {
namespace {

constexpr char kMagic[4] = {'S', 'F', 'E', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw IoFailure("SFE1: truncated header");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void put_f64s(std::ostream& out, const std::vector<double>& values) {
  for (double x : values) put_u64(out, std::bit_cast<std::uint64_t>(x));
}

std::vector<double> get_f64s(std::istream& in, std::size_t count) {
  std::vector<double> v(count);
  for (double& x : v) x = std::bit_cast<double>(get_u64(in));
  return v;
}

}  // namespace

void write_sfe1(std::ostream& out, const FieldEnsemble& e) {
  if (e.coefficients.size() != e.n_samples * e.n_coeffs ||
      (!e.grid.empty() && e.grid.size() != e.n_samples * e.grid_size))
    throw DimensionMismatch("ensemble arrays disagree with the header");
  out.write(kMagic, 4);
  put_u64(out, e.spec_hash);
  put_u64(out, e.seed);
  put_u64(out, e.n_samples);
  put_u64(out, e.n_coeffs);
  put_u64(out, e.grid.empty() ? 0 : e.grid_size);
  put_f64s(out, e.coefficients);
  put_f64s(out, e.grid);
  if (!out) throw IoFailure("SFE1: write failed");
}

FieldEnsemble read_sfe1(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw IoFailure("SFE1: bad magic bytes");
  FieldEnsemble e;
  e.spec_hash = get_u64(in);
  e.seed = get_u64(in);
  e.n_samples = get_u64(in);
  e.n_coeffs = get_u64(in);
  e.grid_size = get_u64(in);
  e.coefficients = get_f64s(in, e.n_samples * e.n_coeffs);
  e.grid = get_f64s(in, e.n_samples * e.grid_size);
  return e;
}

void write_sfe1(const std::filesystem::path& path, const FieldEnsemble& e) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
  write_sfe1(out, e);
}

FieldEnsemble read_sfe1(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path.string());
  return read_sfe1(in);
}

std::string csv_comment(std::uint64_t config_hash, std::uint64_t seed) {
  return "# config_hash=" + hex64(config_hash) + ",seed=" + std::to_string(seed);
}

void write_table_csv(const std::filesystem::path& path, const std::string& comment,
                     const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
  out << comment << '\n';
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
  }
  if (!out) throw IoFailure("write failed: " + path.string());
}

void write_ensemble_csv(const std::filesystem::path& path, const FieldEnsemble& e,
                        CsvContent content, std::uint64_t config_hash) {
  const bool grid = content == CsvContent::grid;
  const std::size_t width = grid ? e.grid_size : e.n_coeffs;
  if (grid && e.grid.size() != e.n_samples * e.grid_size)
    throw DimensionMismatch("ensemble has no grid synthesis");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
  out << csv_comment(config_hash, e.seed) << '\n' << "sample";
  for (std::size_t j = 0; j < width; ++j) out << (grid ? ",x" : ",c") << (grid ? j : j + 1);
  out << '\n';
  for (std::size_t i = 0; i < e.n_samples; ++i) {
    out << i;
    const auto row = grid ? e.field(i) : e.sample(i);
    for (double v : row) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) throw IoFailure("write failed: " + path.string());
}

}  // namespace stableinfer
