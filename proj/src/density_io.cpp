#include "cascade/density_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace cascade {

std::string format_double(double x) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf.data(), ptr);
}

void write_density_matrix(std::ostream& out, const ComplexMatrix& rho) {
  if (rho.rows() != rho.cols()) throw DimensionError("write_density_matrix: matrix not square");
  const Eigen::Index n = rho.rows();
  out << "dm " << n << '\n';
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j) out << ' ';
      out << format_double(rho(i, j).real()) << ' ' << format_double(rho(i, j).imag());
    }
    out << '\n';
  }
}

namespace {

double parse_number(const std::string& tok, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw DensityFormatError("line " + std::to_string(line) + ": not a number: '" + tok + "'");
  return v;
}

}  // namespace

ComplexMatrix read_density_matrix(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DensityFormatError("line 1: missing 'dm <n>' header");
  std::istringstream header(line);
  std::string tag;
  long long n = -1;
  if (!(header >> tag >> n) || tag != "dm" || n < 1)
    throw DensityFormatError("line 1: expected 'dm <n>' with n >= 1");

  const auto dim = static_cast<Eigen::Index>(n);
  ComplexMatrix rho(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const std::size_t lineno = static_cast<std::size_t>(i) + 2;
    if (!std::getline(in, line))
      throw DensityFormatError("line " + std::to_string(lineno) + ": unexpected end of file");
    std::istringstream row(line);
    std::string re, im;
    for (Eigen::Index j = 0; j < dim; ++j) {
      if (!(row >> re >> im))
        throw DensityFormatError("line " + std::to_string(lineno) + ": expected " +
                                 std::to_string(2 * n) + " numbers");
      rho(i, j) = Complex(parse_number(re, lineno), parse_number(im, lineno));
    }
    std::string extra;
    if (row >> extra)
      throw DensityFormatError("line " + std::to_string(lineno) + ": too many numbers");
  }
  return rho;
}

void save_density_matrix(const std::filesystem::path& path, const ComplexMatrix& rho) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_density_matrix(out, rho);
}

ComplexMatrix load_density_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_density_matrix(in);
}

}  // namespace cascade
