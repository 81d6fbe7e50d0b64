// Plain-text density-matrix files.
//
//   dm <n>
//   <re im re im ...>   (n lines, 2n numbers each, row-major)
//
// Values are written in shortest round-trip form, so write -> read is exact.

#pragma once

#include "cascade/operator_algebra.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>

namespace cascade {

class DensityFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_density_matrix(std::ostream& out, const ComplexMatrix& rho);
ComplexMatrix read_density_matrix(std::istream& in);

void save_density_matrix(const std::filesystem::path& path, const ComplexMatrix& rho);
ComplexMatrix load_density_matrix(const std::filesystem::path& path);

// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);

}  // namespace cascade
