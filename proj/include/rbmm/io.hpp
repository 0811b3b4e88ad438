#pragma once

// Synthetic-data files and trace CSVs.
//
// Binary layout: 8-byte magic "RBMMDAT1", u32 ndims, u32 dims[ndims], then
// the f64 payload in row-major order, all little-endian.
//
// CSV layout: one comment line "# dims=AxBxC seed=S noise=N", a header row
// "i1,...,ik,value", then one line per entry in row-major order.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rbmm/geometry.hpp"
#include "rbmm/solver.hpp"

namespace rbmm::io {

struct DataArray {
  std::vector<std::uint32_t> dims;
  std::vector<double> values;  // row-major
  std::uint64_t seed = 0;
  double noise = 0.0;

  std::size_t size() const;
};

DataArray from_matrix(const Matrix& m);
Matrix to_matrix(const DataArray& a);

void write_binary(const std::string& path, const DataArray& a);
DataArray read_binary(const std::string& path);
void write_csv(const std::string& path, const DataArray& a);
DataArray read_csv(const std::string& path);

// %.17g, so values round-trip exactly.
std::string format_double(double v);

// Columns: cycle, objective, stationarity, delta_n, then gap_i, step_i for
// i = 1..blocks. Unmeasured stationarity is an empty field.
void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& trace);
void write_trace_csv(const std::string& path, const std::vector<IterationRecord>& trace);

}  // namespace rbmm::io
