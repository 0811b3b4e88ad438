#include "rbmm/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#include "rbmm/errors.hpp"

namespace rbmm::io {

static_assert(std::endian::native == std::endian::little, "binary format assumes a little-endian host");

namespace {

constexpr std::array<char, 8> kMagic = {'R', 'B', 'M', 'M', 'D', 'A', 'T', '1'};

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in, const std::string& path) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw ContractViolation("truncated data file: " + path);
  return v;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream f(path, mode);
  if (!f) throw ContractViolation("cannot write " + path);
  return f;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream f(path, mode);
  if (!f) throw ContractViolation("cannot read " + path);
  return f;
}

void check_shape(const DataArray& a) {
  if (a.dims.empty()) throw ContractViolation("data array has no dimensions");
  for (auto d : a.dims)
    if (d == 0) throw ContractViolation("data array has a zero dimension");
  if (a.values.size() != a.size()) throw ContractViolation("data array payload does not match its shape");
}

}  // namespace

std::size_t DataArray::size() const {
  if (dims.empty()) return 0;
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

DataArray from_matrix(const Matrix& m) {
  DataArray a;
  a.dims = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
  a.values.reserve(m.size());
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) a.values.push_back(m(i, j));
  return a;
}

Matrix to_matrix(const DataArray& a) {
  check_shape(a);
  if (a.dims.size() != 2) throw ContractViolation("to_matrix: expected a 2-d array");
  Matrix m(a.dims[0], a.dims[1]);
  std::size_t k = 0;
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = a.values[k++];
  return m;
}

void write_binary(const std::string& path, const DataArray& a) {
  check_shape(a);
  auto f = open_out(path, std::ios::binary);
  f.write(kMagic.data(), kMagic.size());
  put(f, static_cast<std::uint32_t>(a.dims.size()));
  for (auto d : a.dims) put(f, d);
  for (double v : a.values) put(f, v);
  if (!f) throw ContractViolation("write failed: " + path);
}

DataArray read_binary(const std::string& path) {
  auto f = open_in(path, std::ios::binary);
  std::array<char, 8> magic{};
  if (!f.read(magic.data(), magic.size()) || magic != kMagic)
    throw ContractViolation("not an RBMMDAT1 file: " + path);
  DataArray a;
  const auto nd = get<std::uint32_t>(f, path);
  if (nd == 0 || nd > 16) throw ContractViolation("implausible dimension count in " + path);
  for (std::uint32_t i = 0; i < nd; ++i) a.dims.push_back(get<std::uint32_t>(f, path));
  const std::size_t n = a.size();
  a.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) a.values[i] = get<double>(f, path);
  check_shape(a);
  return a;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const DataArray& a) {
  check_shape(a);
  auto f = open_out(path);
  f << "# dims=";
  for (std::size_t i = 0; i < a.dims.size(); ++i) f << (i ? "x" : "") << a.dims[i];
  f << " seed=" << a.seed << " noise=" << format_double(a.noise) << '\n';
  for (std::size_t i = 0; i < a.dims.size(); ++i) f << 'i' << i + 1 << ',';
  f << "value\n";
  std::vector<std::uint32_t> idx(a.dims.size(), 0);
  for (double v : a.values) {
    for (auto i : idx) f << i << ',';
    f << format_double(v) << '\n';
    for (std::size_t k = idx.size(); k-- > 0;) {
      if (++idx[k] < a.dims[k]) break;
      idx[k] = 0;
    }
  }
  if (!f) throw ContractViolation("write failed: " + path);
}

namespace {

// from_chars, unlike stod, accepts subnormals and reports garbage uniformly.
template <class T>
T parse_number(const std::string& text, const std::string& path) {
  T v{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ContractViolation("bad number '" + text + "' in " + path);
  return v;
}

}  // namespace

DataArray read_csv(const std::string& path) {
  auto f = open_in(path);
  std::string line;
  if (!std::getline(f, line) || line.rfind("# dims=", 0) != 0)
    throw ContractViolation("missing shape line in " + path);
  DataArray a;
  {
    std::istringstream meta(line.substr(7));
    std::string shape, tok;
    meta >> shape;
    std::istringstream dims(shape);
    while (std::getline(dims, tok, 'x')) a.dims.push_back(parse_number<std::uint32_t>(tok, path));
    while (meta >> tok) {
      if (tok.rfind("seed=", 0) == 0) a.seed = parse_number<std::uint64_t>(tok.substr(5), path);
      if (tok.rfind("noise=", 0) == 0) a.noise = parse_number<double>(tok.substr(6), path);
    }
  }
  if (!std::getline(f, line)) throw ContractViolation("missing header row in " + path);
  a.values.reserve(a.size());
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) throw ContractViolation("malformed row in " + path);
    a.values.push_back(parse_number<double>(line.substr(comma + 1), path));
  }
  check_shape(a);
  return a;
}

void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& trace) {
  const std::size_t m = trace.empty() ? 0 : trace.front().gaps.size();
  out << "cycle,objective,stationarity,delta_n";
  for (std::size_t i = 1; i <= m; ++i) out << ",gap_" << i << ",step_" << i;
  out << '\n';
  for (const auto& r : trace) {
    out << r.cycle << ',' << format_double(r.objective) << ','
        << (r.stationarity ? format_double(*r.stationarity) : std::string()) << ','
        << format_double(r.delta_n());
    for (std::size_t i = 0; i < m; ++i) out << ',' << format_double(r.gaps[i]) << ',' << format_double(r.steps[i]);
    out << '\n';
  }
}

void write_trace_csv(const std::string& path, const std::vector<IterationRecord>& trace) {
  auto f = open_out(path);
  write_trace_csv(f, trace);
  if (!f) throw ContractViolation("write failed: " + path);
}

}  // namespace rbmm::io
