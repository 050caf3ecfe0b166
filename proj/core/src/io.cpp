#include "ampud/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace ampud {

static_assert(std::endian::native == std::endian::little,
              "binary export assumes a little-endian host");

namespace {

std::ofstream open_out(const std::string& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

void write_doubles(std::ofstream& out, const double* data, std::size_t count) {
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(count * sizeof(double)));
}

}  // namespace

void write_matrix_bin(const std::string& path, const Matrix& m) {
  auto out = open_out(path, std::ios::binary);
  // Eigen stores column-major; emit row-major as documented.
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      write_doubles(out, &v, 1);
    }
  }
}

void write_vector_bin(const std::string& path, const Vector& v) {
  auto out = open_out(path, std::ios::binary);
  write_doubles(out, v.data(), static_cast<std::size_t>(v.size()));
}

Vector read_vector_bin(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes % sizeof(double) != 0) {
    throw std::runtime_error("binary vector file has a partial element: " + path);
  }
  in.seekg(0);
  Vector v(bytes / sizeof(double));
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(bytes));
  return v;
}

namespace {

void write_csv_value(std::ofstream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

}  // namespace

void write_matrix_csv(const std::string& path, const Matrix& m) {
  auto out = open_out(path, std::ios::out);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      write_csv_value(out, m(i, j));
    }
    out << '\n';
  }
}

void write_vector_csv(const std::string& path, const Vector& v) {
  auto out = open_out(path, std::ios::out);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    write_csv_value(out, v(i));
    out << '\n';
  }
}

void write_amp_trace_csv(const std::string& path,
                         const std::vector<AmpTraceRow>& trace) {
  auto out = open_out(path, std::ios::out);
  out << "schema_version,t,sigma_hat_sq,mse_if_known\n";
  for (const auto& row : trace) {
    out << kSchemaVersion << ',' << row.t << ',';
    write_csv_value(out, row.sigma_hat_sq);
    out << ',';
    write_csv_value(out, row.mse);
    out << '\n';
  }
}

void write_se_trace_csv(const std::string& path, const SeTrace& trace) {
  auto out = open_out(path, std::ios::out);
  out << "schema_version,t,sigma_sq,predicted_mse\n";
  for (std::size_t t = 0; t < trace.predicted_mse.size(); ++t) {
    out << kSchemaVersion << ',' << t << ',';
    write_csv_value(out, trace.sigma_sq[t]);
    out << ',';
    write_csv_value(out, trace.predicted_mse[t]);
    out << '\n';
  }
}

}  // namespace ampud
