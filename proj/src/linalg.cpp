#include "quadland/linalg.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "quadland/errors.hpp"

namespace quadland {

Vector singular_values(const Matrix& m) {
  if (m.size() == 0) return Vector();
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues();
}

double sigma_min(const Matrix& m) {
  const Vector s = singular_values(m);
  if (s.size() == 0) return 0.0;
  // A wide matrix has fewer singular values than columns; its column rank is
  // deficient and the missing ones are zero.
  if (m.rows() < m.cols()) return 0.0;
  return s(s.size() - 1);
}

double sigma_max(const Matrix& m) {
  const Vector s = singular_values(m);
  return s.size() == 0 ? 0.0 : s(0);
}

bool is_full_column_rank(const Matrix& m) {
  if (m.cols() == 0) return true;
  if (m.rows() < m.cols()) return false;
  const Vector s = singular_values(m);
  return s(s.size() - 1) > kRankTolerance * std::max(1.0, s(0));
}

int numerical_rank(const Matrix& m, double relative_threshold) {
  const Vector s = singular_values(m);
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double cut = relative_threshold * s(0);
  return static_cast<int>((s.array() > cut).count());
}

Matrix gram(const Matrix& w) {
  Matrix g = w.transpose() * w;
  return 0.5 * (g + g.transpose());
}

bool is_symmetric(const Matrix& m, double relative_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= relative_tol * scale;
}

Vector symmetric_eigenvalues(const Matrix& m) {
  if (m.size() == 0) return Vector();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues();
}

double gram_gap(const Matrix& w1, const Matrix& w2) {
  if (w1.cols() != w2.cols()) {
    throw InvalidArgument("gram_gap: column counts differ");
  }
  return (gram(w1) - gram(w2)).norm();
}

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  out << "# rows=" << m.rows() << " cols=" << m.cols() << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << "\n";
  }
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open for writing: " + path);
  write_matrix_csv(out, m);
}

namespace {

long parse_header_field(const std::string& header, const std::string& key) {
  const std::string needle = key + "=";
  const auto pos = header.find(needle);
  if (pos == std::string::npos) {
    throw InvalidArgument("matrix csv header missing '" + key + "'");
  }
  std::istringstream in(header.substr(pos + needle.size()));
  long value = -1;
  if (!(in >> value) || value < 0) {
    throw InvalidArgument("matrix csv header has bad '" + key + "'");
  }
  return value;
}

}  // namespace

Matrix read_matrix_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.rfind('#', 0) != 0) {
    throw InvalidArgument("matrix csv: expected '# rows=<m> cols=<d>' header");
  }
  const long rows = parse_header_field(header, "rows");
  const long cols = parse_header_field(header, "cols");
  Matrix m(rows, cols);
  std::string line;
  for (long i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) {
      throw InvalidArgument("matrix csv: expected " + std::to_string(rows) + " rows");
    }
    std::istringstream row(line);
    std::string cell;
    long j = 0;
    while (std::getline(row, cell, ',')) {
      if (j >= cols) throw InvalidArgument("matrix csv: too many columns");
      m(i, j++) = std::stod(cell);
    }
    if (j != cols) throw InvalidArgument("matrix csv: too few columns");
  }
  return m;
}

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open: " + path);
  return read_matrix_csv(in);
}

}  // namespace quadland
