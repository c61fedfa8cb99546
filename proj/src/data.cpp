#include "quadland/data.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "quadland/errors.hpp"

namespace quadland {

Dataset sample_dataset(const Distribution& dist, Eigen::Index n, Eigen::Index d,
                       std::uint64_t seed) {
  if (n < 1 || d < 1) throw InvalidArgument("sample_dataset: need n >= 1 and d >= 1");
  Dataset ds;
  ds.inputs.resize(n, d);
  ds.distribution = dist;
  ds.seed = seed;
  CounterRng rng(seed);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) ds.inputs(i, j) = dist.sample(rng);
  }
  return ds;
}

Dataset label_dataset(const Dataset& dataset, const TeacherModel& teacher) {
  if (dataset.dim() != teacher.dim()) {
    throw InvalidArgument("label_dataset: teacher dimension does not match data");
  }
  Dataset out = dataset;
  Vector y(dataset.size());
  for (Eigen::Index i = 0; i < dataset.size(); ++i) y(i) = forward(teacher, dataset.sample(i));
  out.labels = std::move(y);
  return out;
}

void write_dataset_csv(std::ostream& out, const Dataset& ds) {
  out << "# n=" << ds.size() << " d=" << ds.dim() << " dist=" << (ds.distribution ? ds.distribution->tag() : std::string("deterministic"))
      << " seed=" << ds.seed << "\n";
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    for (Eigen::Index j = 0; j < ds.dim(); ++j) {
      if (j) out << ',';
      out << format_double(ds.inputs(i, j));
    }
    if (ds.labels) out << ',' << format_double((*ds.labels)(i));
    out << "\n";
  }
}

void write_dataset_csv(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open for writing: " + path);
  write_dataset_csv(out, ds);
}

namespace {

std::string header_value(const std::string& header, const std::string& key) {
  const std::string needle = " " + key + "=";
  const auto pos = header.find(needle);
  if (pos == std::string::npos) throw InvalidArgument("dataset csv header missing '" + key + "'");
  const auto start = pos + needle.size();
  const auto end = header.find(' ', start);
  return header.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

}  // namespace

Dataset read_dataset_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.rfind('#', 0) != 0) {
    throw InvalidArgument("dataset csv: expected '# n=... d=... dist=... seed=...' header");
  }
  Dataset ds;
  long n = 0, d = 0;
  try {
    n = std::stol(header_value(header, "n"));
    d = std::stol(header_value(header, "d"));
    ds.seed = std::stoull(header_value(header, "seed"));
  } catch (const InvalidArgument&) {
    throw;
  } catch (const std::exception&) {
    throw InvalidArgument("dataset csv: malformed header");
  }
  if (n < 0 || d < 1) throw InvalidArgument("dataset csv: bad n or d");
  const std::string tag = header_value(header, "dist");
  if (tag != "deterministic") ds.distribution = Distribution::parse(tag);
  ds.inputs.resize(n, d);
  Vector labels(n);
  int label_columns = -1;
  std::string line;
  for (long i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw InvalidArgument("dataset csv: too few rows");
    std::vector<double> cells;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(std::stod(cell));
    const long extra = static_cast<long>(cells.size()) - d;
    if (extra != 0 && extra != 1) throw InvalidArgument("dataset csv: wrong column count");
    if (label_columns == -1) label_columns = static_cast<int>(extra);
    if (extra != label_columns) throw InvalidArgument("dataset csv: inconsistent label column");
    for (long j = 0; j < d; ++j) ds.inputs(i, j) = cells[j];
    if (extra == 1) labels(i) = cells[d];
  }
  if (label_columns == 1) ds.labels = std::move(labels);
  return ds;
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open: " + path);
  return read_dataset_csv(in);
}

}  // namespace quadland
