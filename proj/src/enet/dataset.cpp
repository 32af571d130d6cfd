#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "gcgs/elasticnet.hpp"
#include "gcgs/error.hpp"

namespace gcgs::enet {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  size_t pos = 0;
  for (;;) {
    const size_t end = line.find(',', pos);
    out.push_back(line.substr(pos, end == std::string::npos ? std::string::npos : end - pos));
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& field, int line, int column) {
  const std::string t = trim(field);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size() ||
      !std::isfinite(v)) {
    throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": '" + t + "' is not a number",
                     line, column);
  }
  return v;
}

}  // namespace

Dataset make_dataset(Mat raw, Vec y) {
  if (raw.rows() != y.size()) throw DomainError("make_dataset: row count mismatch");
  if (raw.rows() < 1) throw DomainError("make_dataset: no rows");
  Dataset d;
  d.n_train = (raw.rows() * 8) / 10;
  if (d.n_train < 1) throw DomainError("make_dataset: too few rows for a training split");

  const auto train = raw.topRows(d.n_train);
  d.mean = train.colwise().mean().transpose();
  d.stddev.resize(raw.cols());
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    const double var = (train.col(j).array() - d.mean[j]).square().mean();
    // Constant columns are centered but not scaled.
    d.stddev[j] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  d.Z = (raw.rowwise() - d.mean.transpose()).array().rowwise() /
        d.stddev.transpose().array();
  d.raw = std::move(raw);
  d.y = std::move(y);
  return d;
}

Dataset make_toy_classification(int n_samples, int dims, int relevant, std::uint64_t seed) {
  if (relevant < 1 || relevant > dims) throw DomainError("toy data: need 1 <= T <= d");
  if (n_samples < 10) throw DomainError("toy data: need N >= 10");

  Rng rng(seed);
  Vec mu(relevant);
  for (int t = 0; t < relevant; ++t) mu[t] = rng.uniform() < 0.5 ? -1.0 : 1.0;
  // Class covariances A A^T / T, one Wishart draw per class.
  const Mat a_pos = gaussian_draws(rng, relevant, relevant) / std::sqrt(double(relevant));
  const Mat a_neg = gaussian_draws(rng, relevant, relevant) / std::sqrt(double(relevant));

  Mat raw(n_samples, dims);
  Vec y(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    const bool positive = rng.uniform() < 0.5;
    y[i] = positive ? 1.0 : -1.0;
    Vec z(relevant);
    for (int t = 0; t < relevant; ++t) z[t] = rng.normal();
    raw.row(i).head(relevant) = (y[i] * mu + (positive ? a_pos : a_neg) * z).transpose();
    for (int j = relevant; j < dims; ++j) raw(i, j) = rng.normal();
  }
  return make_dataset(std::move(raw), std::move(y));
}

Dataset load_csv_dataset(const std::filesystem::path& path, std::string_view label_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file: missing header", 1, 1);
  const auto header = split_line(line);
  int label_idx = -1;
  for (size_t c = 0; c < header.size(); ++c) {
    if (trim(header[c]) == label_column) label_idx = static_cast<int>(c);
  }
  if (label_idx < 0) {
    throw ParseError("label column '" + std::string(label_column) + "' not in header", 1, 1);
  }

  std::vector<std::vector<double>> rows;
  std::vector<double> labels;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != header.size()) {
      throw ParseError("line " + std::to_string(lineno) + ": expected " +
                           std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       lineno, static_cast<int>(fields.size()));
    }
    std::vector<double> row;
    for (size_t c = 0; c < fields.size(); ++c) {
      const double v = parse_number(fields[c], lineno, static_cast<int>(c) + 1);
      if (static_cast<int>(c) == label_idx) {
        if (v == 1.0) {
          labels.push_back(1.0);
        } else if (v == -1.0 || v == 0.0) {
          labels.push_back(-1.0);
        } else {
          throw ParseError("line " + std::to_string(lineno) + ", column " +
                               std::to_string(c + 1) + ": label must be -1/+1 or 0/1",
                           lineno, static_cast<int>(c) + 1);
        }
      } else {
        row.push_back(v);
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("no data rows", lineno, 1);

  Mat raw(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(header.size() - 1));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows[i].size(); ++j) raw(i, j) = rows[i][j];
  }
  return make_dataset(std::move(raw), Eigen::Map<const Vec>(labels.data(), labels.size()));
}

void save_csv_dataset(const std::filesystem::path& path, const Dataset& data,
                      std::string_view label_column) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  for (Eigen::Index j = 0; j < data.raw.cols(); ++j) out << 'f' << j << ',';
  out << label_column << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < data.raw.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.raw.cols(); ++j) {
      const auto res = std::to_chars(buf, buf + sizeof buf, data.raw(i, j));
      out.write(buf, res.ptr - buf);
      out << ',';
    }
    out << (data.y[i] > 0.0 ? "1" : "-1") << '\n';
  }
}

}  // namespace gcgs::enet
