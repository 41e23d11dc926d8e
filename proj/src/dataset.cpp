#include "rnshmc/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace rnshmc {
namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<std::size_t> standardize(Dataset& data) {
  std::vector<std::size_t> constant;
  const auto n = static_cast<double>(data.features.rows());
  for (Eigen::Index j = 0; j < data.features.cols(); ++j) {
    auto col = data.features.col(j);
    const double mean = col.mean();
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() / n);
    if (sd == 0.0 || !std::isfinite(sd)) {
      col.setZero();
      constant.push_back(static_cast<std::size_t>(j));
      continue;
    }
    col /= sd;
    // A second centering pass removes the rounding left by the first.
    col.array() -= col.mean();
  }
  data.standardized = true;
  return constant;
}

void add_intercept(Dataset& data) {
  Matrix x(data.features.rows(), data.features.cols() + 1);
  x.col(0).setOnes();
  x.rightCols(data.features.cols()) = data.features;
  data.features = std::move(x);
  data.featureNames.insert(data.featureNames.begin(), "intercept");
}

Dataset load_csv_dataset(const std::filesystem::path& path, const std::string& labelColumn,
                         bool standardizeFeatures) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file, expected a header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  std::vector<std::string> header;
  for (auto cell : split_commas(line)) header.emplace_back(trim(cell));
  std::size_t labelIndex = header.size();
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == labelColumn) labelIndex = j;
  if (labelIndex == header.size())
    throw DataError(path.string() + ": unknown label column '" + labelColumn + "'");

  std::vector<std::vector<double>> rows;
  std::size_t lineNo = 1;
  while (std::getline(in, line)) {
    ++lineNo;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != header.size()) {
      std::ostringstream msg;
      msg << path.string() << ":" << lineNo << ": expected " << header.size() << " cells, found "
          << cells.size();
      throw DataError(msg.str());
    }
    std::vector<double> row(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const auto cell = trim(cells[j]);
      const char* end = cell.data() + cell.size();
      auto [ptr, ec] = std::from_chars(cell.data(), end, row[j]);
      if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(row[j])) {
        std::ostringstream msg;
        msg << path.string() << ":" << lineNo << ": column '" << header[j] << "' (" << j + 1
            << "): non-numeric value '" << cell << "'";
        throw DataError(msg.str());
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path.string() + ": no data rows");

  Dataset data;
  data.labelName = labelColumn;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(header.size() - 1);
  data.features.resize(n, d);
  data.labels.resize(n);
  for (std::size_t j = 0; j < header.size(); ++j)
    if (j != labelIndex) data.featureNames.push_back(header[j]);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index k = 0;
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (j == labelIndex) {
        data.labels[i] = rows[i][j];
      } else {
        data.features(i, k++) = rows[i][j];
      }
    }
  }
  if (standardizeFeatures) {
    for (auto j : standardize(data))
      std::cerr << "warning: " << path.string() << ": feature '" << data.featureNames[j]
                << "' has zero variance; standardized to zeros\n";
  }
  return data;
}

void write_csv_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dataset '" + path.string() + "'");
  out << std::setprecision(17);
  for (Eigen::Index j = 0; j < data.features.cols(); ++j) {
    const auto idx = static_cast<std::size_t>(j);
    out << (idx < data.featureNames.size() ? data.featureNames[idx] : "x" + std::to_string(j + 1))
        << ',';
  }
  out << data.labelName << '\n';
  for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.features.cols(); ++j) out << data.features(i, j) << ',';
    out << data.labels[i] << '\n';
  }
  if (!out) throw DataError("failed writing dataset '" + path.string() + "'");
}

}  // namespace rnshmc
