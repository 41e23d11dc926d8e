#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rnshmc/types.hpp"

namespace rnshmc {

struct Dataset {
  Matrix features;  // N x d
  Vector labels;    // N
  std::vector<std::string> featureNames;
  std::string labelName = "y";
  bool standardized = false;

  std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(features.cols()); }
};

/// Centers every feature column and scales it to unit (population) standard
/// deviation. Constant columns map to all zeros; their indices are returned so
/// the caller can warn about them.
std::vector<std::size_t> standardize(Dataset& data);

/// Prepends a column of ones named "intercept".
void add_intercept(Dataset& data);

/// Reads a comma-delimited numeric table with a header row. The column named
/// `labelColumn` becomes the labels; every other column becomes a feature.
/// Zero-variance columns are reported on stderr when standardizing.
Dataset load_csv_dataset(const std::filesystem::path& path, const std::string& labelColumn,
                         bool standardizeFeatures);

/// Writes features then the label column, 17 significant digits.
void write_csv_dataset(const std::filesystem::path& path, const Dataset& data);

}  // namespace rnshmc
