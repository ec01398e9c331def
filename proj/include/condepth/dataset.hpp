#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "condepth/metrics.hpp"

namespace condepth {

/// Malformed or inconsistent input file; the message names file, row and column.
class LoadError : public InputError {
public:
    using InputError::InputError;
};

/// Paired observations (X_i, Y_i), i = 1..n.
struct Dataset {
    Eigen::MatrixXd responses;  ///< n x p
    CovariateSet covariates;
    std::vector<std::string> response_names;
    std::vector<std::string> covariate_names;

    Eigen::Index size() const { return responses.rows(); }
    Eigen::Index response_dimension() const { return responses.cols(); }

    /// Throws unless row counts agree and p >= 1.
    void validate() const;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Reads an RFC 4180 style table: comma separated, optional double quotes,
/// first line is the header.
CsvTable read_csv(std::istream& in, const std::string& source);
CsvTable read_csv_file(const std::filesystem::path& path);

/// Parses every data cell as a finite real number.
Eigen::MatrixXd numeric_matrix(const CsvTable& table, const std::string& source);

/// Parses the header cells as real numbers (a header row of grid values).
Eigen::VectorXd numeric_header(const CsvTable& table, const std::string& source);

struct DatasetFiles {
    std::filesystem::path responses;
    std::filesystem::path covariates;
    /// Curve grid: a one-row CSV, with or without a header line.
    std::optional<std::filesystem::path> grid;
    /// Curves whose grid values are the covariate file's header row.
    bool grid_in_header = false;
};

Dataset load_dataset(const DatasetFiles& files);

/// Writes responses.csv, covariates.csv and, for curves, grid.csv into dir.
void write_dataset(const Dataset& data, const std::filesystem::path& dir);

/// Shortest decimal text that reads back to exactly the same double.
std::string format_exact(double v);

}  // namespace condepth
