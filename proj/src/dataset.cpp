#include "condepth/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace condepth {

void Dataset::validate() const {
    if (responses.cols() < 1) throw InputError("responses need at least one column");
    if (responses.rows() < 1) throw InputError("dataset has no rows");
    if (responses.rows() != covariates.size()) {
        throw InputError("responses have " + std::to_string(responses.rows()) + " rows but covariates have " +
                         std::to_string(covariates.size()));
    }
    if (!responses.allFinite()) throw InputError("responses contain non-finite values");
}

namespace {

std::vector<std::string> split_record(const std::string& line, const std::string& source, std::size_t line_no) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else {
            cell += c;
        }
    }
    if (quoted) throw LoadError(source + ": unterminated quote on line " + std::to_string(line_no));
    cells.push_back(std::move(cell));
    return cells;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

bool parse_real(const std::string& text, double& out) {
    const std::string t = trim(text);
    if (t.empty()) return false;
    const char* begin = t.data();
    if (*begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, t.data() + t.size(), out);
    return ec == std::errc() && ptr == t.data() + t.size() && std::isfinite(out);
}

bool is_missing(const std::string& text) {
    const std::string t = trim(text);
    return t.empty() || t == "NA" || t == "NaN" || t == "nan" || t == "null";
}

}  // namespace

CsvTable read_csv(std::istream& in, const std::string& source) {
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto cells = split_record(line, source, line_no);
        if (!have_header) {
            for (auto& c : cells) c = trim(c);
            table.header = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != table.header.size()) {
            throw LoadError(source + ": line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                            " fields, header has " + std::to_string(table.header.size()));
        }
        table.rows.push_back(std::move(cells));
    }
    if (!have_header) throw LoadError(source + ": file is empty (a header row is required)");
    return table;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open " + path.string());
    return read_csv(in, path.string());
}

Eigen::MatrixXd numeric_matrix(const CsvTable& table, const std::string& source) {
    const auto rows = static_cast<Eigen::Index>(table.rows.size());
    const auto cols = static_cast<Eigen::Index>(table.header.size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            const std::string& cell = table.rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            const std::string where = source + ": row " + std::to_string(r + 1) + ", column " +
                                      std::to_string(c + 1) + " ('" + table.header[static_cast<std::size_t>(c)] + "')";
            if (is_missing(cell)) throw LoadError(where + " is missing");
            double v = 0.0;
            if (!parse_real(cell, v)) throw LoadError(where + " is not a finite number: '" + cell + "'");
            m(r, c) = v;
        }
    }
    return m;
}

Eigen::VectorXd numeric_header(const CsvTable& table, const std::string& source) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(table.header.size()));
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        double x = 0.0;
        if (!parse_real(table.header[c], x)) {
            throw LoadError(source + ": header column " + std::to_string(c + 1) + " ('" + table.header[c] +
                            "') is not a grid value");
        }
        v(static_cast<Eigen::Index>(c)) = x;
    }
    return v;
}

Dataset load_dataset(const DatasetFiles& files) {
    const std::string ysrc = files.responses.string();
    const std::string xsrc = files.covariates.string();
    const CsvTable ytab = read_csv_file(files.responses);
    const CsvTable xtab = read_csv_file(files.covariates);
    if (ytab.rows.size() != xtab.rows.size()) {
        throw LoadError("row count mismatch: " + ysrc + " has " + std::to_string(ytab.rows.size()) + " rows, " +
                        xsrc + " has " + std::to_string(xtab.rows.size()));
    }
    if (ytab.rows.empty()) throw LoadError(ysrc + ": no data rows");
    Eigen::MatrixXd y = numeric_matrix(ytab, ysrc);
    Eigen::MatrixXd x = numeric_matrix(xtab, xsrc);

    std::optional<Eigen::VectorXd> grid;
    if (files.grid) {
        const std::string gsrc = files.grid->string();
        const CsvTable gtab = read_csv_file(*files.grid);
        if (gtab.rows.empty()) {
            grid = numeric_header(gtab, gsrc);
        } else if (gtab.rows.size() == 1) {
            grid = numeric_matrix(gtab, gsrc).row(0).transpose();
        } else {
            throw LoadError(gsrc + ": grid file must hold a single row of grid values");
        }
    } else if (files.grid_in_header) {
        grid = numeric_header(xtab, xsrc);
    }

    try {
        Dataset data{std::move(y),
                     grid ? CovariateSet::curves(std::move(x), std::move(*grid)) : CovariateSet::vectors(std::move(x)),
                     ytab.header, xtab.header};
        data.validate();
        return data;
    } catch (const LoadError&) {
        throw;
    } catch (const InputError& e) {
        throw LoadError(e.what());
    }
}

std::string format_exact(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

namespace {

void write_matrix(const std::filesystem::path& path, const std::vector<std::string>& header,
                  const Eigen::MatrixXd& m) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << format_exact(m(r, c));
        out << '\n';
    }
}

std::vector<std::string> default_names(const std::string& stem, Eigen::Index count) {
    std::vector<std::string> names;
    for (Eigen::Index i = 0; i < count; ++i) names.push_back(stem + std::to_string(i + 1));
    return names;
}

}  // namespace

void write_dataset(const Dataset& data, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto ynames = data.response_names.size() == static_cast<std::size_t>(data.responses.cols())
                            ? data.response_names
                            : default_names("y", data.responses.cols());
    write_matrix(dir / "responses.csv", ynames, data.responses);
    const auto& x = data.covariates.values();
    if (data.covariates.kind() == CovariateKind::Curve) {
        const auto xnames = default_names("t", x.cols());
        write_matrix(dir / "covariates.csv", xnames, x);
        write_matrix(dir / "grid.csv", xnames, data.covariates.grid().transpose());
    } else {
        const auto xnames = data.covariate_names.size() == static_cast<std::size_t>(x.cols())
                                ? data.covariate_names
                                : default_names("x", x.cols());
        write_matrix(dir / "covariates.csv", xnames, x);
    }
}

}  // namespace condepth
