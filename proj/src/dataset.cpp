#include "debayes/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "debayes/errors.hpp"
#include "debayes/kernels.hpp"

#include "json.hpp"

namespace debayes {

Dataset::Dataset(Matrix design, Vector response,
                 std::vector<std::string> column_names,
                 std::optional<Standardization> standardization)
    : design_(std::move(design)),
      response_(std::move(response)),
      column_names_(std::move(column_names)),
      standardization_(std::move(standardization)) {
  const std::size_t n = design_.rows();
  const std::size_t p = design_.cols();
  if (n < 2) throw DataError("dataset needs at least 2 observations, got " + std::to_string(n));
  if (p < 1) throw DataError("dataset needs at least 1 covariate");
  if (response_.size() != n)
    throw DataError("response length " + std::to_string(response_.size()) +
                    " does not match " + std::to_string(n) + " design rows");
  if (!column_names_.empty() && column_names_.size() != p)
    throw DataError("expected " + std::to_string(p) + " column names");
  for (std::size_t i = 0; i < n * p; ++i)
    if (!std::isfinite(design_.data()[i])) throw DataError("non-finite entry in design matrix");
  for (double v : response_)
    if (!std::isfinite(v)) throw DataError("non-finite entry in response");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& col) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw DataError("non-numeric cell '" + cell + "' at data row " + std::to_string(row) +
                    ", column '" + col + "'");
  return value;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& response_column,
                 bool standardize) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open input file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  if (header.empty()) throw DataError("empty header row in " + path);

  // resolve the response column: label first, then numeric index
  std::size_t response_idx = header.size();
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == response_column) response_idx = j;
  if (response_idx == header.size()) {
    std::size_t idx = 0;
    const auto [ptr, ec] = std::from_chars(
        response_column.data(), response_column.data() + response_column.size(), idx);
    if (ec == std::errc{} && ptr == response_column.data() + response_column.size() &&
        idx < header.size())
      response_idx = idx;
  }
  if (response_idx == header.size())
    throw DataError("response column '" + response_column + "' not found in " + path);

  std::vector<Vector> rows;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row_no;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw DataError("ragged row " + std::to_string(row_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    Vector row(fields.size());
    for (std::size_t j = 0; j < fields.size(); ++j)
      row[j] = parse_cell(fields[j], row_no, header[j]);
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw DataError("need at least 2 data rows, got " + std::to_string(rows.size()));
  if (header.size() < 2) throw DataError("need at least one covariate column besides the response");

  const std::size_t n = rows.size();
  const std::size_t p = header.size() - 1;
  Matrix design(n, p);
  Vector response(n);
  std::vector<std::string> names;
  names.reserve(p);
  for (std::size_t j = 0; j < header.size(); ++j)
    if (j != response_idx) names.push_back(header[j]);
  for (std::size_t i = 0; i < n; ++i) {
    response[i] = rows[i][response_idx];
    std::size_t jj = 0;
    for (std::size_t j = 0; j < header.size(); ++j)
      if (j != response_idx) design(i, jj++) = rows[i][j];
  }

  std::optional<Standardization> std_info;
  if (standardize) {
    Standardization s;
    s.center.resize(p);
    s.scale.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += design(i, j);
      mean /= static_cast<double>(n);
      double ss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double c = design(i, j) - mean;
        ss += c * c;
      }
      const double sd = std::sqrt(ss / static_cast<double>(n - 1));
      if (!(sd > 0.0))
        throw DataError("zero-variance column '" + names[j] + "' cannot be standardized");
      for (std::size_t i = 0; i < n; ++i) design(i, j) = (design(i, j) - mean) / sd;
      s.center[j] = mean;
      s.scale[j] = sd;
    }
    std_info = std::move(s);
  }

  return Dataset(std::move(design), std::move(response), std::move(names), std::move(std_info));
}

Matrix gram_matrix(const Dataset& d) {
  const std::size_t n = d.n();
  const std::size_t p = d.p();
  Matrix g(p, p);
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = d.design().row(i);
    for (std::size_t j = 0; j < p; ++j)
      if (xi[j] != 0.0) kernels::axpy(g.row(j), xi[j], xi, p);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < p * p; ++k) g.data()[k] *= inv_n;
  // enforce exact symmetry against accumulation-order rounding
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i + 1; j < p; ++j) {
      const double v = 0.5 * (g(i, j) + g(j, i));
      g(i, j) = v;
      g(j, i) = v;
    }
  return g;
}

void export_csv(const Dataset& d, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) throw DataError("cannot write " + path);
  std::fputs("y", f);
  for (std::size_t j = 0; j < d.p(); ++j) {
    if (d.column_names().empty())
      std::fprintf(f, ",x%zu", j + 1);
    else
      std::fprintf(f, ",%s", d.column_names()[j].c_str());
  }
  std::fputc('\n', f);
  for (std::size_t i = 0; i < d.n(); ++i) {
    std::fprintf(f, "%.17g", d.response()[i]);
    for (std::size_t j = 0; j < d.p(); ++j) std::fprintf(f, ",%.17g", d.design()(i, j));
    std::fputc('\n', f);
  }
  std::fclose(f);
}

void export_standardization_json(const Dataset& d, const std::string& path) {
  nlohmann::json j;
  if (d.standardization()) {
    j["center"] = d.standardization()->center;
    j["scale"] = d.standardization()->scale;
  } else {
    j["center"] = nlohmann::json::array();
    j["scale"] = nlohmann::json::array();
  }
  if (!d.column_names().empty()) j["columns"] = d.column_names();
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace debayes
