#pragma once

#include <optional>
#include <string>
#include <vector>

#include "debayes/matrix.hpp"

namespace debayes {

// Per-column centering/scaling constants retained when a dataset is
// standardized, so estimates can be mapped back to the original scale.
struct Standardization {
  Vector center;
  Vector scale;
};

// n observations of p covariates plus a response.  Immutable after
// construction and validated on construction: finite entries, n >= 2,
// p >= 1, matching dimensions.
class Dataset {
 public:
  Dataset(Matrix design, Vector response,
          std::vector<std::string> column_names = {},
          std::optional<Standardization> standardization = std::nullopt);

  std::size_t n() const { return design_.rows(); }
  std::size_t p() const { return design_.cols(); }
  const Matrix& design() const { return design_; }
  const Vector& response() const { return response_; }
  const std::vector<std::string>& column_names() const { return column_names_; }
  const std::optional<Standardization>& standardization() const { return standardization_; }

 private:
  Matrix design_;
  Vector response_;
  std::vector<std::string> column_names_;
  std::optional<Standardization> standardization_;
};

struct CredibleInterval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  std::size_t coefficient_index = 0;
};

// Rectangular numeric CSV with a header row; `response_column` is a header
// label or a 0-based column index.  With standardize set, covariate columns
// are centered and scaled to unit sample standard deviation.
Dataset load_csv(const std::string& path, const std::string& response_column,
                 bool standardize = false);

// (1/n) X^T X
Matrix gram_matrix(const Dataset& d);

// Full-precision export; round-trips bit-exactly through load_csv when the
// dataset is unstandardized.
void export_csv(const Dataset& d, const std::string& path);

void export_standardization_json(const Dataset& d, const std::string& path);

}  // namespace debayes
