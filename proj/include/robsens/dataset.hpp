#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace robsens {

struct Observation {
  double y = 0.0;
  int z = 0;
  std::vector<double> x;
};

enum class TransformKind { Identity, Standardize, Product };

struct ColumnTransform {
  TransformKind kind = TransformKind::Identity;
  std::string a;  // source column
  std::string b;  // second factor, Product only
};

/// Parses "age", "standardize(age)" or "product(age,income)".
ColumnTransform parse_transform(const std::string& text);

struct TransformSpec {
  std::vector<ColumnTransform> s_columns;
  std::vector<ColumnTransform> g_columns;

  static TransformSpec identity(const std::vector<std::string>& s_cols,
                                const std::vector<std::string>& g_cols);
};

/// Observed sample in canonical order: treated units first, controls after,
/// both in stable original order. Immutable once built.
class Dataset {
 public:
  Dataset() = default;
  /// Reorders the rows into canonical order and checks n1, n0 >= 1.
  explicit Dataset(std::vector<Observation> rows,
                   std::vector<std::string> x_names = {});

  int n() const { return static_cast<int>(y_.size()); }
  int n1() const { return n1_; }
  int n0() const { return n0_; }
  bool treated(int i) const { return i < n1_; }

  const std::vector<double>& y() const { return y_; }
  const std::vector<int>& z() const { return z_; }
  const Eigen::MatrixXd& x() const { return x_; }
  const std::vector<std::string>& x_names() const { return x_names_; }
  /// Canonical row i came from this 0-based row of the input.
  const std::vector<int>& original_index() const { return original_index_; }

  bool has_designs() const { return s_design_.cols() > 0; }
  const Eigen::MatrixXd& s_design() const { return s_design_; }
  const Eigen::MatrixXd& g_design() const { return g_design_; }

  friend Dataset build_designs(Dataset dataset, const TransformSpec& spec);

 private:
  std::vector<double> y_;
  std::vector<int> z_;
  Eigen::MatrixXd x_;
  std::vector<std::string> x_names_;
  std::vector<int> original_index_;
  int n1_ = 0;
  int n0_ = 0;
  Eigen::MatrixXd s_design_;  // n x (1 + dim_s), intercept first
  Eigen::MatrixXd g_design_;  // n x dim_g, no intercept
};

struct CsvSchema {
  std::string y_column;
  std::string z_column;
  std::vector<std::string> x_columns;  // empty: every other column
  char delimiter = ',';
};

Dataset load_csv(const std::string& path, const CsvSchema& schema);

/// Populates s_design (intercept prepended) and g_design. Standardization
/// statistics come from the pooled sample. Throws RankDeficientDesignError
/// when the s columns are linearly dependent (tolerance 1e-10) or a
/// standardized column has zero spread.
Dataset build_designs(Dataset dataset, const TransformSpec& spec);

}  // namespace robsens
