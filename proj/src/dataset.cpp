#include "robsens/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "robsens/errors.hpp"

namespace robsens {

namespace {

std::string strip(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, delim)) out.push_back(strip(field));
  if (!line.empty() && line.back() == delim) out.push_back("");
  return out;
}

double parse_number(const std::string& text, const std::string& where) {
  const std::string t = strip(text);
  if (t.empty()) throw NonNumericValueError("empty value in " + where);
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || !std::isfinite(v))
    throw NonNumericValueError("non-numeric value '" + t + "' in " + where);
  return v;
}

}  // namespace

ColumnTransform parse_transform(const std::string& text) {
  const std::string t = strip(text);
  auto call = [&](const std::string& fn) -> std::string {
    if (t.size() > fn.size() + 2 && t.compare(0, fn.size() + 1, fn + "(") == 0 &&
        t.back() == ')')
      return strip(t.substr(fn.size() + 1, t.size() - fn.size() - 2));
    return "";
  };
  if (std::string inner = call("standardize"); !inner.empty())
    return {TransformKind::Standardize, inner, ""};
  if (std::string inner = call("product"); !inner.empty()) {
    auto comma = inner.find(',');
    if (comma == std::string::npos)
      throw ConfigError("product(...) needs two columns: " + t);
    return {TransformKind::Product, strip(inner.substr(0, comma)),
            strip(inner.substr(comma + 1))};
  }
  if (t.empty()) throw ConfigError("empty transform selector");
  return {TransformKind::Identity, t, ""};
}

TransformSpec TransformSpec::identity(const std::vector<std::string>& s_cols,
                                      const std::vector<std::string>& g_cols) {
  TransformSpec spec;
  for (const auto& c : s_cols) spec.s_columns.push_back({TransformKind::Identity, c, ""});
  for (const auto& c : g_cols) spec.g_columns.push_back({TransformKind::Identity, c, ""});
  return spec;
}

Dataset::Dataset(std::vector<Observation> rows, std::vector<std::string> x_names) {
  const int n = static_cast<int>(rows.size());
  int p = n > 0 ? static_cast<int>(rows[0].x.size()) : 0;
  for (const auto& r : rows) {
    if (static_cast<int>(r.x.size()) != p)
      throw DimensionMismatchError("ragged covariate rows");
    if (r.z != 0 && r.z != 1)
      throw NonBinaryTreatmentError("treatment must be 0 or 1");
    if (!std::isfinite(r.y))
      throw NonNumericValueError("non-finite outcome");
    for (double v : r.x)
      if (!std::isfinite(v)) throw NonNumericValueError("non-finite covariate");
  }
  if (x_names.empty())
    for (int j = 0; j < p; ++j) x_names.push_back("x" + std::to_string(j + 1));
  if (static_cast<int>(x_names.size()) != p)
    throw DimensionMismatchError("covariate name count does not match width");

  // Stable treated-first reorder.
  std::vector<int> order;
  order.reserve(n);
  for (int i = 0; i < n; ++i)
    if (rows[i].z == 1) order.push_back(i);
  n1_ = static_cast<int>(order.size());
  for (int i = 0; i < n; ++i)
    if (rows[i].z == 0) order.push_back(i);
  n0_ = n - n1_;
  if (n1_ == 0 || n0_ == 0) throw AllTreatedOrAllControlError();

  y_.resize(n);
  z_.resize(n);
  x_.resize(n, p);
  original_index_ = order;
  x_names_ = std::move(x_names);
  for (int i = 0; i < n; ++i) {
    const Observation& r = rows[order[i]];
    y_[i] = r.y;
    z_[i] = r.z;
    for (int j = 0; j < p; ++j) x_(i, j) = r.x[j];
  }
}

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);

  std::string header_line;
  if (!std::getline(in, header_line)) throw Error("empty file: " + path);
  if (!header_line.empty() && header_line.back() == '\r') header_line.pop_back();
  std::vector<std::string> header = split_line(header_line, schema.delimiter);

  auto column_of = [&](const std::string& name) -> int {
    for (int j = 0; j < static_cast<int>(header.size()); ++j)
      if (header[j] == name) return j;
    throw MissingColumnError(name);
  };

  const int yc = column_of(schema.y_column);
  const int zc = column_of(schema.z_column);
  std::vector<int> xcols;
  std::vector<std::string> xnames;
  if (schema.x_columns.empty()) {
    for (int j = 0; j < static_cast<int>(header.size()); ++j)
      if (j != yc && j != zc) {
        xcols.push_back(j);
        xnames.push_back(header[j]);
      }
  } else {
    for (const auto& name : schema.x_columns) {
      xcols.push_back(column_of(name));
      xnames.push_back(name);
    }
  }

  std::vector<Observation> rows;
  std::string line;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (strip(line).empty()) continue;
    std::vector<std::string> fields = split_line(line, schema.delimiter);
    if (fields.size() < header.size())
      throw NonNumericValueError("line " + std::to_string(lineno) +
                                 ": expected " + std::to_string(header.size()) +
                                 " fields");
    Observation obs;
    const std::string where = "line " + std::to_string(lineno);
    obs.y = parse_number(fields[yc], where + ", column " + schema.y_column);
    double zval = parse_number(fields[zc], where + ", column " + schema.z_column);
    if (zval != 0.0 && zval != 1.0)
      throw NonBinaryTreatmentError(where + ": treatment value " +
                                    fields[zc] + " is not 0/1");
    obs.z = static_cast<int>(zval);
    for (size_t j = 0; j < xcols.size(); ++j)
      obs.x.push_back(parse_number(fields[xcols[j]], where + ", column " + xnames[j]));
    rows.push_back(std::move(obs));
  }
  if (rows.empty()) throw Error("no data rows in " + path);
  return Dataset(std::move(rows), std::move(xnames));
}

namespace {

Eigen::VectorXd transformed_column(const Dataset& data, const ColumnTransform& tr) {
  const auto& names = data.x_names();
  auto col_index = [&](const std::string& name) -> int {
    for (int j = 0; j < static_cast<int>(names.size()); ++j)
      if (names[j] == name) return j;
    throw MissingColumnError(name);
  };
  const int n = data.n();
  switch (tr.kind) {
    case TransformKind::Identity:
      return data.x().col(col_index(tr.a));
    case TransformKind::Standardize: {
      Eigen::VectorXd c = data.x().col(col_index(tr.a));
      const double mean = c.mean();
      const double sd = n > 1 ? std::sqrt((c.array() - mean).square().sum() / (n - 1)) : 0.0;
      if (sd <= 1e-12)
        throw RankDeficientDesignError("standardize(" + tr.a + "): zero spread");
      return (c.array() - mean) / sd;
    }
    case TransformKind::Product:
      return data.x().col(col_index(tr.a)).cwiseProduct(
          data.x().col(col_index(tr.b)));
  }
  throw ConfigError("unknown transform kind");
}

}  // namespace

Dataset build_designs(Dataset dataset, const TransformSpec& spec) {
  const int n = dataset.n();
  const int ds = static_cast<int>(spec.s_columns.size());
  const int dg = static_cast<int>(spec.g_columns.size());

  Eigen::MatrixXd s(n, 1 + ds);
  s.col(0).setOnes();
  for (int j = 0; j < ds; ++j)
    s.col(1 + j) = transformed_column(dataset, spec.s_columns[j]);

  Eigen::MatrixXd g(n, dg);
  for (int j = 0; j < dg; ++j)
    g.col(j) = transformed_column(dataset, spec.g_columns[j]);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(s);
  qr.setThreshold(1e-10);
  if (qr.rank() < s.cols())
    throw RankDeficientDesignError("s design has linearly dependent columns");

  dataset.s_design_ = std::move(s);
  dataset.g_design_ = std::move(g);
  return dataset;
}

}  // namespace robsens
