// Copyright 2026 The copsurv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "copsurv/dataset.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "copsurv/csv.hpp"
#include "copsurv/distributions.hpp"
#include "copsurv/errors.hpp"
#include "copsurv/random.hpp"

namespace copsurv {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(first, last - first + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
      cell += ch;
    } else if (ch == ',' && !quoted) {
      cells.push_back(trim(cell));
      cell.clear();
    } else {
      cell += ch;
    }
  }
  cells.push_back(trim(cell));
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtod(s.c_str(), &end);
  return errno == 0 && end == s.c_str() + s.size();
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DataError("missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

std::vector<std::size_t> identity_order(std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  return order;
}

}  // namespace

std::size_t SurvivalDataset::observed_count() const {
  return static_cast<std::size_t>((status.array() == 1).count());
}

double SurvivalDataset::censored_fraction() const {
  if (size() == 0) return 0.0;
  return 1.0 - static_cast<double>(observed_count()) / static_cast<double>(size());
}

void validate(const SurvivalDataset& data) {
  const auto n = data.times.size();
  if (data.status.size() != n) throw DataError("status length differs from times length");
  if (data.has_covariates() && data.covariates.rows() != n)
    throw DataError("covariate matrix must have one row per record");
  if (data.order.size() != static_cast<std::size_t>(n))
    throw DataError("order must have one entry per record");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(data.times[i] > 0) || !std::isfinite(data.times[i]))
      throw ParseError(static_cast<std::size_t>(i) + 1, "time must be a positive finite number");
    if (data.status[i] != 0 && data.status[i] != 1)
      throw ParseError(static_cast<std::size_t>(i) + 1, "status must be 0 or 1");
  }
  if (data.has_covariates() && !data.covariates.allFinite())
    throw DataError("covariates must be finite");
}

SurvivalDataset make_dataset(const Eigen::VectorXd& times, const Eigen::VectorXi& status,
                             const CovariateMatrix& covariates,
                             std::vector<std::string> covariate_names) {
  SurvivalDataset data;
  data.times = times;
  data.status = status;
  data.covariates = covariates.cols() > 0 ? covariates : CovariateMatrix(times.size(), 0);
  data.covariate_names = std::move(covariate_names);
  if (data.covariate_names.empty())
    for (Eigen::Index j = 0; j < data.covariates.cols(); ++j)
      data.covariate_names.push_back("x" + std::to_string(j + 1));
  data.order = identity_order(data.size());
  validate(data);
  return data;
}

SurvivalDataset parse_csv(const std::string& text, const CsvSchema& schema) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    header = split_line(line);
    break;
  }
  if (header.empty()) throw DataError("empty dataset: no header row");

  const std::size_t t_col = column_index(header, schema.time_column);
  const std::size_t s_col = column_index(header, schema.status_column);
  std::vector<std::size_t> x_cols;
  for (const auto& name : schema.covariate_columns) x_cols.push_back(column_index(header, name));
  std::optional<std::size_t> f_col;
  if (schema.filter_column) f_col = column_index(header, *schema.filter_column);

  std::vector<double> times;
  std::vector<int> status;
  std::vector<double> xs;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_line(line);
    if (cells.size() != header.size())
      throw ParseError(row, "expected " + std::to_string(header.size()) + " fields, found " +
                                std::to_string(cells.size()));
    if (f_col && cells[*f_col] != schema.filter_value) continue;
    double t = 0;
    if (!parse_double(cells[t_col], t) || !(t > 0) || !std::isfinite(t))
      throw ParseError(row, "time '" + cells[t_col] + "' is not a positive number");
    double s = 0;
    if (!parse_double(cells[s_col], s) || (s != 0.0 && s != 1.0))
      throw ParseError(row, "status '" + cells[s_col] + "' is not 0 or 1");
    for (const auto c : x_cols) {
      double x = 0;
      if (!parse_double(cells[c], x) || !std::isfinite(x))
        throw ParseError(row, "covariate '" + header[c] + "' value '" + cells[c] + "' is not numeric");
      xs.push_back(x);
    }
    times.push_back(t);
    status.push_back(static_cast<int>(s));
  }
  if (times.empty()) throw DataError("empty dataset: no records");

  const auto n = static_cast<Eigen::Index>(times.size());
  const auto d = static_cast<Eigen::Index>(x_cols.size());
  CovariateMatrix cov(n, d);
  if (d > 0) cov = Eigen::Map<const CovariateMatrix>(xs.data(), n, d);
  return make_dataset(Eigen::Map<const Eigen::VectorXd>(times.data(), n),
                      Eigen::Map<const Eigen::VectorXi>(status.data(), n), cov,
                      schema.covariate_columns);
}

SurvivalDataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), schema);
}

std::string to_csv(const SurvivalDataset& data) {
  std::vector<std::string> header{"time", "status"};
  for (const auto& name : data.covariate_names) header.push_back(name);
  std::string out;
  for (std::size_t j = 0; j < header.size(); ++j) out += (j ? "," : "") + header[j];
  out += '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out += format_number(data.times[r]) + "," + std::to_string(data.status[r]);
    for (Eigen::Index j = 0; j < data.covariates.cols(); ++j)
      out += "," + format_number(data.covariates(r, j));
    out += '\n';
  }
  return out;
}

SurvivalDataset standardize(const SurvivalDataset& data, const StandardizeOptions& options) {
  validate(data);
  const double events = static_cast<double>(data.observed_count());
  if (events < 1) throw DataError("standardization needs at least one observed event");
  const double rate_mle = events / data.times.sum();

  SurvivalDataset out = data;
  out.times = data.times * rate_mle;
  out.scale_factor = data.scale_factor * rate_mle;

  if (data.has_covariates() && data.covariate_scaling.empty()) {
    const auto n = data.covariates.rows();
    std::vector<Eigen::Index> kept;
    out.covariate_scaling.clear();
    for (Eigen::Index j = 0; j < data.covariates.cols(); ++j) {
      CovariateScaling s;
      if (options.zscore_covariates) {
        const auto col = data.covariates.col(j);
        s.mean = col.mean();
        const double ss = (col.array() - s.mean).square().sum();
        s.sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
        s.dropped = !(s.sd > 0);
      }
      if (s.dropped) s.sd = 0.0;
      else kept.push_back(j);
      out.covariate_scaling.push_back(s);
    }
    CovariateMatrix reduced(n, static_cast<Eigen::Index>(kept.size()));
    std::vector<std::string> names;
    for (std::size_t k = 0; k < kept.size(); ++k) {
      const auto& s = out.covariate_scaling[static_cast<std::size_t>(kept[k])];
      reduced.col(static_cast<Eigen::Index>(k)) =
          (data.covariates.col(kept[k]).array() - s.mean) / s.sd;
      names.push_back(data.covariate_names[static_cast<std::size_t>(kept[k])]);
    }
    out.covariates = std::move(reduced);
    out.covariate_names = std::move(names);
  }
  return out;
}

std::vector<double> transform_covariates(std::span<const double> x, const SurvivalDataset& reference) {
  if (reference.covariate_scaling.empty()) {
    if (x.size() != reference.dim()) throw ShapeError("covariate vector has the wrong dimension");
    return {x.begin(), x.end()};
  }
  if (x.size() != reference.covariate_scaling.size())
    throw ShapeError("covariate vector has the wrong dimension");
  std::vector<double> out;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto& s = reference.covariate_scaling[j];
    if (s.dropped) continue;
    out.push_back((x[j] - s.mean) / s.sd);
  }
  return out;
}

SurvivalDataset apply_standardization(const SurvivalDataset& data, const SurvivalDataset& reference) {
  SurvivalDataset out = data;
  out.times = data.times * (reference.scale_factor / data.scale_factor);
  out.scale_factor = reference.scale_factor;
  if (data.has_covariates() && !reference.covariate_scaling.empty()) {
    CovariateMatrix cov(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(reference.dim()));
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto row = transform_covariates(data.covariate(i), reference);
      for (std::size_t j = 0; j < row.size(); ++j)
        cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    }
    out.covariates = std::move(cov);
    out.covariate_names = reference.covariate_names;
    out.covariate_scaling = reference.covariate_scaling;
  }
  return out;
}

SurvivalDataset subset(const SurvivalDataset& data, std::span<const std::size_t> positions) {
  SurvivalDataset out = data;
  const auto m = static_cast<Eigen::Index>(positions.size());
  out.times.resize(m);
  out.status.resize(m);
  out.covariates.resize(m, data.covariates.cols());
  out.order.resize(positions.size());
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto p = positions[static_cast<std::size_t>(k)];
    if (p >= data.size()) throw std::out_of_range("subset: position out of range");
    const auto src = static_cast<Eigen::Index>(p);
    out.times[k] = data.times[src];
    out.status[k] = data.status[src];
    if (data.has_covariates()) out.covariates.row(k) = data.covariates.row(src);
    out.order[static_cast<std::size_t>(k)] = data.order[p];
  }
  return out;
}

SurvivalDataset permute(const SurvivalDataset& data, std::uint64_t seed) {
  std::vector<std::size_t> perm = identity_order(data.size());
  StreamRng rng(seed, StreamTag::permute);
  for (std::size_t i = perm.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return subset(data, perm);
}

SurvivalDataset observed_first(const SurvivalDataset& data) {
  std::vector<std::size_t> positions;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data.observed(i)) positions.push_back(i);
  for (std::size_t i = 0; i < data.size(); ++i)
    if (!data.observed(i)) positions.push_back(i);
  return subset(data, positions);
}

SurvivalDataset restore_order(const SurvivalDataset& data) {
  std::vector<std::size_t> positions = identity_order(data.size());
  std::sort(positions.begin(), positions.end(),
            [&](std::size_t a, std::size_t b) { return data.order[a] < data.order[b]; });
  return subset(data, positions);
}

SurvivalDataset simulate_exponential(std::size_t n, double rate_y, double rate_c, std::uint64_t seed) {
  if (n == 0) throw ConfigurationError("simulate: n must be at least 1");
  if (!(rate_y > 0) || !(rate_c > 0)) throw ConfigurationError("simulate: rates must be positive");
  StreamRng rng(seed, StreamTag::simulate);
  Eigen::VectorXd times(static_cast<Eigen::Index>(n));
  Eigen::VectorXi status(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < times.size(); ++i) {
    const double y = exponential_inv_cdf(rng.uniform(), rate_y);
    const double c = exponential_inv_cdf(rng.uniform(), rate_c);
    status[i] = y < c ? 1 : 0;
    times[i] = std::min(y, c);
  }
  return make_dataset(times, status);
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> train_test_split(
    std::size_t n, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0) || !(test_fraction < 1))
    throw ConfigurationError("test fraction must lie in (0, 1)");
  std::vector<std::size_t> perm = identity_order(n);
  StreamRng rng(seed, StreamTag::split);
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  std::vector<std::size_t> test(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {train, test};
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigurationError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ConfigurationError("failed writing '" + path + "'");
}

}  // namespace copsurv
