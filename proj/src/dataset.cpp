#include "windgrid/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "windgrid/errors.hpp"
#include "windgrid/rng.hpp"

namespace windgrid {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

bool is_missing_token(const std::string& tok) {
  return tok.empty() || tok == "NA" || tok == "NaN";
}

}  // namespace

int Dataset::column_index(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
}

int Dataset::missing_count() const {
  int n = 0;
  for (const auto& col : mask)
    for (bool m : col) n += m ? 1 : 0;
  return n;
}

Dataset load_timeseries_csv(const std::string& path,
                            const std::vector<std::string>& schema) {
  std::ifstream file(path);
  if (!file) throw FileNotFound("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(file, line)) throw HeaderMismatch("CSV file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  Dataset data;
  data.columns = split_csv_line(line);
  if (data.columns.empty()) throw HeaderMismatch("CSV header is empty");
  if (!schema.empty() && data.columns != schema) {
    std::string want;
    for (const auto& c : schema) want += (want.empty() ? "" : ",") + c;
    throw HeaderMismatch("CSV header does not match expected columns " + want);
  }
  data.values.resize(data.columns.size());
  data.mask.resize(data.columns.size());

  int row = 1;
  while (std::getline(file, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != data.columns.size())
      throw ParseError("CSV row " + std::to_string(row) + ": expected " +
                       std::to_string(data.columns.size()) + " fields, got " +
                       std::to_string(fields.size()));
    for (size_t c = 0; c < fields.size(); ++c) {
      if (is_missing_token(fields[c])) {
        data.values[c].push_back(std::numeric_limits<double>::quiet_NaN());
        data.mask[c].push_back(true);
        continue;
      }
      try {
        size_t used = 0;
        const double v = std::stod(fields[c], &used);
        if (used != fields[c].size()) throw std::invalid_argument(fields[c]);
        data.values[c].push_back(v);
        data.mask[c].push_back(false);
      } catch (...) {
        throw ParseError("CSV row " + std::to_string(row) + " column '" +
                         data.columns[c] + "': cannot parse '" + fields[c] +
                         "'");
      }
    }
  }
  return data;
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
  std::ofstream file(path);
  if (!file) throw FileNotFound("cannot open '" + path + "' for writing");
  for (size_t c = 0; c < data.columns.size(); ++c)
    file << (c ? "," : "") << data.columns[c];
  file << '\n';
  for (int r = 0; r < data.row_count(); ++r) {
    for (size_t c = 0; c < data.columns.size(); ++c) {
      if (c) file << ',';
      if (data.mask[c][static_cast<size_t>(r)]) continue;  // empty cell
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.10g",
                    data.values[c][static_cast<size_t>(r)]);
      file << buf;
    }
    file << '\n';
  }
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& data,
                                          double train_fraction,
                                          SplitMode mode, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InvalidArgument("train fraction must lie in (0, 1)");
  const int n = data.row_count();
  if (n < 2) throw InvalidArgument("need at least two rows to split");
  const int n_train = std::max(
      1, std::min(n - 1, static_cast<int>(train_fraction * n)));

  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  if (mode == SplitMode::SeededRandom) {
    Rng rng(seed);
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.below(i)]);
  }

  auto take = [&data](const std::vector<int>& rows) {
    Dataset out;
    out.columns = data.columns;
    out.values.resize(data.columns.size());
    out.mask.resize(data.columns.size());
    for (size_t c = 0; c < data.columns.size(); ++c) {
      for (int r : rows) {
        out.values[c].push_back(data.values[c][static_cast<size_t>(r)]);
        out.mask[c].push_back(data.mask[c][static_cast<size_t>(r)]);
      }
    }
    return out;
  };

  std::vector<int> train_rows(order.begin(), order.begin() + n_train);
  std::vector<int> test_rows(order.begin() + n_train, order.end());
  if (mode == SplitMode::SeededRandom) {
    // Keep chronological order within each part.
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());
  }
  return {take(train_rows), take(test_rows)};
}

}  // namespace windgrid
