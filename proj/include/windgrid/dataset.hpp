#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace windgrid {

// Column-major table of doubles with a per-cell missing mask. Masked cells
// hold NaN until imputed.
struct Dataset {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> values;  // [column][row]
  std::vector<std::vector<bool>> mask;      // true = missing

  int row_count() const {
    return values.empty() ? 0 : static_cast<int>(values[0].size());
  }
  int column_count() const { return static_cast<int>(columns.size()); }
  int column_index(const std::string& name) const;  // -1 when absent
  int missing_count() const;
};

// Empty cells and the sentinels "NA"/"NaN" become mask entries; any other
// non-numeric token is a ParseError. A nonempty schema must match the header
// exactly (names and order).
Dataset load_timeseries_csv(const std::string& path,
                            const std::vector<std::string>& schema = {});

void write_dataset_csv(const Dataset& data, const std::string& path);

enum class SplitMode { Chronological, SeededRandom };

std::pair<Dataset, Dataset> split_dataset(const Dataset& data,
                                          double train_fraction,
                                          SplitMode mode,
                                          std::uint64_t seed = 0);

}  // namespace windgrid
