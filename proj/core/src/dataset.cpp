#include "aloft/dataset.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <vector>

#include "aloft/errors.hpp"

namespace aloft {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = line.find(',', pos);
    if (next == std::string::npos) {
      out.push_back(trim(line.substr(pos)));
      return out;
    }
    out.push_back(trim(line.substr(pos, next - pos)));
    pos = next + 1;
  }
}

bool parse_cell(const std::string& cell, double& value) {
  if (cell.empty()) return false;
  std::size_t used = 0;
  try {
    value = std::stod(cell, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == cell.size() && std::isfinite(value);
}

}  // namespace

Dataset parse_dataset(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::size_t columns = 0;
  bool had_header = false;
  long line_no = 0;
  bool first_content_row = true;

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_cells(line);

    if (first_content_row) {
      first_content_row = false;
      columns = cells.size();
      if (columns < 2)
        throw DataError("dataset: need at least 2 columns (design + response), got " +
                        std::to_string(columns));
      bool all_numeric = true;
      std::vector<double> parsed(columns);
      for (std::size_t c = 0; c < columns; ++c)
        all_numeric = all_numeric && parse_cell(cells[c], parsed[c]);
      if (all_numeric) {
        rows.push_back(std::move(parsed));
      } else {
        had_header = true;
      }
      continue;
    }

    if (cells.size() != columns)
      throw DataError("dataset row " + std::to_string(line_no) + ": expected " +
                      std::to_string(columns) + " cells, got " +
                      std::to_string(cells.size()));
    std::vector<double> parsed(columns);
    for (std::size_t c = 0; c < columns; ++c) {
      if (!parse_cell(cells[c], parsed[c]))
        throw DataError("dataset row " + std::to_string(line_no) + ", column " +
                        std::to_string(c + 1) + ": cell '" + cells[c] +
                        "' is not a finite number");
    }
    rows.push_back(std::move(parsed));
  }

  const auto n = rows.size();
  if (n < 10)
    throw DataError("dataset: need at least 10 data rows, got " +
                    std::to_string(n));
  const auto p = columns - 1;

  Dataset data;
  data.had_header = had_header;
  data.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  data.Y.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < p; ++c)
      data.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          rows[i][c];
    data.Y(static_cast<Eigen::Index>(i)) = rows[i][p];
  }

  data.ranges.resize(p);
  for (std::size_t c = 0; c < p; ++c) {
    const auto col = data.X.col(static_cast<Eigen::Index>(c));
    const double lo = col.minCoeff();
    const double hi = col.maxCoeff();
    if (!(hi > lo))
      throw DataError("dataset: design coordinate " + std::to_string(c + 1) +
                      " is constant (zero range)");
    data.ranges[c] = {lo, hi};
    data.X.col(static_cast<Eigen::Index>(c)) =
        ((col.array() - lo) / (hi - lo)).matrix();
  }
  return data;
}

Dataset parse_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path + "'");
  return parse_dataset(in);
}

}  // namespace aloft
