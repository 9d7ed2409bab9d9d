#ifndef ALOFT_DATASET_HPP
#define ALOFT_DATASET_HPP

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace aloft {

// Parsed user data: p design columns then one response column. The design is
// affinely rescaled per coordinate to [0,1]; `ranges` records the original
// (min, max) of each coordinate so results stay interpretable.
struct Dataset {
  Eigen::MatrixXd X;  // n x p, each coordinate mapped onto [0,1]
  Eigen::VectorXd Y;  // untouched
  std::vector<std::pair<double, double>> ranges;
  bool had_header = false;

  int n() const { return static_cast<int>(X.rows()); }
  int p() const { return static_cast<int>(X.cols()); }
};

// CSV with comma delimiter and '.' decimals; a header row is detected when the
// first row has any cell that does not parse as a number. At least 10 data
// rows and 2 columns are required; a constant design coordinate is an error.
Dataset parse_dataset(std::istream& in);
Dataset parse_dataset_file(const std::string& path);

}  // namespace aloft

#endif
