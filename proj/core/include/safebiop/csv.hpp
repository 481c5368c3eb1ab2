// Copyright 2026 The safebiop Authors
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

#ifndef SAFEBIOP_CSV_HPP
#define SAFEBIOP_CSV_HPP

#include <string>
#include <vector>

namespace safebiop::csv {

/// 17 significant digits; "inf", "-inf" and "nan" for non-finite values.
std::string format_double(double x);

/**
 * @brief In-memory CSV table: comma separated, header row, LF line endings.
 */
class Table {
 public:
  explicit Table(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;
  /// Writes str() to `path` in binary mode.
  void save(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Splits a file into rows of cells. Throws std::runtime_error if the file cannot be read.
std::vector<std::vector<std::string>> read_file(const std::string& path);

}  // namespace safebiop::csv

#endif  // SAFEBIOP_CSV_HPP
