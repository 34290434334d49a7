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

#ifndef COPSURV_CSV_HPP
#define COPSURV_CSV_HPP

#include <cstdio>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace copsurv {

/// Locale-independent, fixed-precision rendering so that outputs are byte-stable.
inline std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::initializer_list<std::string_view> header) {
    bool first = true;
    for (auto h : header) {
      if (!first) text_ += ',';
      text_.append(h);
      first = false;
    }
    text_ += '\n';
  }

  CsvWriter& row(std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
      if (!first) text_ += ',';
      text_ += format_number(v);
      first = false;
    }
    text_ += '\n';
    return *this;
  }

  CsvWriter& row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += cells[i];
    }
    text_ += '\n';
    return *this;
  }

  const std::string& str() const { return text_; }

 private:
  std::string text_;
};

/// Writes `text` to `path`, throwing ConfigurationError when the file cannot be opened.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace copsurv

#endif  // COPSURV_CSV_HPP
