#pragma once

#include <string>
#include <vector>

namespace supermarket::cli {

// One row of a reproduced theta table. For the Erlang table the published
// value is also compared with the value at the transposed (d, m) label.
struct TableRow {
  std::string label;
  double published = 0.0;
  double computed = 0.0;
  double rel_error = 0.0;
  double generic = 0.0;  // generic-mode theta at the same parameters
  double transposed_computed = 0.0;
  double transposed_rel_error = 0.0;
  std::string matched;  // "label", "transposed" or "none"
};

struct Table {
  int which = 0;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<TableRow> entries;
  double max_rel_error = 0.0;
};

Table reproduce_table(int which);

}  // namespace supermarket::cli
