#include "tables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "supermarket/distributions.hpp"
#include "supermarket/error.hpp"
#include "supermarket/fixed_point.hpp"

namespace supermarket::cli {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double rel(double computed, double published) {
  return std::abs(computed - published) / std::abs(published);
}

// Tolerance used to call a published value "matched": it is printed with
// two or three significant digits.
constexpr double kMatchTolerance = 0.05;

Table erlang_table() {
  struct Entry {
    int m, d;
    double value;
  };
  const Entry entries[] = {{2, 2, 0.52},     {2, 5, 0.19},     {2, 10, 9.15e-2},
                           {5, 2, 4.13e-2},  {10, 2, 9.48e-4}, {5, 5, 1.11e-3},
                           {10, 10, 6.51e-10}};
  Table t;
  t.which = 1;
  t.columns = {"m", "d", "published", "computed", "rel_error", "generic",
               "transposed_computed", "transposed_rel_error", "matched"};
  for (const auto& e : entries) {
    const auto at = [](int m, int d) {
      return theta(ServiceDistribution::erlang(m, 1.0), d, ThetaMode::kPaperTable);
    };
    TableRow row;
    row.label = "(" + std::to_string(e.m) + "," + std::to_string(e.d) + ")";
    row.published = e.value;
    row.computed = at(e.m, e.d);
    row.rel_error = rel(row.computed, e.value);
    row.generic = theta(ServiceDistribution::erlang(e.m, 1.0), e.d, ThetaMode::kGeneric);
    row.transposed_computed = at(e.d, e.m);
    row.transposed_rel_error = rel(row.transposed_computed, e.value);
    if (row.rel_error <= kMatchTolerance) {
      row.matched = "label";
    } else if (row.transposed_rel_error <= kMatchTolerance) {
      row.matched = "transposed";
    } else {
      row.matched = "none";
    }
    t.max_rel_error =
        std::max(t.max_rel_error, std::min(row.rel_error, row.transposed_rel_error));
    t.rows.push_back({std::to_string(e.m), std::to_string(e.d), num(e.value),
                      num(row.computed), num(row.rel_error), num(row.generic),
                      num(row.transposed_computed), num(row.transposed_rel_error),
                      row.matched});
    t.entries.push_back(row);
  }
  return t;
}

Table weibull_table() {
  const double taus[] = {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  const double values[] = {1.3e-3, 5.3e-2, 0.27, 0.63, 1.05, 1.47, 1.86, 2.19};
  Table t;
  t.which = 2;
  t.columns = {"tau", "published", "computed", "rel_error", "generic", "generic_rel_diff"};
  for (int i = 0; i < 8; ++i) {
    const auto dist = ServiceDistribution::weibull(taus[i], 5.0);
    TableRow row;
    row.label = num(taus[i]);
    row.published = values[i];
    row.computed = theta(dist, 2, ThetaMode::kClosedForm);
    row.rel_error = rel(row.computed, values[i]);
    row.generic = theta(dist, 2, ThetaMode::kGeneric);
    row.matched = row.rel_error <= kMatchTolerance ? "label" : "none";
    t.max_rel_error = std::max(t.max_rel_error, row.rel_error);
    t.rows.push_back({num(taus[i]), num(values[i]), num(row.computed), num(row.rel_error),
                      num(row.generic), num(rel(row.generic, row.computed))});
    t.entries.push_back(row);
  }
  return t;
}

Table almost_exponential_table() {
  struct Entry {
    int d;
    double alpha, value;
  };
  const Entry entries[] = {{2, 2.0, 2.24e-2}, {4, 2.0, 2.01e-4}, {2, 4.0, 3.44e-5},
                           {4, 4.0, 1.18e-13}};
  Table t;
  t.which = 3;
  t.columns = {"d", "alpha", "published", "computed", "rel_error"};
  for (const auto& e : entries) {
    TableRow row;
    row.label = "(" + std::to_string(e.d) + "," + num(e.alpha) + ")";
    row.published = e.value;
    row.computed = theta(ServiceDistribution::almost_exponential(e.alpha), e.d);
    row.generic = row.computed;
    row.rel_error = rel(row.computed, e.value);
    row.matched = row.rel_error <= kMatchTolerance ? "label" : "none";
    t.max_rel_error = std::max(t.max_rel_error, row.rel_error);
    t.rows.push_back({std::to_string(e.d), num(e.alpha), num(e.value), num(row.computed),
                      num(row.rel_error)});
    t.entries.push_back(row);
  }
  return t;
}

}  // namespace

Table reproduce_table(int which) {
  Table t;
  switch (which) {
    case 1: t = erlang_table(); break;
    case 2: t = weibull_table(); break;
    case 3: t = almost_exponential_table(); break;
    default:
      throw Error(ErrorCode::kInvalidArgument, "--which must be 1, 2 or 3");
  }
  t.columns.push_back("max_rel_error");
  for (auto& row : t.rows) row.push_back(num(t.max_rel_error));
  return t;
}

}  // namespace supermarket::cli
