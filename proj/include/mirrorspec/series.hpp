#pragma once

#include <functional>

#include "mirrorspec/errors.hpp"

namespace mirrorspec {

struct SeriesResult {
  double value = 0.0;
  int terms = 0;
  bool converged = false;
};

// Compensated (Kahan) summation of term(0), term(1), ... Terms must
// eventually decrease in magnitude. Stops once the term just added satisfies
// |term| <= rel_tol * |partial sum|.
SeriesResult kahan_series_sum(const std::function<double(int)>& term,
                              double rel_tol, int max_terms);

// As above but throws SeriesError when the term budget is exhausted.
double sum_series_or_throw(const std::function<double(int)>& term,
                           double rel_tol, int max_terms,
                           const std::string& context);

}  // namespace mirrorspec
