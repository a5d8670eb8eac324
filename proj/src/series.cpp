#include "mirrorspec/series.hpp"

#include <cmath>

namespace mirrorspec {

SeriesResult kahan_series_sum(const std::function<double(int)>& term,
                              double rel_tol, int max_terms) {
  if (!(rel_tol > 0.0)) throw Error("kahan_series_sum: rel_tol must be positive");
  if (max_terms < 1) throw Error("kahan_series_sum: max_terms must be >= 1");

  SeriesResult r;
  double sum = 0.0;
  double comp = 0.0;
  for (int j = 0; j < max_terms; ++j) {
    const double t = term(j);
    const double y = t - comp;
    const double u = sum + y;
    comp = (u - sum) - y;
    sum = u;
    r.terms = j + 1;
    if (std::abs(t) <= rel_tol * std::abs(sum)) {
      r.value = sum;
      r.converged = true;
      return r;
    }
  }
  r.value = sum;
  r.converged = false;
  return r;
}

double sum_series_or_throw(const std::function<double(int)>& term,
                           double rel_tol, int max_terms,
                           const std::string& context) {
  SeriesResult r = kahan_series_sum(term, rel_tol, max_terms);
  if (!r.converged) {
    throw SeriesError(context + ": series did not converge within " +
                      std::to_string(max_terms) + " terms");
  }
  return r.value;
}

}  // namespace mirrorspec
