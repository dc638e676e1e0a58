#pragma once

#include <functional>
#include <vector>

namespace rsflow::detail {

using VectorField = std::function<void(const std::vector<double>&, std::vector<double>&)>;

// Solves y - half_dt * f(y) = c for y by Newton's method, starting from the
// value passed in y. The Jacobian of f is formed by colored finite
// differences, so f must only couple entries at most half_band apart.
// Returns false when the iteration does not converge.
bool trapezoid_newton(const VectorField& f, const std::vector<double>& c, double half_dt,
                      std::vector<double>& y, int half_band, double tol, int max_iter);

}  // namespace rsflow::detail
