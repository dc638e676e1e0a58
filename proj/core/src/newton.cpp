#include "newton.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

namespace rsflow::detail {

bool trapezoid_newton(const VectorField& f, const std::vector<double>& c, double half_dt,
                      std::vector<double>& y, int half_band, double tol, int max_iter) {
  const auto size = static_cast<Eigen::Index>(y.size());
  const int colors = 2 * half_band + 1;
  std::vector<double> fy(y.size()), fp(y.size()), probe(y.size()), step_size(y.size());
  Eigen::VectorXd residual(size);
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(y.size() * colors);

  for (int iter = 0; iter < max_iter; ++iter) {
    f(y, fy);
    double scale = 1.0;
    for (Eigen::Index i = 0; i < size; ++i) {
      residual[i] = -(y[i] - half_dt * fy[i] - c[i]);
      scale = std::max(scale, std::abs(y[i]));
    }

    entries.clear();
    for (int color = 0; color < colors; ++color) {
      probe = y;
      for (std::size_t j = color; j < y.size(); j += colors) {
        step_size[j] = 1e-7 * std::max(1.0, std::abs(y[j]));
        probe[j] += step_size[j];
      }
      f(probe, fp);
      for (std::size_t j = color; j < y.size(); j += colors) {
        const std::size_t lo = j >= static_cast<std::size_t>(half_band) ? j - half_band : 0;
        const std::size_t hi = std::min(y.size() - 1, j + half_band);
        for (std::size_t i = lo; i <= hi; ++i) {
          const double d = (fp[i] - fy[i]) / step_size[j];
          const double value = (i == j ? 1.0 : 0.0) - half_dt * d;
          if (value != 0.0) {
            entries.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j), value);
          }
        }
      }
    }
    Eigen::SparseMatrix<double> jacobian(size, size);
    jacobian.setFromTriplets(entries.begin(), entries.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
    solver.compute(jacobian);
    if (solver.info() != Eigen::Success) return false;
    const Eigen::VectorXd delta = solver.solve(residual);
    if (solver.info() != Eigen::Success) return false;

    double change = 0.0;
    for (Eigen::Index i = 0; i < size; ++i) {
      y[i] += delta[i];
      change = std::max(change, std::abs(delta[i]));
    }
    if (!std::isfinite(change)) return false;
    if (change <= tol * scale) return true;
  }
  return false;
}

}  // namespace rsflow::detail
