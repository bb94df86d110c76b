#include "oracles.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>

namespace lae::testing {

std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double h) {
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

std::vector<double> gaussian_by_summation(int mu, double sigma, int num_classes) {
  std::vector<double> p(static_cast<std::size_t>(num_classes));
  double total = 0.0;
  for (int k = 0; k < num_classes; ++k) {
    const double d = k - mu;
    p[static_cast<std::size_t>(k)] = std::exp(-d * d / (2.0 * sigma * sigma)) / (sigma * std::sqrt(2.0 * std::numbers::pi));
    total += p[static_cast<std::size_t>(k)];
  }
  for (auto& v : p) {
    v /= total;
  }
  return p;
}

double entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) {
      h -= v * std::log(v);
    }
  }
  return h;
}

double nearest_neighbour_mae(const std::vector<std::vector<double>>& ref_x, const std::vector<int>& ref_y,
                             const std::vector<std::vector<double>>& query_x, const std::vector<int>& query_y) {
  double err = 0.0;
  for (std::size_t q = 0; q < query_x.size(); ++q) {
    double best = std::numeric_limits<double>::infinity();
    int best_y = 0;
    for (std::size_t r = 0; r < ref_x.size(); ++r) {
      double d = 0.0;
      for (std::size_t j = 0; j < ref_x[r].size(); ++j) {
        const double t = ref_x[r][j] - query_x[q][j];
        d += t * t;
      }
      if (d < best) {
        best = d;
        best_y = ref_y[r];
      }
    }
    err += std::abs(best_y - query_y[q]);
  }
  return err / static_cast<double>(query_x.size());
}

} // namespace lae::testing
