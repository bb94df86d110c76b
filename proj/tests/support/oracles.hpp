#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace lae::testing {

/// Central difference (f(x+h) - f(x-h)) / 2h along every coordinate of x.
std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double h = 1e-6);

/// exp(-(k - mu)^2 / (2 sigma^2)) / (sigma sqrt(2 pi)) at every k in 0..K-1,
/// summed term by term and divided by the total.
std::vector<double> gaussian_by_summation(int mu, double sigma, int num_classes);

/// -sum p ln p over the positive entries.
double entropy(const std::vector<double>& p);

/// Mean |y - 1-NN(x)| of each query row against a reference set, by brute force.
double nearest_neighbour_mae(const std::vector<std::vector<double>>& ref_x, const std::vector<int>& ref_y,
                             const std::vector<std::vector<double>>& query_x, const std::vector<int>& query_y);

} // namespace lae::testing
