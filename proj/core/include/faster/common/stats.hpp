#pragma once

#include <span>
#include <vector>

namespace faster::stats {

double mean(std::span<const double> xs);
/// Population standard deviation.
double stddev(std::span<const double> xs);
/// Quantile with linear interpolation between order statistics (the "type 7" rule).
double quantile(std::vector<double> xs, double q);
double median(std::vector<double> xs);
/// Spearman rank correlation; ties receive their average rank.
double spearman(std::span<const double> a, std::span<const double> b);
std::vector<double> ranks(std::span<const double> xs);

} // namespace faster::stats
