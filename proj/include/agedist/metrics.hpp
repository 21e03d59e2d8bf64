#pragma once

#include <cstdint>
#include <vector>

#include "agedist/label_dist.hpp"

namespace agedist {

struct AgePrediction {
  double expected_age = 0.0;  // expectation of the class distribution
  int argmax_age = 0;
  Vec prob;
};

AgePrediction predict_age(const Vec& prob, const AgeClassSet& classes);

double mae(const std::vector<double>& predictions, const std::vector<double>& truths);

enum class GroupRule {
  CenteredRange,  // correct when |pred - truth| <= gap / 2 (default)
  FixedBins       // correct when both fall in the same [k*gap, (k+1)*gap) bin
};

double age_group_accuracy(const std::vector<double>& predictions,
                          const std::vector<double>& truths, double gap,
                          GroupRule rule = GroupRule::CenteredRange);

// Counts of |pred - truth| into bins [0,w), [w,2w), ...
std::vector<std::uint64_t> error_histogram(const std::vector<double>& predictions,
                                           const std::vector<double>& truths,
                                           double bin_width);

}  // namespace agedist
