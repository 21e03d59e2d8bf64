#include "agedist/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace agedist {

namespace {

void check_pairs(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("metrics: prediction/truth length mismatch");
  }
  if (a.empty()) {
    throw std::invalid_argument("metrics: empty input");
  }
}

}  // namespace

AgePrediction predict_age(const Vec& prob, const AgeClassSet& classes) {
  if (prob.size() != static_cast<std::size_t>(classes.num_classes())) {
    throw std::invalid_argument("predict_age: distribution length mismatch");
  }
  AgePrediction p;
  p.prob = prob;
  double e = 0.0;
  std::size_t best = 0;
  for (std::size_t j = 0; j < prob.size(); ++j) {
    e += prob[j] * static_cast<double>(classes.age_at(static_cast<int>(j)));
    if (prob[j] > prob[best]) best = j;
  }
  p.expected_age = e;
  p.argmax_age = classes.age_at(static_cast<int>(best));
  return p;
}

double mae(const std::vector<double>& predictions, const std::vector<double>& truths) {
  check_pairs(predictions, truths);
  double sum = 0.0;
  for (std::size_t n = 0; n < predictions.size(); ++n) {
    sum += std::abs(predictions[n] - truths[n]);
  }
  return sum / static_cast<double>(predictions.size());
}

double age_group_accuracy(const std::vector<double>& predictions,
                          const std::vector<double>& truths, double gap, GroupRule rule) {
  check_pairs(predictions, truths);
  if (!(gap > 0.0)) {
    throw std::invalid_argument("age_group_accuracy: gap must be > 0");
  }
  std::size_t correct = 0;
  for (std::size_t n = 0; n < predictions.size(); ++n) {
    bool hit = false;
    if (rule == GroupRule::CenteredRange) {
      hit = std::abs(predictions[n] - truths[n]) <= gap / 2.0;
    } else {
      hit = std::floor(predictions[n] / gap) == std::floor(truths[n] / gap);
    }
    if (hit) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

std::vector<std::uint64_t> error_histogram(const std::vector<double>& predictions,
                                           const std::vector<double>& truths,
                                           double bin_width) {
  check_pairs(predictions, truths);
  if (!(bin_width > 0.0)) {
    throw std::invalid_argument("error_histogram: bin_width must be > 0");
  }
  std::vector<std::uint64_t> bins;
  for (std::size_t n = 0; n < predictions.size(); ++n) {
    const double err = std::abs(predictions[n] - truths[n]);
    const auto bin = static_cast<std::size_t>(std::floor(err / bin_width));
    if (bin >= bins.size()) bins.resize(bin + 1, 0);
    ++bins[bin];
  }
  return bins;
}

}  // namespace agedist
