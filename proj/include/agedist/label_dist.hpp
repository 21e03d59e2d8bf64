#pragma once

#include <vector>

namespace agedist {

using Vec = std::vector<double>;

// Closed range of integer age classes [min_age, max_age].
struct AgeClassSet {
  int min_age = 1;
  int max_age = 101;

  int num_classes() const { return max_age - min_age + 1; }
  int age_at(int index) const { return min_age + index; }
  int index_of(int age) const { return age - min_age; }
  bool contains(int age) const { return age >= min_age && age <= max_age; }
};

// Truncated Gaussian label distribution centered on `age`, support age-2..age+2
// clipped to the class range, renormalized to sum 1.
Vec gaussian_label_distribution(int age, double theta, const AgeClassSet& classes);

// Numerically stable (max-shifted) softmax.
Vec softmax(const Vec& logits);

// D(p || q) = sum_i p_i * ln(p_i / q_i), with 0 * ln(0/q) = 0.
double kl_divergence(const Vec& p, const Vec& q);

// Cross-entropy form of the K-L training loss: -sum_j l_j * ln(softmax(f)_j).
double kl_loss(const Vec& label, const Vec& logits);

// Gradient of kl_loss w.r.t. the logits: softmax(f) - l. Components sum to 0.
Vec kl_loss_gradient(const Vec& label, const Vec& logits);

// -sum_i p_i ln p_i (0 ln 0 = 0).
double entropy(const Vec& p);

}  // namespace agedist
