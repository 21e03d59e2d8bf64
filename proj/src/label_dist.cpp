#include "agedist/label_dist.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace agedist {

namespace {

constexpr int kSupportRadius = 2;

void check_same_length(const Vec& a, const Vec& b, const char* what) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) + ": length mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
}

}  // namespace

Vec gaussian_label_distribution(int age, double theta, const AgeClassSet& classes) {
  if (!classes.contains(age)) {
    throw std::out_of_range("gaussian_label_distribution: age " + std::to_string(age) +
                            " outside class range [" + std::to_string(classes.min_age) +
                            ", " + std::to_string(classes.max_age) + "]");
  }
  if (!(theta > 0.0)) {
    throw std::domain_error("gaussian_label_distribution: theta must be > 0");
  }
  Vec probs(static_cast<std::size_t>(classes.num_classes()), 0.0);
  const int lo = std::max(classes.min_age, age - kSupportRadius);
  const int hi = std::min(classes.max_age, age + kSupportRadius);
  double sum = 0.0;
  for (int a = lo; a <= hi; ++a) {
    const double d = static_cast<double>(a - age);
    const double w = std::exp(-(d * d) / (2.0 * theta));
    probs[static_cast<std::size_t>(classes.index_of(a))] = w;
    sum += w;
  }
  for (double& p : probs) p /= sum;
  return probs;
}

Vec softmax(const Vec& logits) {
  if (logits.empty()) {
    throw std::invalid_argument("softmax: empty logit vector");
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  Vec out(logits.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    out[j] = std::exp(logits[j] - m);
    sum += out[j];
  }
  for (double& q : out) q /= sum;
  return out;
}

double kl_divergence(const Vec& p, const Vec& q) {
  check_same_length(p, q, "kl_divergence");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) {
      throw std::domain_error("kl_divergence: q is zero where p > 0, divergence undefined");
    }
    d += p[i] * std::log(p[i] / q[i]);
  }
  return d;
}

double kl_loss(const Vec& label, const Vec& logits) {
  check_same_length(label, logits, "kl_loss");
  const Vec q = softmax(logits);
  double loss = 0.0;
  for (std::size_t j = 0; j < label.size(); ++j) {
    if (label[j] != 0.0) loss -= label[j] * std::log(q[j]);
  }
  return loss;
}

Vec kl_loss_gradient(const Vec& label, const Vec& logits) {
  check_same_length(label, logits, "kl_loss_gradient");
  Vec g = softmax(logits);
  for (std::size_t j = 0; j < label.size(); ++j) g[j] -= label[j];
  return g;
}

double entropy(const Vec& p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

}  // namespace agedist
