#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "agedist/label_dist.hpp"

using namespace agedist;

namespace {

Vec random_distribution(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  Vec p(n);
  double sum = 0.0;
  for (double& x : p) {
    x = u(rng);
    sum += x;
  }
  for (double& x : p) x /= sum;
  return p;
}

// Central finite differences of kl_loss w.r.t. the logits.
Vec fd_loss_gradient(const Vec& label, const Vec& logits, double h) {
  Vec g(logits.size());
  for (std::size_t j = 0; j < logits.size(); ++j) {
    Vec lo = logits, hi = logits;
    lo[j] -= h;
    hi[j] += h;
    g[j] = (kl_loss(label, hi) - kl_loss(label, lo)) / (2.0 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("gaussian label distribution: interior age") {
  const AgeClassSet classes{1, 101};
  const Vec p = gaussian_label_distribution(30, 1.0, classes);
  REQUIRE(p.size() == 101);
  // frozen from exp(-d^2/2), d = -2..2, normalized by 2.4837318859
  const double expected[5] = {0.0544886845, 0.2442013420, 0.4026199469, 0.2442013420,
                              0.0544886845};
  for (int k = 0; k < 5; ++k) {
    CHECK(p[static_cast<std::size_t>(classes.index_of(28 + k))] ==
          doctest::Approx(expected[k]).epsilon(1e-8));
  }
  double off_support = 0.0;
  for (int a = classes.min_age; a <= classes.max_age; ++a) {
    if (a < 28 || a > 32) off_support += p[static_cast<std::size_t>(classes.index_of(a))];
  }
  CHECK(off_support == 0.0);
}

TEST_CASE("gaussian label distribution: boundary truncation") {
  const AgeClassSet classes{1, 101};
  const Vec p = gaussian_label_distribution(1, 1.0, classes);
  CHECK(p[0] == doctest::Approx(0.5740969930).epsilon(1e-8));
  CHECK(p[1] == doctest::Approx(0.3482074279).epsilon(1e-8));
  CHECK(p[2] == doctest::Approx(0.0776955791).epsilon(1e-8));
  CHECK(p[3] == 0.0);
}

TEST_CASE("gaussian label distribution: huge theta flattens to uniform support") {
  const Vec p = gaussian_label_distribution(50, 1e12, AgeClassSet{1, 101});
  for (int a = 48; a <= 52; ++a) {
    CHECK(p[static_cast<std::size_t>(a - 1)] == doctest::Approx(0.2).epsilon(1e-9));
  }
}

TEST_CASE("gaussian label distribution: errors") {
  CHECK_THROWS_AS(gaussian_label_distribution(0, 1.0, AgeClassSet{1, 101}), std::out_of_range);
  CHECK_THROWS_AS(gaussian_label_distribution(102, 1.0, AgeClassSet{1, 101}), std::out_of_range);
  CHECK_THROWS_AS(gaussian_label_distribution(30, 0.0, AgeClassSet{1, 101}), std::domain_error);
  CHECK_THROWS_AS(gaussian_label_distribution(30, -1.0, AgeClassSet{1, 101}), std::domain_error);
}

TEST_CASE("gaussian label distribution: sums to 1 for all ages and thetas") {
  const AgeClassSet classes{1, 101};
  for (double theta : {0.25, 1.0, 3.0, 100.0}) {
    for (int age = classes.min_age; age <= classes.max_age; ++age) {
      const Vec p = gaussian_label_distribution(age, theta, classes);
      double sum = 0.0;
      int nonzero = 0;
      for (double x : p) {
        CHECK(x >= 0.0);
        sum += x;
        if (x > 0.0) ++nonzero;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(nonzero <= 5);
    }
  }
}

TEST_CASE("softmax: examples") {
  const Vec half = softmax({0.0, 0.0});
  CHECK(half[0] == doctest::Approx(0.5));
  CHECK(half[1] == doctest::Approx(0.5));

  const Vec q = softmax({std::log(1.0), std::log(3.0)});
  CHECK(q[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(q[1] == doctest::Approx(0.75).epsilon(1e-12));

  const Vec uniform = softmax(Vec(7, 3.25));
  for (double x : uniform) CHECK(x == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("softmax: sums to 1 and is shift invariant") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int trial = 0; trial < 50; ++trial) {
    Vec logits(11);
    for (double& x : logits) x = u(rng);
    const Vec a = softmax(logits);
    double sum = 0.0;
    for (double x : a) sum += x;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

    const double shift = u(rng);
    Vec shifted = logits;
    for (double& x : shifted) x += shift;
    const Vec b = softmax(shifted);
    for (std::size_t j = 0; j < a.size(); ++j) {
      CHECK(std::abs(a[j] - b[j]) <= 1e-12);
    }
  }
}

TEST_CASE("kl_divergence: examples and errors") {
  const Vec p{0.3, 0.5, 0.2};
  CHECK(kl_divergence(p, p) == doctest::Approx(0.0));
  CHECK(kl_divergence({1.0, 0.0}, {0.5, 0.5}) ==
        doctest::Approx(0.6931471805599453).epsilon(1e-12));
  CHECK(kl_divergence({0.5, 0.5}, {0.25, 0.75}) ==
        doctest::Approx(0.14384103622589042).epsilon(1e-12));
  CHECK_THROWS_AS(kl_divergence({0.5, 0.5}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(kl_divergence({0.5, 0.5}, {1.0, 0.0}), std::domain_error);
  // 0 * ln(0/q) = 0, so a zero in q is fine where p is zero
  CHECK(kl_divergence({0.0, 1.0}, {0.0, 1.0}) == doctest::Approx(0.0));
}

TEST_CASE("kl_divergence: nonnegative, zero iff equal") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec p = random_distribution(rng, 9);
    const Vec q = random_distribution(rng, 9);
    const double d = kl_divergence(p, q);
    CHECK(d >= -1e-15);
    CHECK(kl_divergence(p, p) == doctest::Approx(0.0));
    bool equal = true;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (std::abs(p[i] - q[i]) > 1e-12) equal = false;
    }
    if (!equal) CHECK(d > 0.0);
  }
}

TEST_CASE("kl_loss: examples") {
  // one-hot label, uniform logits -> ln c
  const int c = 13;
  Vec onehot(c, 0.0);
  onehot[4] = 1.0;
  CHECK(kl_loss(onehot, Vec(c, 0.0)) == doctest::Approx(std::log(double(c))).epsilon(1e-12));

  CHECK(kl_loss({0.5, 0.5}, {0.0, 0.0}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // label = softmax(logits) -> loss equals the label's entropy
  const Vec logits{0.3, -1.2, 0.7, 0.0};
  const Vec label = softmax(logits);
  CHECK(kl_loss(label, logits) == doctest::Approx(entropy(label)).epsilon(1e-12));
}

TEST_CASE("kl_loss = kl_divergence + entropy") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec label = random_distribution(rng, 15);
    Vec logits(15);
    for (double& x : logits) x = u(rng);
    const double lhs = kl_loss(label, logits) - kl_divergence(label, softmax(logits));
    CHECK(lhs == doctest::Approx(entropy(label)).epsilon(1e-9));
  }
}

TEST_CASE("kl_loss_gradient: examples") {
  const Vec logits{0.4, -0.3, 1.1};
  const Vec stationary = kl_loss_gradient(softmax(logits), logits);
  for (double g : stationary) CHECK(std::abs(g) <= 1e-15);

  const Vec g = kl_loss_gradient({1.0, 0.0}, {0.0, 0.0});
  CHECK(g[0] == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(g[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("kl_loss_gradient: matches finite differences, sums to zero") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec label = random_distribution(rng, 20);
    Vec logits(20);
    for (double& x : logits) x = u(rng);

    const Vec g = kl_loss_gradient(label, logits);
    double sum = 0.0;
    for (double x : g) sum += x;
    CHECK(std::abs(sum) <= 1e-12);

    const Vec fd = fd_loss_gradient(label, logits, 1e-5);
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double scale = std::max(1.0, std::abs(fd[j]));
      CHECK(std::abs(g[j] - fd[j]) / scale <= 1e-5);
    }
  }
}
