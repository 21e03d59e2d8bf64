#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <random>

#include "agedist/filters.hpp"

using namespace agedist;

TEST_CASE("filter_push: ASU worked example from a cold start") {
  FilterState fs(FilterKind::Asu, 1e-5, 3);
  const SparseUpdate push = filter_push(fs, {2e-5, -5e-6, 1e-5});
  REQUIRE(push.indices.size() == 1);
  CHECK(push.indices[0] == 0);
  CHECK(push.values[0] == doctest::Approx(2e-5));
  CHECK(fs.residual[0] == 0.0);
  CHECK(fs.residual[1] == doctest::Approx(-5e-6));
  CHECK(fs.residual[2] == doctest::Approx(1e-5));  // |1e-5| <= delta is dropped

  // second push accumulates the residual before thresholding
  const SparseUpdate push2 = filter_push(fs, {1e-5, -6e-6, 0.0});
  REQUIRE(push2.indices.size() == 1);
  CHECK(push2.indices[0] == 1);
  CHECK(push2.values[0] == doctest::Approx(-1.1e-5));
  CHECK(fs.residual[0] == doctest::Approx(1e-5));
  CHECK(fs.residual[1] == 0.0);
  CHECK(fs.residual[2] == doctest::Approx(1e-5));
}

TEST_CASE("filter_push: delta = 0 makes all kinds push every nonzero entry") {
  const Vec update{0.5, 0.0, -0.25, 1e-30};
  SparseUpdate pushes[3];
  int k = 0;
  for (FilterKind kind : {FilterKind::Raw, FilterKind::Dsu, FilterKind::Asu}) {
    FilterState fs(kind, 0.0, update.size());
    pushes[k++] = filter_push(fs, update);
    for (double r : fs.residual) CHECK(r == 0.0);
  }
  for (k = 0; k < 3; ++k) {
    CHECK(pushes[k].indices == std::vector<std::uint32_t>{0, 2, 3});
    CHECK(pushes[k].values == pushes[0].values);
  }
}

TEST_CASE("filter_push: RAW ignores delta, DSU discards dropped mass") {
  FilterState raw(FilterKind::Raw, 1.0, 2);
  const SparseUpdate p = filter_push(raw, {0.5, 0.0});
  CHECK(p.indices == std::vector<std::uint32_t>{0});

  FilterState dsu(FilterKind::Dsu, 1.0, 2);
  const SparseUpdate q = filter_push(dsu, {0.5, 2.0});
  CHECK(q.indices == std::vector<std::uint32_t>{1});
  for (double r : dsu.residual) CHECK(r == 0.0);
}

TEST_CASE("filter_push: boundary |u| = delta is dropped") {
  FilterState fs(FilterKind::Dsu, 0.5, 2);
  const SparseUpdate p = filter_push(fs, {0.5, 0.5000001});
  CHECK(p.indices == std::vector<std::uint32_t>{1});
}

TEST_CASE("filter_push: length mismatch") {
  FilterState fs(FilterKind::Asu, 0.1, 3);
  CHECK_THROWS_AS(filter_push(fs, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("ASU conservation over random push sequences") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3e-5, 3e-5);
  const std::size_t dims = 40;
  FilterState fs(FilterKind::Asu, 1.5e-5, dims);
  Vec sum_generated(dims, 0.0), sum_pushed(dims, 0.0);
  for (int t = 0; t < 500; ++t) {
    Vec update(dims);
    for (double& x : update) x = u(rng);
    for (std::size_t j = 0; j < dims; ++j) sum_generated[j] += update[j];
    const Vec dense = densify(filter_push(fs, update));
    for (std::size_t j = 0; j < dims; ++j) sum_pushed[j] += dense[j];
  }
  for (std::size_t j = 0; j < dims; ++j) {
    CHECK(std::abs(sum_pushed[j] + fs.residual[j] - sum_generated[j]) <= 1e-12);
  }
}

TEST_CASE("threshold semantics: pushed values exceed delta, dropped do not") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (FilterKind kind : {FilterKind::Dsu, FilterKind::Asu}) {
    FilterState fs(kind, 0.3, 25);
    for (int t = 0; t < 20; ++t) {
      Vec update(25);
      for (double& x : update) x = u(rng);
      const Vec before = fs.residual;
      const SparseUpdate p = filter_push(fs, update);
      for (double v : p.values) CHECK(std::abs(v) > 0.3);
      for (std::size_t j = 0; j < 25; ++j) {
        const double effective =
            kind == FilterKind::Asu ? update[j] + before[j] : update[j];
        const bool pushed =
            std::find(p.indices.begin(), p.indices.end(), j) != p.indices.end();
        if (!pushed) CHECK(std::abs(effective) <= 0.3);
      }
    }
  }
}

TEST_CASE("drop_fraction") {
  SparseUpdate p;
  p.total_dims = 1000;
  p.indices.resize(12);
  p.values.resize(12);
  CHECK(drop_fraction(p) == doctest::Approx(0.988));

  p.indices.resize(1000);
  p.values.resize(1000);
  CHECK(drop_fraction(p) == 0.0);

  p.indices.clear();
  p.values.clear();
  CHECK(drop_fraction(p) == 1.0);

  SparseUpdate empty;
  CHECK_THROWS_AS(drop_fraction(empty), std::domain_error);
}

TEST_CASE("drop_fraction is non-decreasing in delta") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec update(200);
  for (double& x : update) x = u(rng);
  double prev = -1.0;
  for (double delta : {0.0, 0.1, 0.3, 0.5, 0.9, 2.0}) {
    FilterState fs(FilterKind::Dsu, delta, update.size());
    const double frac = drop_fraction(filter_push(fs, update));
    CHECK(frac >= prev);
    prev = frac;
  }
}

TEST_CASE("densify") {
  SparseUpdate empty;
  empty.total_dims = 4;
  CHECK(densify(empty) == Vec(4, 0.0));

  SparseUpdate one;
  one.total_dims = 3;
  one.indices = {0};
  one.values = {2e-5};
  CHECK(densify(one) == Vec{2e-5, 0.0, 0.0});

  SparseUpdate bad;
  bad.total_dims = 2;
  bad.indices = {5};
  bad.values = {1.0};
  CHECK_THROWS_AS(densify(bad), std::out_of_range);
}

TEST_CASE("sparsify then densify at delta = 0 is the identity") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Vec update(64);
  for (double& x : update) x = u(rng);
  FilterState fs(FilterKind::Raw, 0.0, update.size());
  CHECK(densify(filter_push(fs, update)) == update);
}

TEST_CASE("wire encoding round trip") {
  SparseUpdate s;
  s.worker_id = 3;
  s.iteration = 12345678901ULL;
  s.total_dims = 1000;
  s.indices = {1, 7, 999};
  s.values = {0.25, -1.5, 3.0};  // exactly representable in f32

  const auto bytes = encode_sparse_update(s);
  CHECK(bytes.size() == kSparseHeaderBytes + 3 * kSparseEntryBytes);

  const SparseUpdate d = decode_sparse_update(bytes);
  CHECK(d.worker_id == s.worker_id);
  CHECK(d.iteration == s.iteration);
  CHECK(d.total_dims == s.total_dims);
  CHECK(d.indices == s.indices);
  CHECK(d.values == s.values);
}

TEST_CASE("wire decoding rejects corruption") {
  SparseUpdate s;
  s.total_dims = 10;
  s.indices = {2};
  s.values = {1.0};
  auto bytes = encode_sparse_update(s);
  bytes.pop_back();
  CHECK_THROWS_AS(decode_sparse_update(bytes), std::runtime_error);

  SparseUpdate out_of_range;
  out_of_range.total_dims = 1;
  out_of_range.indices = {9};
  out_of_range.values = {1.0};
  CHECK_THROWS_AS(decode_sparse_update(encode_sparse_update(out_of_range)),
                  std::runtime_error);
}
