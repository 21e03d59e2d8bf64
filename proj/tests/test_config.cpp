#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <string>

#include "agedist/config.hpp"

using namespace agedist;

TEST_CASE("key-value parsing") {
  const auto kv = KeyValueFile::parse_string(
      "# a comment\n"
      "lr = 0.5\n"
      "hidden_dims = 16, 32\n"
      "filter = asu   # trailing comment\n"
      "\n",
      "test.cfg");
  CHECK(kv.get_double("lr", 0.0) == 0.5);
  CHECK(kv.get_int_list("hidden_dims", {}) == std::vector<int>{16, 32});
  CHECK(kv.get_string("filter", "") == "asu");
  CHECK(kv.get_string("missing", "fallback") == "fallback");
}

TEST_CASE("parse errors carry line numbers") {
  try {
    KeyValueFile::parse_string("lr = 0.1\nnot a pair\n", "bad.cfg");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bad.cfg:2") != std::string::npos);
  }

  try {
    const auto kv = KeyValueFile::parse_string("lr = banana\n", "bad.cfg");
    kv.get_double("lr", 0.0);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bad.cfg:1") != std::string::npos);
  }

  CHECK_THROWS_AS(KeyValueFile::parse_string("a = 1\na = 2\n", "dup.cfg"), ConfigError);
}

TEST_CASE("train config from key-value file") {
  const auto kv = KeyValueFile::parse_string(
      "input_dim = 12\n"
      "hidden_dims = 24\n"
      "c = 30\n"
      "n_workers = 2\n"
      "filter = dsu\n"
      "delta = 1e-5\n"
      "lr = 0.2\n"
      "batch_size = 16\n"
      "max_iterations = 50\n"
      "eval_every = 10\n"
      "seed = 9\n",
      "train.cfg");
  const TrainConfig cfg = train_config_from(kv);
  CHECK(cfg.spec.input_dim == 12);
  CHECK(cfg.spec.hidden_dims == std::vector<int>{24});
  CHECK(cfg.spec.num_classes == 30);
  CHECK(cfg.n_workers == 2);
  CHECK(cfg.filter == FilterKind::Dsu);
  CHECK(cfg.delta == 1e-5);
  CHECK(cfg.lr == 0.2);
  CHECK(cfg.batch_size == 16);
  CHECK(cfg.max_iterations == 50);
  CHECK(cfg.eval_every == 10);
  CHECK(cfg.seed == 9);

  CHECK_THROWS_AS(train_config_from(KeyValueFile::parse_string("n_workers = 0\n", "x")),
                  ConfigError);
  CHECK_THROWS_AS(train_config_from(KeyValueFile::parse_string("filter = nope\n", "x")),
                  std::invalid_argument);
}

TEST_CASE("config header embeds every field") {
  const TrainConfig cfg = train_config_from(KeyValueFile::parse_string("", "<empty>"));
  const auto header = config_header(cfg);
  for (const char* key : {"input_dim", "hidden_dims", "c", "n_workers", "filter", "delta",
                          "lr", "batch_size", "max_iterations", "eval_every", "seed"}) {
    const bool found = std::any_of(header.begin(), header.end(),
                                   [&](const auto& kvp) { return kvp.first == key; });
    CHECK_MESSAGE(found, key);
  }
}
