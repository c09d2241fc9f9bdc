// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "smartpaste/nn/checkpoint.hpp"
#include "smartpaste/oracle/oracle.hpp"
#include "smartpaste/train/train.hpp"
#include "support.hpp"

using namespace smartpaste;
using namespace smartpaste::train;
using models::ContextEncoder;
using models::Variant;

namespace {

const char* kPair = R"(type A;
type B implements A;
extern fn useA(A) -> int;
int f(B b, A a, int n) {
  int x = useA(b) + n;
  x = x + useA(a);
  return x;
}
)";

std::vector<taskgen::TaskInstance> tiny_set() {
  return {testsupport::sum_positive_instance(), testsupport::widest_instance(kPair)};
}

models::ModelConfig cfg_of(Variant v, ContextEncoder e, int h) {
  models::ModelConfig c;
  c.variant = v;
  c.encoder = e;
  c.hidden = c.embed = h;
  c.min_lexeme_count = 1;
  return c;
}

}  // namespace

TEST_CASE("make_batches covers every item once and is seed-deterministic") {
  const auto set = tiny_set();
  std::mt19937_64 r1(3), r2(3);
  const auto a = make_batches(set, 4, r1), b = make_batches(set, 4, r2);
  CHECK(a == b);
  std::size_t n = 0;
  std::vector<Item> all;
  for (const auto& batch : a) {
    CHECK(batch.size() <= 4);
    all.insert(all.end(), batch.begin(), batch.end());
  }
  n = all.size();
  CHECK(n == items_of(set).size());
  std::sort(all.begin(), all.end(), [](Item x, Item y) { return std::tie(x.instance, x.placeholder) < std::tie(y.instance, y.placeholder); });
  CHECK(all == items_of(set));
}

TEST_CASE("pooled softmax widths") {
  const auto set = tiny_set();
  const auto vocab = models::Vocab::build(set, 1);
  models::Model m(cfg_of(Variant::AvgG, ContextEncoder::LogBilinear, 4), vocab, 1);
  const models::Dataset data(set, vocab, true);
  std::mt19937_64 rng(1);
  SUBCASE("batch of one uses only the item's own candidates") {
    nn::Tape tape;
    const auto g = batch_loss(m, data, {{0, 0}}, tape, rng);
    CHECK(g.pool_sizes == std::vector<std::size_t>{set[0].placeholders[0].candidates.size()});
  }
  SUBCASE("two items add each other's truth") {
    auto three = set;
    three.push_back(testsupport::widest_instance("int g(int p, int q, int w) { return p; }"));
    const models::Dataset d3(three, vocab, true);
    nn::Tape tape;
    const auto g = batch_loss(m, d3, {{2, 0}, {0, 0}}, tape, rng);
    CHECK(three[2].placeholders[0].candidates.size() == 3);
    CHECK(three[0].placeholders[0].candidates.size() == 4);
    CHECK(g.pool_sizes == std::vector<std::size_t>{3 + 1, 4 + 1});
  }
}

TEST_CASE("uniform scores give loss ln K") {
  const auto set = tiny_set();
  const auto vocab = models::Vocab::build(set, 1);
  models::Model m(cfg_of(Variant::Loc, ContextEncoder::LogBilinear, 4), vocab, 1);
  std::fill(m.ctx_w->data.begin(), m.ctx_w->data.end(), 0.0);
  const models::Dataset data(set, vocab, true);
  std::mt19937_64 rng(1);
  nn::Tape tape;
  const auto g = batch_loss(m, data, {{0, 0}, {0, 3}}, tape, rng);
  CHECK(tape.scalar(g.loss) == doctest::Approx(std::log(5.0)).epsilon(1e-12));
}

TEST_CASE("end-to-end loss gradients match finite differences") {
  const auto set = tiny_set();
  const auto vocab = models::Vocab::build(set, 1);
  const models::Dataset data(set, vocab, true);
  const Batch batch{{0, 1}, {0, 4}, {1, 0}, {1, 2}};
  for (auto v : {Variant::Loc, Variant::AvgG, Variant::GruG, Variant::GruD, Variant::Hybrid})
    for (auto e : {ContextEncoder::LogBilinear, ContextEncoder::Gru})
      for (std::uint64_t seed = 1; seed <= 1; ++seed) {
        CAPTURE(models::to_string(v));
        CAPTURE(models::to_string(e));
        CAPTURE(seed);
        models::Model m(cfg_of(v, e, 8), vocab, seed);
        auto forward = [&] {
          std::mt19937_64 rng(seed);
          nn::Tape tape;
          return tape.scalar(batch_loss(m, data, batch, tape, rng).loss);
        };
        auto both = [&] {
          std::mt19937_64 rng(seed);
          nn::Tape tape;
          tape.backward(batch_loss(m, data, batch, tape, rng).loss);
        };
        const auto r = oracle::check_gradients(m.params(), forward, both);
        CAPTURE(r.worst);
        CHECK(r.max_rel_err < 1e-4);
      }
}

TEST_CASE("a small step lowers the loss on a fixed batch") {
  const auto set = tiny_set();
  const auto vocab = models::Vocab::build(set, 1);
  const models::Dataset data(set, vocab, true);
  const Batch batch{{0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 1}};
  int lowered = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    models::Model m(cfg_of(Variant::Hybrid, ContextEncoder::LogBilinear, 8), vocab, seed);
    auto loss = [&] {
      std::mt19937_64 rng(seed);
      nn::Tape tape;
      return tape.scalar(batch_loss(m, data, batch, tape, rng).loss);
    };
    const double before = loss();
    auto opt = nn::adam_init(m.params());
    std::mt19937_64 rng(seed);
    train_step(m, opt, nn::AdamConfig{}, data, batch, rng);
    lowered += loss() < before;
  }
  CHECK(lowered >= 9);
}

TEST_CASE("training is deterministic and checkpoints round-trip") {
  const auto set = tiny_set();
  TrainConfig tc;
  tc.model = cfg_of(Variant::Hybrid, ContextEncoder::LogBilinear, 8);
  tc.epochs = 2;
  tc.batch_size = 3;
  tc.patience = 5;
  std::string dumps[2];
  for (auto& d : dumps) {
    auto m = init_model(tc, set);
    const models::Dataset data(set, m->vocab(), true);
    const auto r = fit(tc, *m, data, data);
    CHECK(r.epochs.size() == 2);
    d = checkpoint_json(*m, tc, r.best_epoch).dump();
  }
  CHECK(dumps[0] == dumps[1]);

  const auto path = (std::filesystem::temp_directory_path() / "smartpaste_ckpt_test.json").string();
  auto m = init_model(tc, set);
  save_checkpoint(path, *m, tc, 7);
  const auto back = load_checkpoint(path);
  CHECK(back.epoch == 7);
  CHECK(back.config.batch_size == 3);
  CHECK(back.model->config().variant == Variant::Hybrid);
  CHECK(checkpoint_json(*back.model, back.config, 7).dump() == checkpoint_json(*m, tc, 7).dump());
  std::filesystem::remove(path);
  CHECK_THROWS(load_checkpoint(path));
}

TEST_CASE("patience 0 with one epoch runs exactly one epoch") {
  const auto set = tiny_set();
  TrainConfig tc;
  tc.model = cfg_of(Variant::Loc, ContextEncoder::LogBilinear, 4);
  tc.epochs = 1;
  tc.patience = 0;
  auto m = init_model(tc, set);
  const models::Dataset data(set, m->vocab(), true);
  std::ostringstream log;
  const auto r = fit(tc, *m, data, data, &log);
  CHECK(r.epochs.size() == 1);
  CHECK(r.best_epoch == 1);
  // epoch, loss, accuracy, seconds
  const auto line = log.str();
  CHECK(std::count(line.begin(), line.end(), '\t') == 3);
  const auto resumed = fit(tc, *m, data, data, nullptr, 5);
  CHECK(resumed.epochs.front().epoch == 5);
}

TEST_CASE("fit rejects empty data") {
  TrainConfig tc;
  CHECK_THROWS_AS(init_model(tc, {}), InsufficientData);
}
