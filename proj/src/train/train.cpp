// SPDX-License-Identifier: Apache-2.0
#include "smartpaste/train/train.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>

#include "smartpaste/eval/metrics.hpp"
#include "smartpaste/nn/checkpoint.hpp"

namespace smartpaste::train {

using json = nlohmann::json;
using models::Encoder;
using nn::Var;

void TrainConfig::validate() const {
  model.validate();
  if (batch_size < 1) throw std::invalid_argument("batch size must be positive");
  if (epochs < 0) throw std::invalid_argument("epochs must be non-negative");
  if (!(lr > 0)) throw std::invalid_argument("learning rate must be positive");
  if (patience < 0) throw std::invalid_argument("patience must be non-negative");
  if (threads < 1) throw std::invalid_argument("threads must be positive");
}

json to_json(const TrainConfig& c) {
  return {{"model", models::to_json(c.model)}, {"batch_size", c.batch_size}, {"epochs", c.epochs},
          {"lr", c.lr},                        {"seed", c.seed},             {"patience", c.patience},
          {"checkpoint", c.checkpoint}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.model = models::model_config_from_json(j.at("model"));
  c.batch_size = j.value("batch_size", c.batch_size);
  c.epochs = j.value("epochs", c.epochs);
  c.lr = j.value("lr", c.lr);
  c.seed = j.value("seed", c.seed);
  c.patience = j.value("patience", c.patience);
  c.checkpoint = j.value("checkpoint", c.checkpoint);
  return c;
}

std::vector<Item> items_of(const std::vector<taskgen::TaskInstance>& instances) {
  std::vector<Item> out;
  for (std::size_t i = 0; i < instances.size(); ++i)
    for (std::size_t k = 0; k < instances[i].placeholders.size(); ++k) out.push_back({i, k});
  return out;
}

std::vector<Batch> make_batches(const std::vector<taskgen::TaskInstance>& instances, int batch_size,
                                std::mt19937_64& rng) {
  if (batch_size < 1) throw std::invalid_argument("batch size must be positive");
  auto items = items_of(instances);
  // Fisher-Yates with our own draw so the order is the same on every standard library
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = std::min(i - 1, static_cast<std::size_t>(nn::uniform01(rng) * static_cast<double>(i)));
    std::swap(items[i - 1], items[j]);
  }
  std::vector<Batch> out;
  for (std::size_t i = 0; i < items.size(); i += static_cast<std::size_t>(batch_size))
    out.emplace_back(items.begin() + static_cast<std::ptrdiff_t>(i),
                     items.begin() + static_cast<std::ptrdiff_t>(std::min(items.size(), i + static_cast<std::size_t>(batch_size))));
  return out;
}

BatchGraph batch_loss(models::Model& model, const models::Dataset& data, const Batch& batch, nn::Tape& tape,
                      std::mt19937_64& rng) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  std::map<std::size_t, std::unique_ptr<Encoder>> encoders;
  std::map<std::size_t, models::Binding> bindings;
  for (const auto& it : batch)
    if (!encoders.count(it.instance)) {
      encoders.emplace(it.instance, std::make_unique<Encoder>(model, data.view(it.instance), tape, true, &rng));
      bindings.emplace(it.instance, data.instance(it.instance).truth_binding());
    }
  std::vector<Var> ctx, truth_u;
  for (const auto& it : batch) {
    const auto& ph = data.instance(it.instance).placeholders.at(it.placeholder);
    auto& enc = *encoders.at(it.instance);
    ctx.push_back(enc.context(ph.token));
    truth_u.push_back(enc.usage(ph.token, ph.truth, bindings.at(it.instance)));
  }
  BatchGraph g;
  std::vector<Var> losses;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& it = batch[i];
    const auto& ph = data.instance(it.instance).placeholders.at(it.placeholder);
    auto& enc = *encoders.at(it.instance);
    std::vector<Var> scores;
    std::size_t truth = 0;
    for (std::size_t k = 0; k < ph.candidates.size(); ++k) {
      const auto v = ph.candidates[k];
      if (v == ph.truth) truth = k;
      const Var u = v == ph.truth ? truth_u[i] : enc.usage(ph.token, v, bindings.at(it.instance));
      scores.push_back(tape.dot(ctx[i], u));
    }
    for (std::size_t j = 0; j < batch.size(); ++j)
      if (j != i) scores.push_back(tape.dot(ctx[i], truth_u[j]));
    g.pool_sizes.push_back(scores.size());
    losses.push_back(tape.softmax_xent(scores, truth));
  }
  g.loss = tape.mean(losses);
  return g;
}

double train_step(models::Model& model, nn::AdamState& opt, const nn::AdamConfig& adam, const models::Dataset& data,
                  const Batch& batch, std::mt19937_64& rng) {
  nn::Tape tape;
  const auto g = batch_loss(model, data, batch, tape, rng);
  const double loss = tape.scalar(g.loss);
  if (!std::isfinite(loss)) {
    std::string where;
    for (const auto& it : batch)
      where += " " + data.instance(it.instance).program_id + "#" + std::to_string(it.placeholder);
    throw NonFiniteLoss("non-finite loss " + std::to_string(loss) + " on batch items:" + where);
  }
  model.params().zero_grad();
  tape.backward(g.loss);
  nn::adam_step(model.params(), opt, adam);
  return loss;
}

std::unique_ptr<models::Model> init_model(const TrainConfig& config, const std::vector<taskgen::TaskInstance>& train) {
  config.validate();
  if (train.empty()) throw InsufficientData("training set is empty");
  return std::make_unique<models::Model>(config.model, models::Vocab::build(train, config.model.min_lexeme_count),
                                         config.seed);
}

FitResult fit(const TrainConfig& config, models::Model& model, const models::Dataset& train,
              const models::Dataset& valid, std::ostream* log, int first_epoch) {
  config.validate();
  if (train.placeholder_count() == 0) throw InsufficientData("training set has no placeholders");
  if (valid.placeholder_count() == 0) throw InsufficientData("validation set has no placeholders");
  std::mt19937_64 rng(config.seed + static_cast<std::uint64_t>(first_epoch - 1) * 0x9E3779B97F4A7C15ULL);
  auto opt = nn::adam_init(model.params());
  nn::AdamConfig adam;
  adam.lr = config.lr;
  FitResult res;
  json best = nn::params_to_json(model.params());
  int stale = 0;
  for (int e = first_epoch; e < first_epoch + config.epochs; ++e) {
    const auto t0 = std::chrono::steady_clock::now();
    double total = 0;
    std::size_t n = 0;
    for (const auto& b : make_batches(train.instances(), config.batch_size, rng)) {
      total += train_step(model, opt, adam, train, b, rng);
      ++n;
    }
    EpochLog ep;
    ep.epoch = e;
    ep.loss = n ? total / static_cast<double>(n) : 0;
    ep.valid_accuracy = eval::eval_per_placeholder(model, valid, config.threads).accuracy;
    ep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.epochs.push_back(ep);
    res.last_epoch = e;
    if (log) *log << ep.epoch << '\t' << ep.loss << '\t' << ep.valid_accuracy << '\t' << ep.seconds << std::endl;
    if (ep.valid_accuracy > res.best_valid_accuracy) {
      res.best_valid_accuracy = ep.valid_accuracy;
      res.best_epoch = e;
      best = nn::params_to_json(model.params());
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }
  nn::params_from_json(best, model.params());
  if (!config.checkpoint.empty()) save_checkpoint(config.checkpoint, model, config, res.best_epoch);
  return res;
}

json checkpoint_json(const models::Model& model, const TrainConfig& config, int epoch) {
  auto c = config;
  c.model = model.config();
  return {{"format_version", nn::kCheckpointFormatVersion},
          {"config", to_json(c)},
          {"vocab", model.vocab().to_json()},
          {"params", nn::params_to_json(model.params())},
          {"epoch", epoch}};
}

void save_checkpoint(const std::string& path, const models::Model& model, const TrainConfig& config, int epoch) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out << checkpoint_json(model, config, epoch).dump() << '\n';
  if (!out) throw std::runtime_error("failed writing checkpoint " + path);
}

Checkpoint checkpoint_from_json(const json& j) {
  if (j.value("format_version", -1) != nn::kCheckpointFormatVersion)
    throw nn::CheckpointError("unsupported checkpoint format version");
  Checkpoint c;
  c.config = train_config_from_json(j.at("config"));
  c.epoch = j.at("epoch").get<int>();
  c.model = std::make_unique<models::Model>(c.config.model, models::Vocab::from_json(j.at("vocab")), 0);
  nn::params_from_json(j.at("params"), c.model->params());
  return c;
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path + ": file not found");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw nn::CheckpointError("checkpoint " + path + " is not valid JSON: " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace smartpaste::train
