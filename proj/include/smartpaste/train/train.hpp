// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "smartpaste/models/encoder.hpp"
#include "smartpaste/nn/adam.hpp"

namespace smartpaste::train {

struct TrainConfig {
  models::ModelConfig model;
  int batch_size = 16;
  int epochs = 20;
  double lr = 1e-3;
  std::uint64_t seed = 1;
  int patience = 3;  // epochs without validation improvement before stopping
  std::string checkpoint;
  int threads = 1;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

class NonFiniteLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One training usage: a placeholder of an instance, every other placeholder at
/// its ground truth.
struct Item {
  std::size_t instance = 0;
  std::size_t placeholder = 0;
  friend bool operator==(const Item&, const Item&) = default;
};
using Batch = std::vector<Item>;

std::vector<Item> items_of(const std::vector<taskgen::TaskInstance>& instances);
/// Shuffles all items with `rng` and cuts them into batches of `batch_size`.
std::vector<Batch> make_batches(const std::vector<taskgen::TaskInstance>& instances, int batch_size,
                                std::mt19937_64& rng);

struct BatchGraph {
  nn::Var loss;                         // mean cross-entropy
  std::vector<std::size_t> pool_sizes;  // softmax width per item
};

/// Records the batch loss. Each item is normalized over its own candidates plus
/// the truth usage vectors of the other items, each computed in its home instance.
BatchGraph batch_loss(models::Model& model, const models::Dataset& data, const Batch& batch, nn::Tape& tape,
                      std::mt19937_64& rng);

/// Forward, backward and one optimizer step. Returns the loss.
double train_step(models::Model& model, nn::AdamState& opt, const nn::AdamConfig& adam, const models::Dataset& data,
                  const Batch& batch, std::mt19937_64& rng);

struct EpochLog {
  int epoch = 0;
  double loss = 0;
  double valid_accuracy = 0;
  double seconds = 0;
};

struct FitResult {
  int best_epoch = 0;
  double best_valid_accuracy = -1;
  int last_epoch = 0;
  std::vector<EpochLog> epochs;
};

/// Trains until the epoch budget is spent or validation accuracy stalls for
/// `patience` epochs; leaves the best parameters in `model` and writes them to
/// `config.checkpoint` when set. Epoch numbers start at `first_epoch`.
FitResult fit(const TrainConfig& config, models::Model& model, const models::Dataset& train,
              const models::Dataset& valid, std::ostream* log = nullptr, int first_epoch = 1);

/// Builds the vocabulary from `train` and a freshly initialized model.
std::unique_ptr<models::Model> init_model(const TrainConfig& config, const std::vector<taskgen::TaskInstance>& train);

struct Checkpoint {
  std::unique_ptr<models::Model> model;
  TrainConfig config;
  int epoch = 0;
};

void save_checkpoint(const std::string& path, const models::Model& model, const TrainConfig& config, int epoch);
nlohmann::json checkpoint_json(const models::Model& model, const TrainConfig& config, int epoch);
Checkpoint load_checkpoint(const std::string& path);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

}  // namespace smartpaste::train
