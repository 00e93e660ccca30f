#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "collenc/nn/vae.hpp"

namespace collenc::nn {

/// One training pair. Vanilla mode uses target == input; CollNet uses the
/// collision image. The mask selects the pixels that enter the
/// reconstruction loss.
struct TrainingSample {
    Tensor input;
    Tensor target;
    std::vector<std::uint8_t> mask;
};

struct AdamParams {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    std::uint64_t t = 0;

    static AdamState for_model(const VaeModel& model);
};

/// One bias-corrected Adam update; increments state.t first.
void adam_step(VaeModel& model, const Gradients& grads, AdamState& state, double lr,
               const AdamParams& params = {});

struct EpochLoss {
    std::size_t epoch = 0;
    double total = 0.0;
    double recon = 0.0;
    double kl = 0.0;
};

struct TrainConfig {
    std::size_t steps = 2000;
    std::size_t batch_size = 16;
    double lr = 1e-3;
    /// Cosine decay from lr to lr * lr_final_fraction over `steps`.
    double lr_final_fraction = 0.1;
    AdamParams adam{};
    std::uint64_t seed = 0;
    /// Worker threads for per-sample gradients; 0 = hardware concurrency.
    /// Gradients are reduced in sample order, so results do not depend on it.
    unsigned threads = 1;
    std::function<void(const EpochLoss&)> on_epoch{};

    void validate() const;
};

struct TrainResult {
    /// Mean per-sample training loss of each epoch; an epoch is
    /// ceil(N / batch_size) steps, the last one possibly partial.
    std::vector<EpochLoss> curve;
    std::size_t steps = 0;
};

class TrainingDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Learning rate at a step under cosine decay.
double scheduled_lr(const TrainConfig& config, std::size_t step);

/// Trains in place. Throws std::invalid_argument for an empty or
/// mis-shaped dataset and TrainingDiverged on a non-finite loss.
TrainResult train(VaeModel& model, std::span<const TrainingSample> data, const TrainConfig& config);

/// Mean masked reconstruction MSE with z = mu, in normalized units.
double mean_reconstruction_mse(const VaeModel& model, std::span<const TrainingSample> data);

}  // namespace collenc::nn
