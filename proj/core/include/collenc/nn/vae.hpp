#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "collenc/image.hpp"
#include "collenc/nn/tensor.hpp"

namespace collenc::nn {

/// Architecture of the depth encoder / image decoder.
///
/// Encoder: one residual block per entry of `encoder_channels`, each a
/// stride-2 3x3 conv, ELU, a stride-1 3x3 conv, plus a stride-2 1x1
/// projection on the skip path, followed by ELU. The final feature map is
/// flattened into two linear heads (mu, logvar) of size `latent`.
///
/// Decoder: linear(latent -> decoder_hidden), ReLU, linear(-> flattened
/// final feature map), ReLU, then one stride-2 3x3 transposed conv per
/// encoder block mirroring its spatial size. Intermediate transposed convs
/// use `decoder_channels` and ReLU; the last one has one channel and a
/// sigmoid.
struct VaeConfig {
    int height = 60;
    int width = 80;
    std::vector<int> encoder_channels{16, 32, 64, 64};
    int latent = 32;
    int decoder_hidden = 256;
    std::vector<int> decoder_channels{64, 32, 16};
    double beta = 1e-4;  ///< weight of the KL term
    double max_range = kDefaultMaxRange;

    void validate() const;
    /// Spatial size of every encoder stage, input first.
    [[nodiscard]] std::vector<std::pair<int, int>> stage_sizes() const;

    [[nodiscard]] std::string to_json() const;
    static VaeConfig from_json(const std::string& text);

    friend bool operator==(const VaeConfig&, const VaeConfig&) = default;
};

struct NamedTensor {
    std::string name;
    Tensor value;
    friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

class VaeModel {
public:
    /// Weights drawn U(-sqrt(3/fan_in), sqrt(3/fan_in)) from `seed`; biases zero.
    static VaeModel create(const VaeConfig& config, std::uint64_t seed);
    /// Adopts an existing parameter table; names and shapes must match the layout.
    static VaeModel from_parameters(const VaeConfig& config, std::vector<NamedTensor> params);

    [[nodiscard]] const VaeConfig& config() const { return config_; }
    [[nodiscard]] const std::vector<NamedTensor>& parameters() const { return params_; }
    std::vector<NamedTensor>& parameters() { return params_; }
    [[nodiscard]] std::size_t parameter_count() const;
    [[nodiscard]] const Tensor& param(std::size_t index) const { return params_[index].value; }
    /// Index of a parameter by name; throws std::out_of_range.
    [[nodiscard]] std::size_t index_of(const std::string& name) const;

    friend bool operator==(const VaeModel&, const VaeModel&) = default;

private:
    VaeConfig config_;
    std::vector<NamedTensor> params_;
};

/// Expected (name, shape) table for a configuration, in storage order.
std::vector<std::pair<std::string, std::vector<std::size_t>>> parameter_layout(const VaeConfig& config);

struct LatentCode {
    std::vector<double> mu;
    std::vector<double> logvar;
    std::vector<double> z;
};

/// x: (1, height, width), normalized to [0, 1]. Returns mu and logvar with
/// z = mu.
LatentCode encode(const VaeModel& model, const Tensor& x);

/// z = mu + exp(logvar / 2) * noise.
std::vector<double> reparameterize(const LatentCode& code, std::span<const double> noise);

/// Image (1, height, width) with values in (0, 1).
Tensor decode(const VaeModel& model, std::span<const double> z);

/// Deterministic evaluation path: decode(encode(x).mu).
Tensor reconstruct(const VaeModel& model, const Tensor& x);

struct LossTerms {
    double total = 0.0;
    double recon = 0.0;
    double kl = 0.0;
};

/// 0.5 * sum(mu^2 + exp(logvar) - 1 - logvar); non-negative, zero only at
/// the prior.
double kl_divergence(std::span<const double> mu, std::span<const double> logvar);

/// recon = masked MSE, kl as above, total = recon + beta * kl.
LossTerms vae_loss(const Tensor& target, const Tensor& recon, const LatentCode& code, double beta,
                   std::span<const std::uint8_t> mask);

using Gradients = std::vector<Tensor>;

/// Zeroed gradient buffers matching the parameter table.
Gradients zero_gradients(const VaeModel& model);

/// One sample's forward pass with the given noise and its backward pass.
/// Adds d(total)/d(params) into `grads`; writes d(total)/d(x) when
/// `grad_input` is non-null.
LossTerms accumulate_gradients(const VaeModel& model, const Tensor& x, const Tensor& target,
                               std::span<const std::uint8_t> mask, std::span<const double> noise,
                               Gradients& grads, Tensor* grad_input = nullptr);

/// Forward-only loss for the same inputs (finite-difference oracle).
LossTerms evaluate_loss(const VaeModel& model, const Tensor& x, const Tensor& target,
                        std::span<const std::uint8_t> mask, std::span<const double> noise);

/// Depth image -> normalized network input (values / max_range, invalid = 0).
Tensor normalize_image(const DepthImage& image, double max_range);
/// Network output -> meters.
DepthImage denormalize_image(const Tensor& image, double max_range);

}  // namespace collenc::nn
