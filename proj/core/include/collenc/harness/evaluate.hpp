#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "collenc/harness/dataset.hpp"
#include "collenc/nn/train.hpp"

namespace collenc::harness {

enum class ModelMode { Vanilla, CollNet };

std::string_view to_string(ModelMode mode);
/// "vanilla" or "collnet"; throws std::invalid_argument otherwise.
ModelMode parse_mode(std::string_view name);

/// Vanilla pairs reconstruct the depth image, CollNet pairs map it to the
/// collision image. Both mask the loss with the input depth validity.
std::vector<nn::TrainingSample> make_samples(std::span<const LoadedPair> pairs, ModelMode mode,
                                             double max_range);

/// pixels / budget.
double compression_ratio(std::size_t pixels, std::size_t budget);

/// Factor from normalized [0, 1] MSE to the 8-bit scale.
inline constexpr double kByteScale = 255.0 * 255.0;

struct MetricsRow {
    std::string method;
    std::size_t budget = 0;
    double compression_ratio = 0.0;
    std::optional<double> mse_depth;      ///< vs. input depth, normalized units
    std::optional<double> mse_collision;  ///< vs. collision image, normalized units
    std::size_t images = 0;               ///< images with non-empty coverage
};

struct MetricsTable {
    std::string name;
    std::size_t pixels = 0;
    std::vector<MetricsRow> rows;

    [[nodiscard]] const MetricsRow* find(std::string_view method, std::size_t budget) const;
    /// Header plus one line per row in insertion order; empty cells for
    /// metrics a method does not report.
    [[nodiscard]] std::string to_csv() const;
};

/// Trained models keyed by latent size.
using ModelSet = std::map<std::size_t, nn::VaeModel>;

/// Decoder output for z = mu, in meters.
DepthImage reconstruct_depth(const nn::VaeModel& model, const DepthImage& depth);

/// P(x): the collision pipeline with the ground-truth parameters applied to
/// a decoder output as is. Pixels beyond max_range count as invalid.
CollisionImage derived_collision(const DepthImage& reconstruction, const CameraIntrinsics& K,
                                 const CollisionParams& params);

/// Mean masked MSE vs. the input depth for FFT and wavelet at every budget,
/// then for each vanilla model (if given).
MetricsTable evaluate_codecs(std::span<const LoadedPair> test, std::span<const std::size_t> budgets,
                             const ModelSet* vanilla, double max_range, unsigned threads = 1);

/// Mean masked MSE vs. the collision image: "collnet" rows score the
/// decoder output, "vanilla_p" rows score P(vanilla reconstruction).
MetricsTable evaluate_collision(std::span<const LoadedPair> test, const ModelSet& collnet,
                                const ModelSet& vanilla, const CameraIntrinsics& K,
                                const CollisionParams& params, double max_range, unsigned threads = 1);

}  // namespace collenc::harness
