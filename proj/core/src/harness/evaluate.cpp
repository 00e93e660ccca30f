#include "collenc/harness/evaluate.hpp"

#include <cstdio>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "collenc/codecs.hpp"
#include "collenc/parallel.hpp"

namespace collenc::harness {

namespace {

struct MeanAccumulator {
    double sum = 0.0;
    std::size_t count = 0;
    void add(const MseResult& r) {
        if (r.empty_coverage()) return;
        sum += r.value;
        ++count;
    }
    [[nodiscard]] double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
};

/// Evaluates `score` on every image in parallel, then averages in image order.
MeanAccumulator mean_over(std::size_t n, unsigned threads, const std::function<MseResult(std::size_t)>& score) {
    std::vector<MseResult> per(n);
    parallel_for(n, threads, [&](std::size_t i) { per[i] = score(i); });
    MeanAccumulator acc;
    for (const auto& r : per) acc.add(r);
    return acc;
}

Plane normalized_plane(const DepthImage& d, double max_range) {
    Plane p(d);
    for (double& v : p.values) v /= max_range;
    return p;
}

MseResult normalized_mse(const Grid<DepthTag>& a, std::span<const double> b_meters, const ValidityMask& mask,
                         double max_range) {
    MseResult r = masked_mse(a.values(), b_meters, mask);
    r.value /= max_range * max_range;
    return r;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void check_models(const ModelSet& models, const char* what) {
    if (models.empty()) throw std::invalid_argument(std::string("missing model: no ") + what + " models");
    for (const auto& [budget, m] : models)
        if (static_cast<std::size_t>(m.config().latent) != budget)
            throw std::invalid_argument(std::string(what) + " model keyed " + std::to_string(budget) +
                                        " has latent " + std::to_string(m.config().latent));
}

}  // namespace

std::string_view to_string(ModelMode mode) { return mode == ModelMode::Vanilla ? "vanilla" : "collnet"; }

ModelMode parse_mode(std::string_view name) {
    if (name == "vanilla") return ModelMode::Vanilla;
    if (name == "collnet") return ModelMode::CollNet;
    throw std::invalid_argument("unknown mode '" + std::string(name) + "' (expected vanilla or collnet)");
}

std::vector<nn::TrainingSample> make_samples(std::span<const LoadedPair> pairs, ModelMode mode, double max_range) {
    std::vector<nn::TrainingSample> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        nn::TrainingSample s;
        s.input = nn::normalize_image(p.depth, max_range);
        s.target = mode == ModelMode::Vanilla ? s.input : nn::normalize_image(p.collision, max_range);
        s.mask = validity_mask(p.depth);
        out.push_back(std::move(s));
    }
    return out;
}

double compression_ratio(std::size_t pixels, std::size_t budget) {
    if (budget == 0) throw std::invalid_argument("compression_ratio: budget must be >= 1");
    return static_cast<double>(pixels) / static_cast<double>(budget);
}

const MetricsRow* MetricsTable::find(std::string_view method, std::size_t budget) const {
    for (const auto& r : rows)
        if (r.method == method && r.budget == budget) return &r;
    return nullptr;
}

std::string MetricsTable::to_csv() const {
    std::ostringstream out;
    out << "method,budget,compression_ratio,mse_depth,mse_depth_x255sq,mse_collision,mse_collision_x255sq,images\n";
    auto cell = [&](const std::optional<double>& v, double scale) {
        if (v) out << format_double(*v * scale);
    };
    for (const auto& r : rows) {
        out << r.method << ',' << r.budget << ',' << format_double(r.compression_ratio) << ',';
        cell(r.mse_depth, 1.0);
        out << ',';
        cell(r.mse_depth, kByteScale);
        out << ',';
        cell(r.mse_collision, 1.0);
        out << ',';
        cell(r.mse_collision, kByteScale);
        out << ',' << r.images << '\n';
    }
    return out.str();
}

DepthImage reconstruct_depth(const nn::VaeModel& model, const DepthImage& depth) {
    const double max_range = model.config().max_range;
    DepthImage out = nn::denormalize_image(nn::reconstruct(model, nn::normalize_image(depth, max_range)), max_range);
    out.set_max_range(depth.max_range());
    return out;
}

CollisionImage derived_collision(const DepthImage& reconstruction, const CameraIntrinsics& K,
                                 const CollisionParams& params) {
    DepthImage clipped = reconstruction;
    for (double& v : clipped.values())
        if (v > clipped.max_range()) v = kInvalid;
    return collision_image(clipped, K, params);
}

MetricsTable evaluate_codecs(std::span<const LoadedPair> test, std::span<const std::size_t> budgets,
                             const ModelSet* vanilla, double max_range, unsigned threads) {
    if (test.empty()) throw std::invalid_argument("evaluate_codecs: empty test split");
    MetricsTable t;
    t.name = "codecs";
    t.pixels = test.front().depth.size();
    auto row = [&](const std::string& method, std::size_t budget, const MeanAccumulator& acc) {
        t.rows.push_back({method, budget, compression_ratio(t.pixels, budget), acc.mean(), std::nullopt, acc.count});
    };
    for (const char* codec : {"fft", "wavelet"}) {
        const bool fft = codec[0] == 'f';
        for (std::size_t n : budgets) {
            row(codec, n, mean_over(test.size(), threads, [&](std::size_t i) {
                    const DepthImage& d = test[i].depth;
                    const Plane in = normalized_plane(d, max_range);
                    const Plane out = fft ? fft_decompress(fft_compress(in, n))
                                          : wavelet_decompress(wavelet_compress(in, n));
                    return masked_mse(in.values, out.values, validity_mask(d));
                }));
        }
    }
    if (vanilla) {
        check_models(*vanilla, "vanilla");
        for (const auto& [budget, model] : *vanilla) {
            row("vanilla", budget, mean_over(test.size(), threads, [&](std::size_t i) {
                    const DepthImage& d = test[i].depth;
                    return normalized_mse(d, reconstruct_depth(model, d).values(), validity_mask(d), max_range);
                }));
        }
    }
    return t;
}

MetricsTable evaluate_collision(std::span<const LoadedPair> test, const ModelSet& collnet, const ModelSet& vanilla,
                                const CameraIntrinsics& K, const CollisionParams& params, double max_range,
                                unsigned threads) {
    if (test.empty()) throw std::invalid_argument("evaluate_collision: empty test split");
    check_models(collnet, "collnet");
    check_models(vanilla, "vanilla");
    MetricsTable t;
    t.name = "collision";
    t.pixels = test.front().depth.size();
    auto row = [&](const std::string& method, std::size_t budget, const MeanAccumulator& acc) {
        t.rows.push_back({method, budget, compression_ratio(t.pixels, budget), std::nullopt, acc.mean(), acc.count});
    };
    for (const auto& [budget, model] : collnet) {
        row("collnet", budget, mean_over(test.size(), threads, [&](std::size_t i) {
                const LoadedPair& p = test[i];
                return normalized_mse(p.collision, reconstruct_depth(model, p.depth).values(),
                                      validity_mask(p.depth), max_range);
            }));
    }
    for (const auto& [budget, model] : vanilla) {
        row("vanilla_p", budget, mean_over(test.size(), threads, [&](std::size_t i) {
                const LoadedPair& p = test[i];
                const CollisionImage derived = derived_collision(reconstruct_depth(model, p.depth), K, params);
                return normalized_mse(p.collision, derived.values(), validity_mask(p.depth), max_range);
            }));
    }
    return t;
}

}  // namespace collenc::harness
