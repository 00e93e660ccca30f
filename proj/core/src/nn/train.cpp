#include "collenc/nn/train.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "collenc/parallel.hpp"
#include "collenc/rng.hpp"

namespace collenc::nn {

namespace {

constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kNoiseStream = 2;

std::vector<std::size_t> epoch_order(const CounterRng& shuffle, std::size_t epoch, std::size_t n) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    CounterRng rng = shuffle.split(epoch);
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

std::vector<double> draw_noise(const CounterRng& noise, std::size_t step, std::size_t slot, int latent) {
    CounterRng rng = noise.split(step).split(slot);
    std::vector<double> eps(static_cast<std::size_t>(latent));
    for (double& e : eps) e = rng.normal();
    return eps;
}

void check_dataset(const VaeModel& model, std::span<const TrainingSample> data) {
    if (data.empty()) throw std::invalid_argument("train: empty dataset");
    const auto& c = model.config();
    const std::vector<std::size_t> shape{1, static_cast<std::size_t>(c.height), static_cast<std::size_t>(c.width)};
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& s = data[i];
        if (s.input.shape() != shape || s.target.shape() != shape || s.mask.size() != s.input.size())
            throw std::invalid_argument("train: sample " + std::to_string(i) + " does not match model shape " +
                                        shape_string(shape));
    }
}

void add_scaled(Gradients& into, const Gradients& from, double scale) {
    for (std::size_t p = 0; p < into.size(); ++p) {
        auto dst = into[p].data();
        const auto src = from[p].data();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
    }
}

void clear(Gradients& g) {
    for (auto& t : g) t.fill(0.0);
}

}  // namespace

AdamState AdamState::for_model(const VaeModel& model) {
    AdamState s;
    s.m = zero_gradients(model);
    s.v = zero_gradients(model);
    return s;
}

void adam_step(VaeModel& model, const Gradients& grads, AdamState& state, double lr, const AdamParams& params) {
    auto& ps = model.parameters();
    if (grads.size() != ps.size() || state.m.size() != ps.size() || state.v.size() != ps.size())
        throw std::invalid_argument("adam_step: state does not match model");
    ++state.t;
    const double bc1 = 1.0 - std::pow(params.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(params.beta2, static_cast<double>(state.t));
    for (std::size_t p = 0; p < ps.size(); ++p) {
        auto w = ps[p].value.data();
        const auto g = grads[p].data();
        auto m = state.m[p].data();
        auto v = state.v[p].data();
        if (g.size() != w.size()) throw std::invalid_argument("adam_step: gradient shape mismatch");
        for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = params.beta1 * m[i] + (1.0 - params.beta1) * g[i];
            v[i] = params.beta2 * v[i] + (1.0 - params.beta2) * g[i] * g[i];
            w[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + params.eps);
        }
    }
}

void TrainConfig::validate() const {
    if (steps == 0) throw std::invalid_argument("train config: steps must be >= 1");
    if (batch_size == 0) throw std::invalid_argument("train config: batch_size must be >= 1");
    if (!(lr > 0.0)) throw std::invalid_argument("train config: lr must be positive");
    if (!(lr_final_fraction >= 0.0 && lr_final_fraction <= 1.0))
        throw std::invalid_argument("train config: lr_final_fraction must be in [0, 1]");
}

double scheduled_lr(const TrainConfig& config, std::size_t step) {
    const double progress = static_cast<double>(step) / static_cast<double>(config.steps);
    const double floor = config.lr * config.lr_final_fraction;
    return floor + 0.5 * (config.lr - floor) * (1.0 + std::cos(std::numbers::pi * progress));
}

TrainResult train(VaeModel& model, std::span<const TrainingSample> data, const TrainConfig& config) {
    config.validate();
    check_dataset(model, data);
    const std::size_t n = data.size();
    const std::size_t batch = std::min(config.batch_size, n);
    const std::size_t steps_per_epoch = (n + batch - 1) / batch;
    const int latent = model.config().latent;

    const CounterRng root(config.seed);
    const CounterRng shuffle = root.split(kShuffleStream);
    const CounterRng noise = root.split(kNoiseStream);

    AdamState adam = AdamState::for_model(model);
    Gradients total = zero_gradients(model);
    std::vector<Gradients> scratch(config.threads == 1 ? 1 : batch);
    for (auto& s : scratch) s = zero_gradients(model);
    std::vector<LossTerms> sample_loss(batch);

    TrainResult result;
    EpochLoss running;
    std::size_t seen = 0;
    std::vector<std::size_t> order;

    for (std::size_t step = 0; step < config.steps; ++step) {
        const std::size_t epoch = step / steps_per_epoch;
        const std::size_t within = step % steps_per_epoch;
        if (within == 0) order = epoch_order(shuffle, epoch, n);
        const std::size_t begin = within * batch;
        const std::size_t count = std::min(batch, n - begin);

        clear(total);
        const double scale = 1.0 / static_cast<double>(count);
        auto run_sample = [&](std::size_t k, Gradients& g) {
            const TrainingSample& s = data[order[begin + k]];
            const auto eps = draw_noise(noise, step, k, latent);
            sample_loss[k] = accumulate_gradients(model, s.input, s.target, s.mask, eps, g);
        };
        if (scratch.size() == 1) {
            for (std::size_t k = 0; k < count; ++k) {
                clear(scratch[0]);
                run_sample(k, scratch[0]);
                add_scaled(total, scratch[0], scale);
            }
        } else {
            parallel_for(count, config.threads, [&](std::size_t k) {
                clear(scratch[k]);
                run_sample(k, scratch[k]);
            });
            for (std::size_t k = 0; k < count; ++k) add_scaled(total, scratch[k], scale);
        }

        for (std::size_t k = 0; k < count; ++k) {
            const LossTerms& l = sample_loss[k];
            if (!std::isfinite(l.total)) {
                std::ostringstream msg;
                msg << "training diverged at step " << step << " (epoch " << epoch << "): loss " << l.total
                    << " recon " << l.recon << " kl " << l.kl;
                throw TrainingDiverged(msg.str());
            }
            running.total += l.total;
            running.recon += l.recon;
            running.kl += l.kl;
            ++seen;
        }

        adam_step(model, total, adam, scheduled_lr(config, step), config.adam);

        if (within + 1 == steps_per_epoch || step + 1 == config.steps) {
            const double inv = 1.0 / static_cast<double>(seen);
            result.curve.push_back({epoch, running.total * inv, running.recon * inv, running.kl * inv});
            if (config.on_epoch) config.on_epoch(result.curve.back());
            running = {};
            seen = 0;
        }
    }
    result.steps = config.steps;
    return result;
}

double mean_reconstruction_mse(const VaeModel& model, std::span<const TrainingSample> data) {
    if (data.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& s : data) {
        const Tensor recon = reconstruct(model, s.input);
        const LatentCode code{std::vector<double>(1, 0.0), std::vector<double>(1, 0.0), {}};
        sum += vae_loss(s.target, recon, code, 0.0, s.mask).recon;
    }
    return sum / static_cast<double>(data.size());
}

}  // namespace collenc::nn
