#include "collenc/nn/vae.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "collenc/nn/layers.hpp"
#include "collenc/rng.hpp"

namespace collenc::nn {

namespace {

constexpr int kKernel = 3;
constexpr int kStride = 2;
constexpr int kPadding = 1;

// Parameter indices in storage order.
struct Layout {
    std::size_t blocks;
    [[nodiscard]] std::size_t conv1_w(std::size_t i) const { return 6 * i; }
    [[nodiscard]] std::size_t conv1_b(std::size_t i) const { return 6 * i + 1; }
    [[nodiscard]] std::size_t conv2_w(std::size_t i) const { return 6 * i + 2; }
    [[nodiscard]] std::size_t conv2_b(std::size_t i) const { return 6 * i + 3; }
    [[nodiscard]] std::size_t skip_w(std::size_t i) const { return 6 * i + 4; }
    [[nodiscard]] std::size_t skip_b(std::size_t i) const { return 6 * i + 5; }
    [[nodiscard]] std::size_t mu_w() const { return 6 * blocks; }
    [[nodiscard]] std::size_t mu_b() const { return 6 * blocks + 1; }
    [[nodiscard]] std::size_t lv_w() const { return 6 * blocks + 2; }
    [[nodiscard]] std::size_t lv_b() const { return 6 * blocks + 3; }
    [[nodiscard]] std::size_t fc1_w() const { return 6 * blocks + 4; }
    [[nodiscard]] std::size_t fc1_b() const { return 6 * blocks + 5; }
    [[nodiscard]] std::size_t fc2_w() const { return 6 * blocks + 6; }
    [[nodiscard]] std::size_t fc2_b() const { return 6 * blocks + 7; }
    [[nodiscard]] std::size_t deconv_w(std::size_t i) const { return 6 * blocks + 8 + 2 * i; }
    [[nodiscard]] std::size_t deconv_b(std::size_t i) const { return 6 * blocks + 9 + 2 * i; }
};

Layout layout_of(const VaeConfig& c) { return {c.encoder_channels.size()}; }

std::vector<int> deconv_channels(const VaeConfig& c) {
    std::vector<int> ch{c.encoder_channels.back()};
    ch.insert(ch.end(), c.decoder_channels.begin(), c.decoder_channels.end());
    ch.push_back(1);
    return ch;
}

std::size_t flat_size(const VaeConfig& c) {
    const auto last = c.stage_sizes().back();
    return static_cast<std::size_t>(c.encoder_channels.back()) * last.first * last.second;
}

struct BlockTrace {
    Tensor input;
    Tensor a1;   // conv1 pre-activation
    Tensor h1;   // elu(a1)
    Tensor sum;  // conv2(h1) + skip(input)
};

struct Trace {
    std::vector<BlockTrace> blocks;
    Tensor flat;
    LatentCode code;
    Tensor z;
    Tensor d1, r1, d2, r2;
    std::vector<Tensor> deconv_in;
    std::vector<Tensor> deconv_pre;
    Tensor recon;
};

void check_input(const VaeConfig& c, const Tensor& x) {
    if (x.rank() != 3 || x.dim(0) != 1 || x.dim(1) != static_cast<std::size_t>(c.height) ||
        x.dim(2) != static_cast<std::size_t>(c.width))
        throw std::invalid_argument("vae: expected input (1, " + std::to_string(c.height) + ", " +
                                    std::to_string(c.width) + "), got " + shape_string(x.shape()));
}

Tensor vec(std::span<const double> v) { return Tensor({v.size()}, v); }

void run_encoder(const VaeModel& m, const Tensor& x, Trace& t) {
    const VaeConfig& c = m.config();
    check_input(c, x);
    const Layout L = layout_of(c);
    Tensor h = x;
    t.blocks.resize(L.blocks);
    for (std::size_t i = 0; i < L.blocks; ++i) {
        BlockTrace& b = t.blocks[i];
        b.input = std::move(h);
        b.a1 = conv2d(b.input, m.param(L.conv1_w(i)), m.param(L.conv1_b(i)), kStride, kPadding);
        b.h1 = elu(b.a1);
        b.sum = conv2d(b.h1, m.param(L.conv2_w(i)), m.param(L.conv2_b(i)), 1, kPadding);
        b.sum += conv2d(b.input, m.param(L.skip_w(i)), m.param(L.skip_b(i)), kStride, 0);
        h = elu(b.sum);
    }
    t.flat = std::move(h).reshaped({flat_size(c)});
    const Tensor mu = linear(t.flat, m.param(L.mu_w()), m.param(L.mu_b()));
    const Tensor lv = linear(t.flat, m.param(L.lv_w()), m.param(L.lv_b()));
    t.code.mu.assign(mu.data().begin(), mu.data().end());
    t.code.logvar.assign(lv.data().begin(), lv.data().end());
    t.code.z = t.code.mu;
}

void run_decoder(const VaeModel& m, std::span<const double> z, Trace& t) {
    const VaeConfig& c = m.config();
    if (z.size() != static_cast<std::size_t>(c.latent))
        throw std::invalid_argument("vae: latent size mismatch");
    const Layout L = layout_of(c);
    t.z = vec(z);
    t.d1 = linear(t.z, m.param(L.fc1_w()), m.param(L.fc1_b()));
    t.r1 = relu(t.d1);
    t.d2 = linear(t.r1, m.param(L.fc2_w()), m.param(L.fc2_b()));
    t.r2 = relu(t.d2);
    const auto stages = c.stage_sizes();
    const auto last = stages.back();
    Tensor h = t.r2.reshaped({static_cast<std::size_t>(c.encoder_channels.back()),
                              static_cast<std::size_t>(last.first), static_cast<std::size_t>(last.second)});
    t.deconv_in.resize(L.blocks);
    t.deconv_pre.resize(L.blocks);
    for (std::size_t i = 0; i < L.blocks; ++i) {
        const auto target = stages[L.blocks - 1 - i];
        t.deconv_in[i] = std::move(h);
        t.deconv_pre[i] = conv_transpose2d(t.deconv_in[i], m.param(L.deconv_w(i)), m.param(L.deconv_b(i)),
                                           kStride, kPadding, target.first, target.second);
        h = i + 1 < L.blocks ? relu(t.deconv_pre[i]) : sigmoid(t.deconv_pre[i]);
    }
    t.recon = std::move(h);
}

LossTerms loss_and_seed_gradient(const Tensor& target, const Tensor& recon, const LatentCode& code,
                                 double beta, std::span<const std::uint8_t> mask, Tensor* grad_recon) {
    if (target.size() != recon.size() || mask.size() != recon.size())
        throw std::invalid_argument("vae_loss: shape mismatch");
    LossTerms l;
    std::size_t covered = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < recon.size(); ++i) {
        if (!mask[i]) continue;
        const double d = recon[i] - target[i];
        sum += d * d;
        ++covered;
    }
    l.recon = covered ? sum / static_cast<double>(covered) : 0.0;
    l.kl = kl_divergence(code.mu, code.logvar);
    l.total = l.recon + beta * l.kl;
    if (grad_recon) {
        *grad_recon = Tensor(recon.shape());
        if (covered) {
            const double s = 2.0 / static_cast<double>(covered);
            for (std::size_t i = 0; i < recon.size(); ++i)
                if (mask[i]) (*grad_recon)[i] = s * (recon[i] - target[i]);
        }
    }
    return l;
}

double fan_in_bound(const std::vector<std::size_t>& shape, bool transposed) {
    double fan_in;
    if (shape.size() == 2) fan_in = static_cast<double>(shape[1]);
    else if (transposed) fan_in = static_cast<double>(shape[0] * shape[2] * shape[3]) / (kStride * kStride);
    else fan_in = static_cast<double>(shape[1] * shape[2] * shape[3]);
    return std::sqrt(3.0 / std::max(fan_in, 1.0));
}

}  // namespace

void VaeConfig::validate() const {
    if (height < 1 || width < 1) throw std::invalid_argument("vae config: bad input size");
    if (encoder_channels.empty()) throw std::invalid_argument("vae config: need at least one encoder block");
    for (int ch : encoder_channels)
        if (ch < 1) throw std::invalid_argument("vae config: encoder channels must be positive");
    if (decoder_channels.size() + 1 != encoder_channels.size())
        throw std::invalid_argument("vae config: decoder_channels must have one entry fewer than encoder_channels");
    for (int ch : decoder_channels)
        if (ch < 1) throw std::invalid_argument("vae config: decoder channels must be positive");
    if (latent < 1) throw std::invalid_argument("vae config: latent must be >= 1");
    if (decoder_hidden < 1) throw std::invalid_argument("vae config: decoder_hidden must be >= 1");
    if (!(beta >= 0.0)) throw std::invalid_argument("vae config: beta must be >= 0");
    if (!(max_range > 0.0)) throw std::invalid_argument("vae config: max_range must be positive");
}

std::vector<std::pair<int, int>> VaeConfig::stage_sizes() const {
    std::vector<std::pair<int, int>> s{{height, width}};
    for (std::size_t i = 0; i < encoder_channels.size(); ++i) {
        const auto [h, w] = s.back();
        s.emplace_back(conv_output_size(h, kKernel, kStride, kPadding),
                       conv_output_size(w, kKernel, kStride, kPadding));
    }
    return s;
}

std::string VaeConfig::to_json() const {
    const nlohmann::json j{{"height", height},
                           {"width", width},
                           {"encoder_channels", encoder_channels},
                           {"latent", latent},
                           {"decoder_hidden", decoder_hidden},
                           {"decoder_channels", decoder_channels},
                           {"beta", beta},
                           {"max_range", max_range}};
    return j.dump();
}

VaeConfig VaeConfig::from_json(const std::string& text) {
    VaeConfig c;
    try {
        const auto j = nlohmann::json::parse(text);
        c.height = j.at("height").get<int>();
        c.width = j.at("width").get<int>();
        c.encoder_channels = j.at("encoder_channels").get<std::vector<int>>();
        c.latent = j.at("latent").get<int>();
        c.decoder_hidden = j.at("decoder_hidden").get<int>();
        c.decoder_channels = j.at("decoder_channels").get<std::vector<int>>();
        c.beta = j.at("beta").get<double>();
        c.max_range = j.at("max_range").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("vae config: ") + e.what());
    }
    c.validate();
    return c;
}

std::vector<std::pair<std::string, std::vector<std::size_t>>> parameter_layout(const VaeConfig& c) {
    c.validate();
    using Shape = std::vector<std::size_t>;
    auto u = [](int v) { return static_cast<std::size_t>(v); };
    std::vector<std::pair<std::string, Shape>> out;
    for (std::size_t i = 0; i < c.encoder_channels.size(); ++i) {
        const std::size_t cin = i == 0 ? 1 : u(c.encoder_channels[i - 1]);
        const std::size_t cout = u(c.encoder_channels[i]);
        const std::string p = "enc" + std::to_string(i) + ".";
        out.emplace_back(p + "conv1.weight", Shape{cout, cin, 3, 3});
        out.emplace_back(p + "conv1.bias", Shape{cout});
        out.emplace_back(p + "conv2.weight", Shape{cout, cout, 3, 3});
        out.emplace_back(p + "conv2.bias", Shape{cout});
        out.emplace_back(p + "skip.weight", Shape{cout, cin, 1, 1});
        out.emplace_back(p + "skip.bias", Shape{cout});
    }
    const std::size_t flat = flat_size(c), J = u(c.latent), hidden = u(c.decoder_hidden);
    out.emplace_back("head.mu.weight", Shape{J, flat});
    out.emplace_back("head.mu.bias", Shape{J});
    out.emplace_back("head.logvar.weight", Shape{J, flat});
    out.emplace_back("head.logvar.bias", Shape{J});
    out.emplace_back("dec.fc1.weight", Shape{hidden, J});
    out.emplace_back("dec.fc1.bias", Shape{hidden});
    out.emplace_back("dec.fc2.weight", Shape{flat, hidden});
    out.emplace_back("dec.fc2.bias", Shape{flat});
    const auto ch = deconv_channels(c);
    for (std::size_t i = 0; i + 1 < ch.size(); ++i) {
        const std::string p = "dec.deconv" + std::to_string(i) + ".";
        out.emplace_back(p + "weight", Shape{u(ch[i]), u(ch[i + 1]), 3, 3});
        out.emplace_back(p + "bias", Shape{u(ch[i + 1])});
    }
    return out;
}

VaeModel VaeModel::create(const VaeConfig& config, std::uint64_t seed) {
    VaeModel m;
    m.config_ = config;
    const auto layout = parameter_layout(config);
    const CounterRng root(seed);
    for (std::size_t p = 0; p < layout.size(); ++p) {
        const auto& [name, shape] = layout[p];
        Tensor t(shape);
        const bool is_weight = name.ends_with("weight");
        if (is_weight) {
            const double bound = fan_in_bound(shape, name.starts_with("dec.deconv"));
            CounterRng rng = root.split(p);
            for (double& v : t.data()) v = rng.uniform(-bound, bound);
        }
        m.params_.push_back({name, std::move(t)});
    }
    return m;
}

VaeModel VaeModel::from_parameters(const VaeConfig& config, std::vector<NamedTensor> params) {
    const auto layout = parameter_layout(config);
    if (params.size() != layout.size()) throw std::invalid_argument("vae: parameter count mismatch");
    for (std::size_t i = 0; i < layout.size(); ++i) {
        if (params[i].name != layout[i].first || params[i].value.shape() != layout[i].second)
            throw std::invalid_argument("vae: parameter '" + params[i].name + "' does not match layout entry '" +
                                        layout[i].first + "' " + shape_string(layout[i].second));
    }
    VaeModel m;
    m.config_ = config;
    m.params_ = std::move(params);
    return m;
}

std::size_t VaeModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
}

std::size_t VaeModel::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < params_.size(); ++i)
        if (params_[i].name == name) return i;
    throw std::out_of_range("vae: no parameter named '" + name + "'");
}

LatentCode encode(const VaeModel& model, const Tensor& x) {
    Trace t;
    run_encoder(model, x, t);
    return std::move(t.code);
}

std::vector<double> reparameterize(const LatentCode& code, std::span<const double> noise) {
    if (noise.size() != code.mu.size() || code.logvar.size() != code.mu.size())
        throw std::invalid_argument("reparameterize: size mismatch");
    std::vector<double> z(code.mu.size());
    for (std::size_t j = 0; j < z.size(); ++j) z[j] = code.mu[j] + std::exp(0.5 * code.logvar[j]) * noise[j];
    return z;
}

Tensor decode(const VaeModel& model, std::span<const double> z) {
    Trace t;
    run_decoder(model, z, t);
    return std::move(t.recon);
}

Tensor reconstruct(const VaeModel& model, const Tensor& x) {
    const LatentCode code = encode(model, x);
    return decode(model, code.mu);
}

double kl_divergence(std::span<const double> mu, std::span<const double> logvar) {
    if (mu.size() != logvar.size()) throw std::invalid_argument("kl: size mismatch");
    double kl = 0.0;
    for (std::size_t j = 0; j < mu.size(); ++j)
        kl += mu[j] * mu[j] + std::expm1(logvar[j]) - logvar[j];
    return 0.5 * kl;
}

LossTerms vae_loss(const Tensor& target, const Tensor& recon, const LatentCode& code, double beta,
                   std::span<const std::uint8_t> mask) {
    return loss_and_seed_gradient(target, recon, code, beta, mask, nullptr);
}

Gradients zero_gradients(const VaeModel& model) {
    Gradients g;
    g.reserve(model.parameters().size());
    for (const auto& p : model.parameters()) g.emplace_back(p.value.shape());
    return g;
}

LossTerms evaluate_loss(const VaeModel& model, const Tensor& x, const Tensor& target,
                        std::span<const std::uint8_t> mask, std::span<const double> noise) {
    Trace t;
    run_encoder(model, x, t);
    t.code.z = reparameterize(t.code, noise);
    run_decoder(model, t.code.z, t);
    return vae_loss(target, t.recon, t.code, model.config().beta, mask);
}

LossTerms accumulate_gradients(const VaeModel& model, const Tensor& x, const Tensor& target,
                               std::span<const std::uint8_t> mask, std::span<const double> noise,
                               Gradients& grads, Tensor* grad_input) {
    const VaeConfig& c = model.config();
    const Layout L = layout_of(c);
    if (grads.size() != model.parameters().size())
        throw std::invalid_argument("accumulate_gradients: gradient table mismatch");

    Trace t;
    run_encoder(model, x, t);
    t.code.z = reparameterize(t.code, noise);
    run_decoder(model, t.code.z, t);

    Tensor g;
    const LossTerms loss = loss_and_seed_gradient(target, t.recon, t.code, c.beta, mask, &g);

    // Decoder, last layer first.
    for (std::size_t k = L.blocks; k-- > 0;) {
        g = k + 1 < L.blocks ? relu_backward(t.deconv_pre[k], g) : sigmoid_backward(t.recon, g);
        Tensor gin;
        conv_transpose2d_backward(t.deconv_in[k], model.param(L.deconv_w(k)), kStride, kPadding, g, &gin,
                                  grads[L.deconv_w(k)], grads[L.deconv_b(k)]);
        g = std::move(gin);
    }
    g = relu_backward(t.d2, g.reshaped({t.d2.size()}));
    Tensor g_r1;
    linear_backward(t.r1, model.param(L.fc2_w()), g, &g_r1, grads[L.fc2_w()], grads[L.fc2_b()]);
    g = relu_backward(t.d1, g_r1);
    Tensor g_z;
    linear_backward(t.z, model.param(L.fc1_w()), g, &g_z, grads[L.fc1_w()], grads[L.fc1_b()]);

    // Through the reparameterization and the KL term.
    const std::size_t J = t.code.mu.size();
    Tensor g_mu({J}), g_lv({J});
    for (std::size_t j = 0; j < J; ++j) {
        const double sigma = std::exp(0.5 * t.code.logvar[j]);
        g_mu[j] = g_z[j] + c.beta * t.code.mu[j];
        g_lv[j] = g_z[j] * 0.5 * sigma * noise[j] + c.beta * 0.5 * std::expm1(t.code.logvar[j]);
    }
    Tensor g_flat, g_flat_lv;
    linear_backward(t.flat, model.param(L.mu_w()), g_mu, &g_flat, grads[L.mu_w()], grads[L.mu_b()]);
    linear_backward(t.flat, model.param(L.lv_w()), g_lv, &g_flat_lv, grads[L.lv_w()], grads[L.lv_b()]);
    g_flat += g_flat_lv;

    // Encoder, last block first.
    const BlockTrace& lastb = t.blocks.back();
    g = std::move(g_flat).reshaped(lastb.sum.shape());
    for (std::size_t i = L.blocks; i-- > 0;) {
        const BlockTrace& b = t.blocks[i];
        const Tensor g_sum = elu_backward(b.sum, g);
        Tensor g_h1, g_in_main, g_in_skip;
        conv2d_backward(b.h1, model.param(L.conv2_w(i)), 1, kPadding, g_sum, &g_h1, grads[L.conv2_w(i)],
                        grads[L.conv2_b(i)]);
        const bool need_input = i > 0 || grad_input != nullptr;
        conv2d_backward(b.input, model.param(L.skip_w(i)), kStride, 0, g_sum, need_input ? &g_in_skip : nullptr,
                        grads[L.skip_w(i)], grads[L.skip_b(i)]);
        const Tensor g_a1 = elu_backward(b.a1, g_h1);
        conv2d_backward(b.input, model.param(L.conv1_w(i)), kStride, kPadding, g_a1,
                        need_input ? &g_in_main : nullptr, grads[L.conv1_w(i)], grads[L.conv1_b(i)]);
        if (!need_input) break;
        g_in_main += g_in_skip;
        g = std::move(g_in_main);
    }
    if (grad_input) *grad_input = std::move(g);
    return loss;
}

Tensor normalize_image(const DepthImage& image, double max_range) {
    Tensor t({1, static_cast<std::size_t>(image.height()), static_cast<std::size_t>(image.width())});
    for (std::size_t i = 0; i < image.size(); ++i) t[i] = image[i] == kInvalid ? 0.0 : image[i] / max_range;
    return t;
}

DepthImage denormalize_image(const Tensor& image, double max_range) {
    if (image.rank() != 3 || image.dim(0) != 1) throw std::invalid_argument("denormalize: expected (1, H, W)");
    DepthImage out(static_cast<int>(image.dim(2)), static_cast<int>(image.dim(1)), max_range);
    for (std::size_t i = 0; i < image.size(); ++i) out[i] = image[i] * max_range;
    return out;
}

}  // namespace collenc::nn
