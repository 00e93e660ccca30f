// collenc: dataset generation, collision images, codecs, training and
// evaluation from the command line.

#include <filesystem>
#include <fstream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "collenc/codecs.hpp"
#include "collenc/collision.hpp"
#include "collenc/harness/dataset.hpp"
#include "collenc/harness/evaluate.hpp"
#include "collenc/harness/report.hpp"
#include "collenc/image_io.hpp"
#include "collenc/nn/checkpoint.hpp"
#include "collenc/nn/train.hpp"

namespace fs = std::filesystem;
using namespace collenc;

namespace {

struct Globals {
    std::string config_path;
    std::string out;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    bool verbose = false;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string config_text(const Globals& g) { return g.config_path.empty() ? "{}" : read_file(g.config_path); }

void require_out(const Globals& g, const char* what) {
    if (g.out.empty()) throw CLI::ValidationError("--out", std::string("required for ") + what);
}

void create_parent(const std::string& file) {
    const auto parent = std::filesystem::path(file).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
}

std::vector<std::size_t> default_codec_budgets() { return {32, 64, 128, 256}; }

harness::ModelSet load_models(const fs::path& dir, harness::ModelMode mode) {
    harness::ModelSet out;
    const std::regex pattern(std::string(harness::to_string(mode)) + R"(_J(\d+)\.ckpt)");
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::smatch m;
        const std::string name = entry.path().filename().string();
        if (!std::regex_match(name, m, pattern)) continue;
        nn::VaeModel model = nn::load_checkpoint(entry.path());
        out.emplace(static_cast<std::size_t>(model.config().latent), std::move(model));
    }
    return out;
}

// ---- gen-dataset ----------------------------------------------------------

struct GenOptions {
    std::optional<std::size_t> train, test;
    std::optional<double> robot_r;
};

void run_gen_dataset(const Globals& g, const GenOptions& o) {
    require_out(g, "gen-dataset");
    harness::DatasetConfig c = harness::dataset_config_from_json(config_text(g));
    if (g.seed) c.seed = *g.seed;
    if (o.train) c.train_count = *o.train;
    if (o.test) c.test_count = *o.test;
    if (o.robot_r) c.collision = CollisionParams::for_robot(*o.robot_r);
    c.threads = g.threads;
    spdlog::info("generating {} train + {} test pairs at {}x{} into {}", c.train_count, c.test_count, c.width,
                 c.height, g.out);
    const auto m = harness::build_dataset(c, g.out);
    spdlog::info("wrote {} pairs, config hash {}", m.entries.size(), m.config_hash);
}

// ---- collide --------------------------------------------------------------

struct CollideOptions {
    std::string input;
    double robot_r = 0.25;
    std::optional<double> edge_threshold;
    double edge_fraction = 1.0;
    std::string preview;
};

void run_collide(const Globals& g, const CollideOptions& o) {
    require_out(g, "collide");
    const DepthImage depth = load_image<DepthTag>(o.input);
    CollisionParams p = CollisionParams::for_robot(o.robot_r);
    if (o.edge_threshold) p.edge_threshold = *o.edge_threshold;
    p.edge_fraction = o.edge_fraction;
    if (g.seed) p.seed = *g.seed;
    const CameraIntrinsics K = CameraIntrinsics::desk_default(depth.width(), depth.height());
    const CollisionImage coll = collision_image(depth, K, p, g.threads);
    create_parent(g.out);
    save_image(g.out, coll);
    if (!o.preview.empty()) save_preview(o.preview, coll);
    spdlog::info("collision image ({}x{}, r = {}) written to {}", depth.width(), depth.height(), p.r, g.out);
}

// ---- compress -------------------------------------------------------------

struct CompressOptions {
    std::string input;
    std::string codec = "wavelet";
    std::size_t budget = 32;
    std::string code;
};

void run_compress(const Globals& g, const CompressOptions& o) {
    require_out(g, "compress");
    const DepthImage depth = load_image<DepthTag>(o.input);
    const Plane in(depth);
    Plane out;
    if (o.codec == "fft") {
        const auto code = fft_compress(in, o.budget);
        if (!o.code.empty()) save_sparse(o.code, code);
        out = fft_decompress(code);
    } else {
        const auto code = wavelet_compress(in, o.budget);
        if (!o.code.empty()) save_sparse(o.code, code);
        out = wavelet_decompress(code);
    }
    create_parent(g.out);
    save_pfm(g.out, out.values, out.width, out.height);
    const MseResult mse = masked_mse(in.values, out.values, validity_mask(depth));
    spdlog::info("{} budget {}: masked MSE {:.6g} m^2 over {} pixels", o.codec, o.budget, mse.value, mse.covered);
}

// ---- train ----------------------------------------------------------------

struct TrainOptions {
    std::string dataset;
    std::string mode = "collnet";
    std::optional<int> latent;
    std::optional<double> beta;
    std::optional<std::size_t> steps;
    std::optional<std::size_t> batch;
    std::optional<double> lr;
    std::string curve;
};

void run_train(const Globals& g, const TrainOptions& o) {
    require_out(g, "train");
    const auto manifest = harness::DatasetManifest::load(fs::path(o.dataset) / harness::kManifestName);
    const auto mode = harness::parse_mode(o.mode);

    nn::VaeConfig vc;
    vc.height = manifest.intrinsics.height;
    vc.width = manifest.intrinsics.width;
    vc.max_range = manifest.max_range;
    nn::TrainConfig tc;
    tc.batch_size = 32;
    const auto j = nlohmann::json::parse(config_text(g));
    if (j.contains("training")) {
        const auto& t = j.at("training");
        tc.steps = t.value("steps", tc.steps);
        tc.batch_size = t.value("batch_size", tc.batch_size);
        tc.lr = t.value("lr", tc.lr);
        tc.lr_final_fraction = t.value("lr_final_fraction", tc.lr_final_fraction);
        vc.latent = t.value("latent", vc.latent);
        vc.beta = t.value("beta", vc.beta);
    }
    if (o.latent) vc.latent = *o.latent;
    if (o.beta) vc.beta = *o.beta;
    if (o.steps) tc.steps = *o.steps;
    if (o.batch) tc.batch_size = *o.batch;
    if (o.lr) tc.lr = *o.lr;
    tc.seed = g.seed.value_or(0);
    tc.threads = g.threads;
    if (g.verbose)
        tc.on_epoch = [](const nn::EpochLoss& e) {
            spdlog::info("epoch {:4d}  total {:.6g}  recon {:.6g}  kl {:.6g}", e.epoch, e.total, e.recon, e.kl);
        };

    const auto pairs = harness::load_split(manifest, "train");
    const auto samples = harness::make_samples(pairs, mode, manifest.max_range);
    auto model = nn::VaeModel::create(vc, tc.seed);
    spdlog::info("training {} (J = {}, beta = {}) on {} pairs for {} steps, {} parameters", o.mode, vc.latent, vc.beta,
                 samples.size(), tc.steps, model.parameter_count());
    const auto result = nn::train(model, samples, tc);
    create_parent(g.out);
    nn::save_checkpoint(model, g.out);
    if (!o.curve.empty()) {
        std::ofstream out(o.curve, std::ios::binary);
        out << "epoch,total,recon,kl\n";
        out.precision(17);
        for (const auto& e : result.curve) out << e.epoch << ',' << e.total << ',' << e.recon << ',' << e.kl << '\n';
    }
    spdlog::info("final epoch recon {:.6g}; checkpoint written to {}", result.curve.back().recon, g.out);
}

// ---- eval / report --------------------------------------------------------

struct EvalOptions {
    std::string dataset;
    std::string models;
    std::vector<std::size_t> budgets = default_codec_budgets();
    std::size_t panels = 4;
};

std::vector<harness::MetricsTable> evaluate_all(const Globals& g, const EvalOptions& o,
                                                const harness::DatasetManifest& manifest,
                                                const std::vector<harness::LoadedPair>& test,
                                                harness::ModelSet& vanilla, harness::ModelSet& collnet) {
    if (!o.models.empty()) {
        vanilla = load_models(o.models, harness::ModelMode::Vanilla);
        collnet = load_models(o.models, harness::ModelMode::CollNet);
    }
    std::vector<harness::MetricsTable> tables;
    tables.push_back(harness::evaluate_codecs(test, o.budgets, vanilla.empty() ? nullptr : &vanilla,
                                              manifest.max_range, g.threads));
    if (!vanilla.empty() && !collnet.empty())
        tables.push_back(harness::evaluate_collision(test, collnet, vanilla, manifest.intrinsics, manifest.collision,
                                                     manifest.max_range, g.threads));
    else
        spdlog::warn("collision table skipped: needs both vanilla_J*.ckpt and collnet_J*.ckpt in --models");
    return tables;
}

void run_eval(const Globals& g, const EvalOptions& o, bool with_panels) {
    require_out(g, with_panels ? "report" : "eval");
    const auto manifest = harness::DatasetManifest::load(fs::path(o.dataset) / harness::kManifestName);
    const auto test = harness::load_split(manifest, "test");
    harness::ModelSet vanilla, collnet;
    const auto tables = evaluate_all(g, o, manifest, test, vanilla, collnet);

    std::vector<harness::Panel> panels;
    if (with_panels) {
        const std::size_t count = std::min(o.panels, test.size());
        for (std::size_t i = 0; i < count; ++i) {
            const auto& p = test[i];
            const std::string id = std::to_string(i);
            for (const auto& [budget, m] : vanilla) {
                const auto recon = harness::reconstruct_depth(m, p.depth);
                panels.push_back({"test" + id + "_vanilla_J" + std::to_string(budget), p.depth, recon});
                panels.push_back({"test" + id + "_vanilla_p_J" + std::to_string(budget), p.collision,
                                  harness::derived_collision(recon, manifest.intrinsics, manifest.collision)});
            }
            for (const auto& [budget, m] : collnet)
                panels.push_back({"test" + id + "_collnet_J" + std::to_string(budget), p.collision,
                                  harness::reconstruct_depth(m, p.depth)});
        }
    }
    const auto files = harness::emit_report(tables, panels, g.out);
    for (const auto& t : tables) std::fputs(t.to_csv().c_str(), stdout);
    spdlog::info("wrote {} files to {}", files.size(), g.out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Collision-aware depth image compression toolkit"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    app.add_option("--out", g.out, "Output file or directory");
    app.add_option("--seed", g.seed, "Seed overriding the configuration");
    app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");
    app.add_flag("-v,--verbose", g.verbose, "Per-epoch training log");

    GenOptions gen;
    auto* gen_cmd = app.add_subcommand("gen-dataset", "Render scenes and collision images into a dataset");
    gen_cmd->add_option("--train", gen.train, "Training pairs");
    gen_cmd->add_option("--test", gen.test, "Test pairs");
    gen_cmd->add_option("--robot-r", gen.robot_r, "Robot half edge in meters");

    CollideOptions col;
    auto* col_cmd = app.add_subcommand("collide", "Collision image of a depth PFM");
    col_cmd->add_option("--input", col.input, "Depth image (PFM)")->required()->check(CLI::ExistingFile);
    col_cmd->add_option("--robot-r", col.robot_r, "Robot half edge in meters");
    col_cmd->add_option("--edge-threshold", col.edge_threshold, "Depth jump marking an edge (default max(0.1, r/2))");
    col_cmd->add_option("--edge-fraction", col.edge_fraction, "Share of edge pixels inflated")
        ->check(CLI::Range(0.0, 1.0));
    col_cmd->add_option("--preview", col.preview, "Optional 8-bit PGM preview");

    CompressOptions cmp;
    auto* cmp_cmd = app.add_subcommand("compress", "Top-n FFT or wavelet round trip of a depth PFM");
    cmp_cmd->add_option("--input", cmp.input, "Depth image (PFM)")->required()->check(CLI::ExistingFile);
    cmp_cmd->add_option("--codec", cmp.codec, "fft or wavelet")->check(CLI::IsMember({"fft", "wavelet"}));
    cmp_cmd->add_option("--budget", cmp.budget, "Retained real values")->check(CLI::PositiveNumber);
    cmp_cmd->add_option("--code", cmp.code, "Optional sparse code output");

    TrainOptions tr;
    auto* tr_cmd = app.add_subcommand("train", "Train a vanilla VAE or CollNet on a dataset's train split");
    tr_cmd->add_option("--dataset", tr.dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    tr_cmd->add_option("--mode", tr.mode, "vanilla or collnet")->check(CLI::IsMember({"vanilla", "collnet"}));
    tr_cmd->add_option("--latent", tr.latent, "Latent size J")->check(CLI::PositiveNumber);
    tr_cmd->add_option("--beta", tr.beta, "KL weight")->check(CLI::NonNegativeNumber);
    tr_cmd->add_option("--steps", tr.steps, "Optimizer steps")->check(CLI::PositiveNumber);
    tr_cmd->add_option("--batch", tr.batch, "Batch size")->check(CLI::PositiveNumber);
    tr_cmd->add_option("--lr", tr.lr, "Initial learning rate")->check(CLI::PositiveNumber);
    tr_cmd->add_option("--curve", tr.curve, "Optional per-epoch loss CSV");

    EvalOptions ev;
    auto* ev_cmd = app.add_subcommand("eval", "Codec and collision metric tables for a dataset's test split");
    auto* rp_cmd = app.add_subcommand("report", "Metric tables plus side-by-side PGM panels");
    for (auto* cmd : {ev_cmd, rp_cmd}) {
        cmd->add_option("--dataset", ev.dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
        cmd->add_option("--models", ev.models, "Directory with <mode>_J<latent>.ckpt files")
            ->check(CLI::ExistingDirectory);
        cmd->add_option("--budgets", ev.budgets, "Codec budgets");
    }
    rp_cmd->add_option("--panels", ev.panels, "Test images rendered as panels");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen_cmd) run_gen_dataset(g, gen);
        else if (*col_cmd) run_collide(g, col);
        else if (*cmp_cmd) run_compress(g, cmp);
        else if (*tr_cmd) run_train(g, tr);
        else if (*ev_cmd) run_eval(g, ev, false);
        else if (*rp_cmd) run_eval(g, ev, true);
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 0;
}
