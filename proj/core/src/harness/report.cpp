#include "collenc/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "collenc/image_io.hpp"

namespace collenc::harness {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

std::vector<std::uint8_t> error_panel(const DepthImage& a, const DepthImage& b, double& scale) {
    if (a.width() != b.width() || a.height() != b.height()) throw std::invalid_argument("error_panel: size mismatch");
    std::vector<double> err(a.size(), 0.0);
    scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == kInvalid || b[i] == kInvalid) continue;
        err[i] = std::abs(a[i] - b[i]);
        scale = std::max(scale, err[i]);
    }
    std::vector<std::uint8_t> out(a.size(), 0);
    if (scale > 0.0)
        for (std::size_t i = 0; i < a.size(); ++i) out[i] = quantize_preview(err[i], scale);
    return out;
}

std::vector<std::filesystem::path> emit_report(std::span<const MetricsTable> tables, std::span<const Panel> panels,
                                               const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;
    for (const auto& t : tables) {
        const auto path = out_dir / (t.name + ".csv");
        write_text(path, t.to_csv());
        written.push_back(path);
    }

    nlohmann::json sidecar = nlohmann::json::array();
    for (const auto& p : panels) {
        const int w = p.reference.width(), h = p.reference.height();
        double scale = 0.0;
        const auto err = error_panel(p.reference, p.reconstruction, scale);
        const auto ref = to_preview(p.reference.values(), p.reference.max_range());
        const auto rec = to_preview(p.reconstruction.values(), p.reference.max_range());
        std::vector<std::uint8_t> strip(static_cast<std::size_t>(3 * w) * h);
        for (int v = 0; v < h; ++v) {
            for (int u = 0; u < w; ++u) {
                const std::size_t src = static_cast<std::size_t>(v) * w + u;
                const std::size_t row = static_cast<std::size_t>(v) * 3 * w;
                strip[row + u] = ref[src];
                strip[row + w + u] = rec[src];
                strip[row + 2 * w + u] = err[src];
            }
        }
        const auto path = out_dir / (p.name + ".pgm");
        save_pgm(path, strip, 3 * w, h);
        written.push_back(path);
        sidecar.push_back({{"name", p.name},
                           {"file", p.name + ".pgm"},
                           {"max_range", p.reference.max_range()},
                           {"error_scale", scale}});
    }
    if (!panels.empty()) {
        const auto path = out_dir / "panels.json";
        write_text(path, sidecar.dump(2) + "\n");
        written.push_back(path);
    }
    return written;
}

}  // namespace collenc::harness
