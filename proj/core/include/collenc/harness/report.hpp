#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "collenc/harness/evaluate.hpp"

namespace collenc::harness {

/// One reference/reconstruction pair rendered as a side-by-side PGM:
/// reference | reconstruction | |reference - reconstruction|.
struct Panel {
    std::string name;
    DepthImage reference;
    DepthImage reconstruction;
};

/// |a - b| on pixels valid in both, scaled so the largest error maps to 255.
/// `scale` receives that largest error (0 for identical images, which give
/// an all-black panel).
std::vector<std::uint8_t> error_panel(const DepthImage& a, const DepthImage& b, double& scale);

/// Writes <table.name>.csv per table, <panel.name>.pgm per panel and
/// panels.json with each panel's error normalization constant. Returns the
/// written paths in a fixed order.
std::vector<std::filesystem::path> emit_report(std::span<const MetricsTable> tables, std::span<const Panel> panels,
                                               const std::filesystem::path& out_dir);

}  // namespace collenc::harness
