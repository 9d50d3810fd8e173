#pragma once

#include <filesystem>

#include "chestnet/core/rng.hpp"
#include "chestnet/data/image.hpp"

namespace chestnet::data {

// Writes a tiny 4-class corpus of geometric grayscale patterns (PGM files)
// for smoke tests and demos: filled circles, checkerboards, horizontal and
// vertical stripes, each with per-image phase/size variation.
inline void write_toy_corpus(const std::filesystem::path& root, std::size_t per_class,
                             std::size_t side = 64, std::uint64_t seed = 1) {
    namespace fs = std::filesystem;
    const char* classes[4] = {"checker", "circle", "hstripes", "vstripes"};
    for (const char* cls : classes) fs::create_directories(root / cls);

    for (std::size_t cid = 0; cid < 4; ++cid) {
        for (std::size_t k = 0; k < per_class; ++k) {
            rng::Stream stream(rng::mix(seed, cid, k));
            ImageU8 img;
            img.width = img.height = side;
            img.channels = 1;
            img.pixels.assign(side * side, 0);
            const std::size_t phase = stream.below(8);
            const std::size_t period = 6 + stream.below(4);
            for (std::size_t y = 0; y < side; ++y)
                for (std::size_t x = 0; x < side; ++x) {
                    std::uint8_t v = 0;
                    switch (cid) {
                        case 0: { // checker, mid-dark vs mid-bright cells
                            const bool on = ((x / period) + (y / period)) % 2 == 0;
                            v = on ? 180 : 75;
                            break;
                        }
                        case 1: { // bright disk on dark ground
                            const double cy = static_cast<double>(side) / 2.0 +
                                              static_cast<double>(phase) - 4.0;
                            const double cx = static_cast<double>(side) / 2.0;
                            const double dy = static_cast<double>(y) - cy;
                            const double dx = static_cast<double>(x) - cx;
                            const double r = static_cast<double>(side) / 3.5;
                            v = dy * dy + dx * dx <= r * r ? 230 : 25;
                            break;
                        }
                        case 2: // horizontal stripes
                            v = ((y + phase) / period) % 2 == 0 ? 210 : 10;
                            break;
                        default: // vertical stripes
                            v = ((x + phase) / period) % 2 == 0 ? 140 : 60;
                            break;
                    }
                    img.pixels[y * side + x] = v;
                }
            write_pnm(root / classes[cid] / ("img_" + std::to_string(k) + ".pgm"), img);
        }
    }
}

} // namespace chestnet::data
