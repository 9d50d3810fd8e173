// Writes a small synthetic 4-class corpus of geometric patterns, handy for
// trying the pipeline without a real dataset:
//
//   make_toy_corpus <out-dir> [images-per-class] [side-px] [seed]

#include <cstdlib>
#include <iostream>

#include "chestnet/data/synthetic.hpp"

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: make_toy_corpus <out-dir> [images-per-class] [side-px] [seed]\n";
        return 1;
    }
    const std::size_t per_class = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 8;
    const std::size_t side = argc > 3 ? std::strtoul(argv[3], nullptr, 10) : 64;
    const std::uint64_t seed = argc > 4 ? std::strtoull(argv[4], nullptr, 10) : 1;
    try {
        chestnet::data::write_toy_corpus(argv[1], per_class, side, seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    std::cout << "wrote " << 4 * per_class << " images under " << argv[1] << "\n";
    return 0;
}
