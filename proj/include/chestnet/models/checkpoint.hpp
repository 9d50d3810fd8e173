#pragma once

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "chestnet/models/model.hpp"

namespace chestnet::models {

// Binary checkpoint layout (all integers unsigned 32-bit little-endian,
// parameter payloads raw little-endian 32-bit floats):
//
//   "CXRC" | version | json_len json | param_count
//   then per parameter: name_len name | rank | dims... | payload
//
// The JSON block is the ModelSpec descriptor plus a "meta" object with
// epochs completed, seed, and final train loss.

inline constexpr char kCheckpointMagic[4] = {'C', 'X', 'R', 'C'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
    std::uint32_t epochs = 0;
    std::uint64_t seed = 0;
    double final_train_loss = 0.0;
};

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                                static_cast<unsigned char>((v >> 8) & 0xFF),
                                static_cast<unsigned char>((v >> 16) & 0xFF),
                                static_cast<unsigned char>((v >> 24) & 0xFF)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw CheckpointError(CheckpointError::Kind::truncated, "checkpoint truncated");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void put_f32_payload(std::ostream& os, const float* data, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint32_t bits = std::bit_cast<std::uint32_t>(data[i]);
        put_u32(os, bits);
    }
}

inline void get_f32_payload(std::istream& is, float* data, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) data[i] = std::bit_cast<float>(get_u32(is));
}

} // namespace detail

inline void save_checkpoint(Model<float>& model, const CheckpointMeta& meta,
                            const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw CheckpointError(CheckpointError::Kind::open_failed,
                              "cannot open " + path.string() + " for writing");

    nlohmann::json descriptor = model.spec();
    descriptor["meta"] = {{"epochs", meta.epochs},
                          {"seed", meta.seed},
                          {"final_train_loss", meta.final_train_loss}};
    const std::string json = descriptor.dump();

    os.write(kCheckpointMagic, 4);
    detail::put_u32(os, kCheckpointVersion);
    detail::put_u32(os, static_cast<std::uint32_t>(json.size()));
    os.write(json.data(), static_cast<std::streamsize>(json.size()));

    auto params = model.params();
    detail::put_u32(os, static_cast<std::uint32_t>(params.size()));
    for (const auto& p : params) {
        detail::put_u32(os, static_cast<std::uint32_t>(p.name.size()));
        os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
        detail::put_u32(os, static_cast<std::uint32_t>(p.value->rank()));
        for (std::size_t d = 0; d < p.value->rank(); ++d)
            detail::put_u32(os, static_cast<std::uint32_t>(p.value->dim(d)));
        detail::put_f32_payload(os, p.value->data(), p.value->size());
    }
    if (!os)
        throw CheckpointError(CheckpointError::Kind::open_failed,
                              "write failed for " + path.string());
}

struct LoadedCheckpoint {
    ModelSpec spec;
    CheckpointMeta meta;
    Model<float> model;
};

inline LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw CheckpointError(CheckpointError::Kind::open_failed,
                              "cannot open " + path.string());

    char magic[4];
    if (!is.read(magic, 4))
        throw CheckpointError(CheckpointError::Kind::truncated, "checkpoint truncated");
    if (std::memcmp(magic, kCheckpointMagic, 4) != 0)
        throw CheckpointError(CheckpointError::Kind::bad_magic,
                              path.string() + " is not a checkpoint (bad magic)");
    const std::uint32_t version = detail::get_u32(is);
    if (version != kCheckpointVersion)
        throw CheckpointError(CheckpointError::Kind::bad_version,
                              "unsupported checkpoint version " + std::to_string(version));

    const std::uint32_t json_len = detail::get_u32(is);
    std::string json(json_len, '\0');
    if (!is.read(json.data(), json_len))
        throw CheckpointError(CheckpointError::Kind::truncated, "checkpoint truncated");

    LoadedCheckpoint out;
    nlohmann::json descriptor;
    try {
        descriptor = nlohmann::json::parse(json);
        out.spec = descriptor.get<ModelSpec>();
        if (descriptor.contains("meta")) {
            const auto& m = descriptor.at("meta");
            out.meta.epochs = m.value("epochs", 0u);
            out.meta.seed = m.value("seed", std::uint64_t{0});
            out.meta.final_train_loss = m.value("final_train_loss", 0.0);
        }
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(CheckpointError::Kind::malformed,
                              std::string("bad checkpoint descriptor: ") + e.what());
    }

    out.model = Model<float>::build(out.spec, 0);
    auto params = out.model.params();

    const std::uint32_t count = detail::get_u32(is);
    if (count != params.size())
        throw CheckpointError(CheckpointError::Kind::shape_mismatch,
                              "checkpoint has " + std::to_string(count) + " parameters, spec needs " +
                                  std::to_string(params.size()));
    for (auto& p : params) {
        const std::uint32_t name_len = detail::get_u32(is);
        std::string name(name_len, '\0');
        if (!is.read(name.data(), name_len))
            throw CheckpointError(CheckpointError::Kind::truncated, "checkpoint truncated");
        if (name != p.name)
            throw CheckpointError(CheckpointError::Kind::shape_mismatch,
                                  "parameter order mismatch: expected " + p.name + ", found " + name);
        const std::uint32_t rank = detail::get_u32(is);
        if (rank != p.value->rank())
            throw CheckpointError(CheckpointError::Kind::shape_mismatch,
                                  "rank mismatch for " + name);
        for (std::uint32_t d = 0; d < rank; ++d)
            if (detail::get_u32(is) != p.value->dim(d))
                throw CheckpointError(CheckpointError::Kind::shape_mismatch,
                                      "dimension mismatch for " + name);
        detail::get_f32_payload(is, p.value->data(), p.value->size());
    }
    is.peek();
    if (!is.eof())
        throw CheckpointError(CheckpointError::Kind::malformed,
                              "trailing bytes after the last parameter");
    return out;
}

// Loads a checkpoint that must structurally match `expected` (same builder,
// same shapes); used when the user names both --model and --ckpt.
inline LoadedCheckpoint load_checkpoint_for(const ModelSpec& expected,
                                            const std::filesystem::path& path) {
    LoadedCheckpoint loaded = load_checkpoint(path);
    if (!structurally_equal(loaded.spec, expected))
        throw CheckpointError(CheckpointError::Kind::spec_mismatch,
                              "checkpoint holds model '" + loaded.spec.name +
                                  "' which does not match the requested '" + expected.name + "'");
    return loaded;
}

} // namespace chestnet::models
