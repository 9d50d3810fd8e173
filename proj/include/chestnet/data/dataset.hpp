#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <span>
#include <unordered_map>

#include <json.hpp>

#include "chestnet/core/rng.hpp"
#include "chestnet/data/image.hpp"

namespace chestnet::data {

struct Sample {
    std::string path; // relative to the dataset root
    int class_id = 0;
};

// A class-folder corpus: one subdirectory per class, class ids assigned in
// lexicographic folder order.
struct Dataset {
    std::filesystem::path root;
    std::vector<std::string> class_names;
    std::vector<Sample> samples;
    std::size_t skipped_files = 0; // non-image files found during the scan

    std::size_t class_count() const { return class_names.size(); }

    std::vector<std::size_t> per_class_counts() const {
        std::vector<std::size_t> counts(class_names.size(), 0);
        for (const Sample& s : samples) counts[static_cast<std::size_t>(s.class_id)]++;
        return counts;
    }

    std::filesystem::path sample_path(std::size_t id) const {
        return root / samples[id].path;
    }
};

inline Dataset scan_dataset(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root))
        throw DataError("dataset root " + root.string() + " is not a directory");

    Dataset ds;
    ds.root = root;
    std::vector<std::string> dirs;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory()) dirs.push_back(entry.path().filename().string());
    std::sort(dirs.begin(), dirs.end());
    if (dirs.size() < 2)
        throw DataError("dataset root " + root.string() + " needs at least 2 class folders, found " +
                        std::to_string(dirs.size()));

    for (std::size_t cid = 0; cid < dirs.size(); ++cid) {
        std::vector<std::string> files;
        for (const auto& entry : fs::directory_iterator(root / dirs[cid])) {
            if (!entry.is_regular_file()) continue;
            if (looks_like_image(entry.path()))
                files.push_back(entry.path().filename().string());
            else
                ds.skipped_files++;
        }
        std::sort(files.begin(), files.end());
        if (files.empty())
            throw DataError("class folder " + dirs[cid] + " has no decodable images");
        for (const std::string& f : files)
            ds.samples.push_back({dirs[cid] + "/" + f, static_cast<int>(cid)});
        ds.class_names.push_back(dirs[cid]);
    }
    return ds;
}

// Stratified train/test partition: per class, indices are shuffled with a
// generator seeded by (seed, class id) and the first floor(ratio * n) go to
// the train side. Ids are sorted within each side for stable manifests.
struct SplitManifest {
    std::uint64_t seed = 0;
    double ratio = 0.8;
    std::vector<std::string> class_names;
    std::vector<std::uint32_t> train_ids;
    std::vector<std::uint32_t> test_ids;
};

inline SplitManifest split(const Dataset& ds, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0))
        throw ValueError("split ratio must be in (0,1), got " + std::to_string(ratio));

    SplitManifest m;
    m.seed = seed;
    m.ratio = ratio;
    m.class_names = ds.class_names;

    for (std::size_t cid = 0; cid < ds.class_count(); ++cid) {
        std::vector<std::uint32_t> ids;
        for (std::size_t i = 0; i < ds.samples.size(); ++i)
            if (ds.samples[i].class_id == static_cast<int>(cid))
                ids.push_back(static_cast<std::uint32_t>(i));
        // nudge past binary representation error in decimal ratios
        const auto train_n =
            static_cast<std::size_t>(std::floor(ratio * static_cast<double>(ids.size()) + 1e-9));
        if (train_n == 0 || train_n == ids.size())
            throw DataError("class " + ds.class_names[cid] + " with " +
                            std::to_string(ids.size()) +
                            " samples would leave an empty split side at ratio " +
                            std::to_string(ratio));
        rng::Stream stream(rng::mix(seed, cid));
        stream.shuffle(ids);
        m.train_ids.insert(m.train_ids.end(), ids.begin(), ids.begin() + train_n);
        m.test_ids.insert(m.test_ids.end(), ids.begin() + train_n, ids.end());
    }
    std::sort(m.train_ids.begin(), m.train_ids.end());
    std::sort(m.test_ids.begin(), m.test_ids.end());
    return m;
}

inline void save_manifest(const SplitManifest& m, const Dataset& ds,
                          const std::filesystem::path& path) {
    nlohmann::json j;
    j["seed"] = m.seed;
    j["ratio"] = m.ratio;
    j["classes"] = m.class_names;
    auto paths_of = [&ds](const std::vector<std::uint32_t>& ids) {
        std::vector<std::string> out;
        out.reserve(ids.size());
        for (std::uint32_t id : ids) out.push_back(ds.samples[id].path);
        return out;
    };
    j["train"] = paths_of(m.train_ids);
    j["test"] = paths_of(m.test_ids);
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("cannot write manifest " + path.string());
    os << j.dump(2) << "\n";
}

inline SplitManifest load_manifest(const std::filesystem::path& path, const Dataset& ds) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open manifest " + path.string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed manifest " + path.string() + ": " + e.what());
    }

    SplitManifest m;
    try {
        m.seed = j.at("seed").get<std::uint64_t>();
        m.ratio = j.at("ratio").get<double>();
        m.class_names = j.at("classes").get<std::vector<std::string>>();

        std::unordered_map<std::string, std::uint32_t> by_path;
        for (std::size_t i = 0; i < ds.samples.size(); ++i)
            by_path[ds.samples[i].path] = static_cast<std::uint32_t>(i);
        auto resolve = [&](const char* key) {
            std::vector<std::uint32_t> ids;
            for (const auto& p : j.at(key).get<std::vector<std::string>>()) {
                auto it = by_path.find(p);
                if (it == by_path.end())
                    throw DataError("manifest entry '" + p + "' not found in dataset at " +
                                    ds.root.string());
                ids.push_back(it->second);
            }
            return ids;
        };
        m.train_ids = resolve("train");
        m.test_ids = resolve("test");
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed manifest " + path.string() + ": " + e.what());
    }
    if (m.class_names != ds.class_names)
        throw DataError("manifest classes do not match the dataset at " + ds.root.string());
    return m;
}

// Deterministic batch order for one epoch: shuffled by (seed, epoch), split
// into `batch`-sized runs, last partial batch kept.
inline std::vector<std::vector<std::uint32_t>> batch_plan(std::span<const std::uint32_t> side_ids,
                                                          std::size_t batch, std::uint64_t seed,
                                                          std::uint64_t epoch, bool shuffle) {
    if (batch == 0) throw ValueError("batch size must be >= 1");
    if (side_ids.empty()) throw DataError("batch_plan: empty sample side");
    std::vector<std::uint32_t> order(side_ids.begin(), side_ids.end());
    if (shuffle) {
        rng::Stream stream(rng::mix(seed, rng::label("shuffle"), epoch));
        stream.shuffle(order);
    }
    std::vector<std::vector<std::uint32_t>> plan;
    for (std::size_t i = 0; i < order.size(); i += batch) {
        const std::size_t hi = std::min(order.size(), i + batch);
        plan.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                          order.begin() + static_cast<std::ptrdiff_t>(hi));
    }
    return plan;
}

} // namespace chestnet::data
