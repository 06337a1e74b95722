// Copyright (c) 2026 CSRIP Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <json.hpp>

#include <fcntl.h>
#include <unistd.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "csrip/data/dataset.hpp"

namespace csrip {

// Prepared-data cache: one directory per split of quadruplet seed files plus
// an index recording the degradation parameters, split seed and content hash.
// Each .quad file stores the 8-bit HR raster; the degraded members regenerate
// bit-exactly on load, so the round trip is lossless by construction.

inline constexpr char kQuadMagic[8] = {'C', 'S', 'R', 'Q', 'U', 'A', 'D', '1'};

/// Exclusive advisory lock held while the cache directory is written.
class CacheLock {
public:
    explicit CacheLock(const std::filesystem::path& dir) : path_(dir / ".lock") {
        std::filesystem::create_directories(dir);
        fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd_ < 0)
            fail("cache directory is locked by another writer: " + path_.string() +
                 " (remove the stale .lock file if no writer is running)");
    }
    ~CacheLock() {
        if (fd_ >= 0) {
            ::close(fd_);
            std::error_code ec;
            std::filesystem::remove(path_, ec);
        }
    }
    CacheLock(const CacheLock&) = delete;
    CacheLock& operator=(const CacheLock&) = delete;

private:
    std::filesystem::path path_;
    int fd_ = -1;
};

inline void write_quad_file(const std::filesystem::path& path, const LabeledImage& img) {
    std::string body;
    body.append(kQuadMagic, sizeof(kQuadMagic));
    auto put_u32 = [&](uint32_t v) { body.append(reinterpret_cast<const char*>(&v), 4); };
    put_u32(static_cast<uint32_t>(img.identity));
    put_u32(static_cast<uint32_t>(img.identity_name.size()));
    body.append(img.identity_name);
    put_u32(static_cast<uint32_t>(img.source.size()));
    body.append(img.source);
    put_u32(192);
    put_u32(192);
    body.append(reinterpret_cast<const char*>(img.rgb.data()), img.rgb.size());
    uint64_t hash = fnv1a(body.data(), body.size());
    body.append(reinterpret_cast<const char*>(&hash), sizeof(hash));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail("cannot write cache file: " + path.string());
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
}

inline LabeledImage read_quad_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open cache file: " + path.string());
    std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (body.size() < sizeof(kQuadMagic) + 24 || std::memcmp(body.data(), kQuadMagic, 8) != 0)
        fail("not a quadruplet cache file: " + path.string());
    uint64_t stored;
    std::memcpy(&stored, body.data() + body.size() - 8, 8);
    if (fnv1a(body.data(), body.size() - 8) != stored)
        fail("cache file hash mismatch (corrupt): " + path.string());
    size_t off = 8;
    auto get_u32 = [&] {
        uint32_t v;
        std::memcpy(&v, body.data() + off, 4);
        off += 4;
        return v;
    };
    LabeledImage img;
    img.identity = static_cast<int>(get_u32());
    uint32_t nlen = get_u32();
    img.identity_name = body.substr(off, nlen);
    off += nlen;
    uint32_t slen = get_u32();
    img.source = body.substr(off, slen);
    off += slen;
    uint32_t h = get_u32(), w = get_u32();
    size_t bytes = static_cast<size_t>(3) * h * w;
    if (off + bytes + 8 != body.size()) fail("cache file truncated: " + path.string());
    img.rgb.assign(body.begin() + static_cast<long>(off),
                   body.begin() + static_cast<long>(off + bytes));
    return img;
}

/// Regenerates the full quadruplet from a cached seed raster.
inline ImageQuadruplet load_quadruplet(const std::filesystem::path& path,
                                       const DegradeParams& params) {
    LabeledImage img = read_quad_file(path);
    return make_quadruplet(img.hr(), img.identity, params);
}

struct CacheIndex {
    DegradeParams degrade;
    uint64_t seed = 0;
    double split_ratio = 0.9;
    uint64_t data_hash = 0;
    std::string config_hash;
    std::vector<std::string> train_files, val_files, test_files;
    std::vector<std::string> train_identities, test_identities;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["degrade"] = {{"sigma", degrade.sigma}, {"kernel", degrade.kernel}};
        j["seed"] = seed;
        j["split_ratio"] = split_ratio;
        j["data_hash"] = hash_hex(data_hash);
        j["config_hash"] = config_hash;
        j["train_files"] = train_files;
        j["val_files"] = val_files;
        j["test_files"] = test_files;
        j["train_identities"] = train_identities;
        j["test_identities"] = test_identities;
        return j;
    }

    static CacheIndex from_json(const nlohmann::json& j) {
        CacheIndex idx;
        idx.degrade.sigma = j.at("degrade").at("sigma").get<double>();
        idx.degrade.kernel = j.at("degrade").at("kernel").get<int>();
        idx.seed = j.at("seed").get<uint64_t>();
        idx.split_ratio = j.at("split_ratio").get<double>();
        idx.data_hash = std::stoull(j.at("data_hash").get<std::string>(), nullptr, 16);
        idx.config_hash = j.at("config_hash").get<std::string>();
        idx.train_files = j.at("train_files").get<std::vector<std::string>>();
        idx.val_files = j.at("val_files").get<std::vector<std::string>>();
        idx.test_files = j.at("test_files").get<std::vector<std::string>>();
        idx.train_identities = j.at("train_identities").get<std::vector<std::string>>();
        idx.test_identities = j.at("test_identities").get<std::vector<std::string>>();
        return idx;
    }
};

inline void write_split_dir(const std::filesystem::path& dir, const LabeledImageSet& set,
                            std::vector<std::string>& files_out) {
    std::filesystem::create_directories(dir);
    char name[32];
    for (size_t i = 0; i < set.images.size(); ++i) {
        std::snprintf(name, sizeof(name), "q%05zu.quad", i);
        write_quad_file(dir / name, set.images[i]);
        files_out.push_back((dir.filename() / name).string());
    }
}

inline CacheIndex write_cache(const std::filesystem::path& dir, const LabeledImageSet& train,
                              const LabeledImageSet& val, const LabeledImageSet& test,
                              const DegradeParams& degrade, uint64_t seed, double ratio,
                              uint64_t data_hash, const std::string& config_hash) {
    CacheLock lock(dir);
    CacheIndex idx;
    idx.degrade = degrade;
    idx.seed = seed;
    idx.split_ratio = ratio;
    idx.data_hash = data_hash;
    idx.config_hash = config_hash;
    idx.train_identities = train.identity_names;
    idx.test_identities = test.identity_names;
    write_split_dir(dir / "train", train, idx.train_files);
    write_split_dir(dir / "val", val, idx.val_files);
    write_split_dir(dir / "test", test, idx.test_files);
    // split manifests for inspection
    for (const auto& [name, set] : {std::pair{"train", &train}, {"val", &val}, {"test", &test}}) {
        std::ofstream m(dir / (std::string(name) + "_manifest.tsv"));
        for (const auto& img : set->images) m << img.source << "\t" << img.identity_name << "\n";
    }
    std::ofstream out(dir / "index.json");
    out << idx.to_json().dump(2) << "\n";
    if (!out) fail("cannot write cache index in " + dir.string());
    return idx;
}

inline CacheIndex read_cache_index(const std::filesystem::path& dir) {
    std::ifstream in(dir / "index.json");
    if (!in) fail("no prepared cache at " + dir.string() + " (run prepare-data first)");
    nlohmann::json j;
    in >> j;
    return CacheIndex::from_json(j);
}

inline std::vector<LabeledImage> load_cache_split(const std::filesystem::path& dir,
                                                  const std::vector<std::string>& files) {
    std::vector<LabeledImage> out;
    out.reserve(files.size());
    for (const std::string& f : files) out.push_back(read_quad_file(dir / f));
    return out;
}

}  // namespace csrip
