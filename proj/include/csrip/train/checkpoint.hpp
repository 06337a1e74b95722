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

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "csrip/core/tensor.hpp"

namespace csrip {

// Versioned checkpoint container: magic, format version, a JSON header
// describing the payload plus whatever metadata the producer stamps
// (configuration hashes, train state, architecture echo), then raw
// little-endian doubles per tensor, then a content hash over everything.

inline constexpr char kCheckpointMagic[8] = {'C', 'S', 'R', 'I', 'P', 'C', 'K', '1'};
inline constexpr uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    nlohmann::json meta;
    std::vector<std::pair<std::string, Tensor>> tensors;

    const Tensor& tensor(const std::string& name) const {
        for (const auto& [n, t] : tensors)
            if (n == name) return t;
        fail("checkpoint is missing tensor '" + name + "'");
    }
    bool has_tensor(const std::string& name) const {
        for (const auto& [n, t] : tensors)
            if (n == name) return true;
        return false;
    }
};

inline void save_checkpoint_file(const std::filesystem::path& path, const nlohmann::json& meta,
                                 const std::vector<std::pair<std::string, const Tensor*>>& tensors) {
    nlohmann::json header = meta;
    nlohmann::json list = nlohmann::json::array();
    for (const auto& [name, t] : tensors) {
        nlohmann::json entry;
        entry["name"] = name;
        entry["shape"] = t->shape();
        list.push_back(entry);
    }
    header["tensors"] = list;
    std::string htext = header.dump();

    std::string body;
    body.reserve(htext.size() + 1024);
    body.append(kCheckpointMagic, sizeof(kCheckpointMagic));
    uint32_t ver = kCheckpointVersion;
    body.append(reinterpret_cast<const char*>(&ver), sizeof(ver));
    uint64_t hlen = htext.size();
    body.append(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    body.append(htext);
    for (const auto& [name, t] : tensors)
        body.append(reinterpret_cast<const char*>(t->data()),
                    static_cast<size_t>(t->numel()) * sizeof(double));
    uint64_t hash = fnv1a(body.data(), body.size());
    body.append(reinterpret_cast<const char*>(&hash), sizeof(hash));

    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail("cannot open checkpoint for writing: " + path.string());
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) fail("short write on checkpoint: " + path.string());
}

inline Checkpoint load_checkpoint_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open checkpoint: " + path.string());
    std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (body.size() < sizeof(kCheckpointMagic) + sizeof(uint32_t) + 2 * sizeof(uint64_t))
        fail("checkpoint too small: " + path.string());
    if (std::memcmp(body.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0)
        fail("not a checkpoint file: " + path.string());
    uint64_t stored_hash;
    std::memcpy(&stored_hash, body.data() + body.size() - sizeof(uint64_t), sizeof(uint64_t));
    if (fnv1a(body.data(), body.size() - sizeof(uint64_t)) != stored_hash)
        fail("checkpoint content hash mismatch (corrupt file): " + path.string());

    size_t off = sizeof(kCheckpointMagic);
    uint32_t ver;
    std::memcpy(&ver, body.data() + off, sizeof(ver));
    off += sizeof(ver);
    if (ver != kCheckpointVersion)
        fail("unsupported checkpoint version " + std::to_string(ver) + " in " + path.string());
    uint64_t hlen;
    std::memcpy(&hlen, body.data() + off, sizeof(hlen));
    off += sizeof(hlen);

    Checkpoint ck;
    ck.meta = nlohmann::json::parse(body.substr(off, hlen));
    off += hlen;
    for (const auto& entry : ck.meta.at("tensors")) {
        std::vector<int> shape = entry.at("shape").get<std::vector<int>>();
        Tensor t(shape);
        size_t bytes = static_cast<size_t>(t.numel()) * sizeof(double);
        if (off + bytes > body.size() - sizeof(uint64_t))
            fail("checkpoint truncated: " + path.string());
        std::memcpy(t.data(), body.data() + off, bytes);
        off += bytes;
        ck.tensors.emplace_back(entry.at("name").get<std::string>(), std::move(t));
    }
    return ck;
}

}  // namespace csrip
