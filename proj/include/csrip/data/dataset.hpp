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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "csrip/core/rng.hpp"
#include "csrip/data/degrade.hpp"
#include "csrip/data/image_io.hpp"

namespace csrip {

namespace fs = std::filesystem;

/// One labeled face image, held as the quantized 192x192 raster it will be
/// cached as. Keeping bytes instead of doubles makes whole datasets cheap.
struct LabeledImage {
    std::vector<uint8_t> rgb;  // (3, 192, 192) channels-first
    int identity = -1;
    std::string identity_name;
    std::string source;

    Tensor hr() const { return image_from_u8(rgb, 192, 192); }
};

struct LabeledImageSet {
    std::vector<LabeledImage> images;
    int num_classes = 0;
    std::string split_tag;                     // train | val | test
    std::vector<std::string> identity_names;   // dense index -> manifest label
    std::vector<std::string> warnings;
    std::vector<std::string> skipped;          // undecodable files
};

namespace detail {

// Numeric-aware label ordering so {"5", "9", "10"} indexes naturally.
inline bool label_less(const std::string& a, const std::string& b) {
    auto is_int = [](const std::string& s) {
        return !s.empty() && s.find_first_not_of("0123456789") == std::string::npos;
    };
    if (is_int(a) && is_int(b)) {
        if (a.size() != b.size()) return a.size() < b.size();
    }
    return a < b;
}

}  // namespace detail

/// Manifest lines are "relative/path<TAB>identity_label". Images are decoded
/// as 8-bit RGB and normalized to 192x192 via shorter-side resize plus center
/// crop. Labels are re-indexed densely (with a warning when they were not
/// already 0..K-1); missing files fail hard, undecodable ones are skipped and
/// recorded.
inline LabeledImageSet load_dataset(const fs::path& root, const fs::path& manifest) {
    std::ifstream in(manifest);
    if (!in) fail("cannot open manifest: " + manifest.string());

    struct Entry {
        std::string path, label;
    };
    std::vector<Entry> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            fail("malformed manifest line (expected path<TAB>label): " + line);
        entries.push_back({line.substr(0, tab), line.substr(tab + 1)});
    }
    if (entries.empty()) fail("empty dataset: manifest " + manifest.string() + " lists no images");

    std::vector<std::string> labels;
    for (const Entry& e : entries) labels.push_back(e.label);
    std::sort(labels.begin(), labels.end(), detail::label_less);
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    std::map<std::string, int> index;
    for (size_t i = 0; i < labels.size(); ++i) index[labels[i]] = static_cast<int>(i);

    LabeledImageSet set;
    set.identity_names = labels;
    set.num_classes = static_cast<int>(labels.size());

    bool already_dense = true;
    for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i] != std::to_string(i)) already_dense = false;
    if (!already_dense) {
        set.warnings.push_back("manifest labels are not dense 0..K-1; re-indexed " +
                               std::to_string(labels.size()) + " labels");
        std::cerr << "warning: " << set.warnings.back() << "\n";
    }

    for (const Entry& e : entries) {
        fs::path full = root / e.path;
        if (!fs::exists(full)) fail("missing image file: " + full.string());
        Tensor img;
        try {
            img = load_image_rgb(full.string());
        } catch (const std::exception& ex) {
            set.skipped.push_back(full.string());
            std::cerr << "warning: skipping undecodable image " << full.string() << "\n";
            continue;
        }
        LabeledImage rec;
        rec.rgb = image_to_u8(resize_center_crop(img, 192));
        rec.identity = index[e.label];
        rec.identity_name = e.label;
        rec.source = e.path;
        set.images.push_back(std::move(rec));
    }
    if (set.images.empty()) fail("empty dataset: no decodable images under " + root.string());
    return set;
}

/// Per-identity partition. Validation receives max(1, round((1-ratio)*n))
/// images of each identity, so both splits always cover all K classes.
inline std::pair<LabeledImageSet, LabeledImageSet> split_identity_stratified(
    const LabeledImageSet& set, double ratio, uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) fail_arg("split ratio must be in (0, 1)");
    std::vector<std::vector<size_t>> by_identity(static_cast<size_t>(set.num_classes));
    for (size_t i = 0; i < set.images.size(); ++i)
        by_identity[static_cast<size_t>(set.images[i].identity)].push_back(i);

    LabeledImageSet train, val;
    train.split_tag = "train";
    val.split_tag = "val";
    train.num_classes = val.num_classes = set.num_classes;
    train.identity_names = val.identity_names = set.identity_names;

    for (int id = 0; id < set.num_classes; ++id) {
        auto& idxs = by_identity[static_cast<size_t>(id)];
        if (idxs.size() < 2)
            fail_arg("identity '" + set.identity_names[static_cast<size_t>(id)] +
                     "' has fewer than 2 images; cannot split");
        Rng rng(derive_seed(seed, "split", static_cast<uint64_t>(id)));
        // Fisher-Yates with our deterministic stream
        for (size_t i = idxs.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(rng.uniform_int(static_cast<int>(i)));
            std::swap(idxs[i - 1], idxs[j]);
        }
        size_t n = idxs.size();
        size_t n_val = std::max<size_t>(
            1, static_cast<size_t>(std::lround((1.0 - ratio) * static_cast<double>(n))));
        if (n_val >= n) n_val = n - 1;
        for (size_t i = 0; i < n; ++i) {
            (i < n - n_val ? train : val).images.push_back(set.images[idxs[i]]);
        }
    }
    return {std::move(train), std::move(val)};
}

}  // namespace csrip
