#pragma once

// Reports over a generated dataset: class balance and provenance histograms
// from the manifest, and a consistency check of every emitted file.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "signsynth/augment.hpp"
#include "signsynth/error.hpp"
#include "signsynth/image_io.hpp"
#include "signsynth/plan.hpp"

namespace signsynth {

/// max / min over the classes that occur; 1.0 for a single class, 0 when
/// every count is zero.
inline double imbalance_ratio(const std::vector<long long>& counts) {
    long long lo = 0, hi = 0;
    for (long long c : counts) {
        if (c <= 0) continue;
        lo = lo == 0 ? c : std::min(lo, c);
        hi = std::max(hi, c);
    }
    return lo == 0 ? 0.0 : static_cast<double>(hi) / static_cast<double>(lo);
}

struct DatasetStats {
    long long total = 0;
    std::array<long long, kNumClasses> per_class{};
    double imbalance = 0;
    /// stage -> value -> count; stages: variant, deformation, background,
    /// env, occlusion.
    std::map<std::string, std::map<std::string, long long>> histograms;
    long long occluded = 0;
    double coverage_min = 0, coverage_max = 0, coverage_mean = 0;
};

namespace detail {

inline std::string manifest_at(const std::string& source, std::size_t line) {
    return source + ":" + std::to_string(line) + ": ";
}

}  // namespace detail

inline DatasetStats dataset_stats(std::istream& in, const std::string& source = "manifest.jsonl") {
    using nlohmann::json;
    DatasetStats st;
    std::string text;
    std::size_t line = 0;
    double coverage_sum = 0;
    while (std::getline(in, text)) {
        ++line;
        if (!text.empty() && text.back() == '\r') text.pop_back();
        const std::string at = detail::manifest_at(source, line);
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ParseError(at + "malformed JSON: " + e.what(), e.byte);
        }
        if (!j.is_object() || !j.contains("class_index") || !j["class_index"].is_number_integer())
            throw ParseError(at + "missing integer class_index");
        const int c = j["class_index"].get<int>();
        if (c < 0 || c >= kNumClasses) throw ParseError(at + "class_index " + std::to_string(c) + " out of range");
        ++st.total;
        ++st.per_class[c];
        auto str = [](const json& v, const char* key) {
            return v.is_object() && v.contains(key) && v[key].is_string() ? v[key].get<std::string>() : std::string("?");
        };
        if (j.contains("variant")) {
            ++st.histograms["variant"][str(j["variant"], "kind")];
            if (j["variant"].is_object() && j["variant"].contains("deformation"))
                ++st.histograms["deformation"][str(j["variant"]["deformation"], "kind")];
        }
        if (j.contains("background_id") && j["background_id"].is_string())
            ++st.histograms["background"][j["background_id"].get<std::string>()];
        if (j.contains("env")) ++st.histograms["env"][j["env"].is_null() ? "none" : str(j["env"], "kind")];
        if (j.contains("occlusion")) {
            const auto& o = j["occlusion"];
            if (o.is_null()) {
                ++st.histograms["occlusion"]["none"];
            } else {
                ++st.histograms["occlusion"][str(o, "category")];
                if (!o.contains("coverage") || !o["coverage"].is_number())
                    throw ParseError(at + "occlusion without numeric coverage");
                const double cov = o["coverage"].get<double>();
                st.coverage_min = st.occluded == 0 ? cov : std::min(st.coverage_min, cov);
                st.coverage_max = st.occluded == 0 ? cov : std::max(st.coverage_max, cov);
                coverage_sum += cov;
                ++st.occluded;
            }
        }
    }
    st.imbalance = imbalance_ratio(std::vector<long long>(st.per_class.begin(), st.per_class.end()));
    if (st.occluded > 0) st.coverage_mean = coverage_sum / static_cast<double>(st.occluded);
    return st;
}

inline DatasetStats dataset_stats(const std::filesystem::path& manifest) {
    std::ifstream in(manifest, std::ios::binary);
    if (!in) throw ConfigError("manifest not found: " + manifest.string());
    return dataset_stats(in, manifest.string());
}

inline std::string format_stats(const DatasetStats& st) {
    std::ostringstream os;
    os << "records: " << group_thousands(st.total) << "\n";
    for (int c = 0; c < kNumClasses; ++c) {
        const std::string name = display_class_name(c);
        os << "  " << name << std::string(15 - name.size(), ' ') << group_thousands(st.per_class[c]) << "\n";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", st.imbalance);
    os << "imbalance ratio (max/min): " << buf << "\n";
    for (const auto& [stage, hist] : st.histograms) {
        os << stage << ":\n";
        for (const auto& [k, v] : hist) os << "  " << k << " " << group_thousands(v) << "\n";
    }
    if (st.occluded > 0) {
        std::snprintf(buf, sizeof buf, "%.4f / %.4f / %.4f", st.coverage_min, st.coverage_mean, st.coverage_max);
        os << "occlusion coverage min/mean/max: " << buf << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Validation

struct Violation {
    std::size_t line = 0;  // manifest line; 0 for dataset-level problems
    std::string message;
};

namespace detail {

inline bool is_unit_token(const std::string& s) {
    if (s.size() != 8 || s[1] != '.') return false;
    if (s[0] < '0' || s[0] > '9') return false;
    for (std::size_t i = 2; i < s.size(); ++i)
        if (s[i] < '0' || s[i] > '9') return false;
    return true;
}

}  // namespace detail

/// Check every manifest line of a dataset directory. Throws ConfigError when
/// the manifest itself is missing; everything else is reported.
inline std::vector<Violation> validate_dataset(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    using nlohmann::json;
    const auto manifest = dir / "manifest.jsonl";
    std::ifstream in(manifest, std::ios::binary);
    if (!in) throw ConfigError("manifest not found: " + manifest.string());

    std::vector<Violation> out;
    std::set<std::uint64_t> ids;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        auto bad = [&](const std::string& msg) { out.push_back({line, msg}); };
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            bad(std::string("malformed JSON: ") + e.what());
            continue;
        }
        if (!j.is_object()) {
            bad("line is not a JSON object");
            continue;
        }
        if (!j.contains("record_id") || !j["record_id"].is_number_unsigned()) {
            bad("missing record_id");
        } else if (!ids.insert(j["record_id"].get<std::uint64_t>()).second) {
            bad("duplicate record_id " + std::to_string(j["record_id"].get<std::uint64_t>()));
        }
        int cls = -1;
        if (!j.contains("class_index") || !j["class_index"].is_number_integer()) {
            bad("missing class_index");
        } else {
            cls = j["class_index"].get<int>();
            if (cls < 0 || cls >= kNumClasses) bad("class_index " + std::to_string(cls) + " outside [0,5]");
            else if (j.contains("class_name") && j["class_name"] != std::string(class_name(static_cast<SignClass>(cls))))
                bad("class_name does not match class_index");
        }
        std::array<int, 4> px{};
        bool have_px = j.contains("bbox_px") && j["bbox_px"].is_array() && j["bbox_px"].size() == 4;
        if (have_px)
            for (int i = 0; i < 4; ++i) {
                if (!j["bbox_px"][i].is_number_integer()) have_px = false;
                else px[i] = j["bbox_px"][i].get<int>();
            }
        if (!have_px) bad("bbox_px must be [x, y, w, h] integers");

        int W = 0, H = 0;
        if (!j.contains("image") || !j["image"].is_string()) {
            bad("missing image path");
        } else {
            const auto path = dir / j["image"].get<std::string>();
            if (!fs::is_regular_file(path)) {
                bad("image file missing: " + j["image"].get<std::string>());
            } else {
                try {
                    const RasterImage img = load_image(path);
                    W = img.width();
                    H = img.height();
                } catch (const std::exception& e) {
                    bad(std::string("image not decodable: ") + e.what());
                }
            }
        }
        if (!j.contains("label") || !j["label"].is_string()) {
            bad("missing label path");
            continue;
        }
        const std::string label_rel = j["label"].get<std::string>();
        const auto label_path = dir / label_rel;
        if (!fs::is_regular_file(label_path)) {
            bad("label file missing: " + label_rel);
            continue;
        }
        const Bytes raw = read_file(label_path);
        const std::string label(raw.begin(), raw.end());
        if (label.empty() || label.back() != '\n' || std::count(label.begin(), label.end(), '\n') != 1) {
            bad(label_rel + ": expected exactly one newline-terminated line");
            continue;
        }
        std::istringstream ls(label.substr(0, label.size() - 1));
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.size() != 5) {
            bad(label_rel + ": expected 5 fields, found " + std::to_string(tok.size()));
            continue;
        }
        if (tok[0] != std::to_string(cls)) bad(label_rel + ": class '" + tok[0] + "' does not match class_index");
        std::array<double, 4> v{};
        bool values_ok = true;
        for (int i = 0; i < 4; ++i) {
            const std::string& t = tok[static_cast<std::size_t>(i) + 1];
            try {
                v[i] = std::stod(t);
            } catch (const std::exception&) {
                bad(label_rel + ": '" + t + "' is not a number");
                values_ok = false;
                continue;
            }
            if (!(v[i] >= 0.0 && v[i] <= 1.0)) {
                bad(label_rel + ": value " + t + " outside [0,1]");
                values_ok = false;
            } else if (!detail::is_unit_token(t)) {
                bad(label_rel + ": value " + t + " is not written with 6 decimals");
            }
        }
        if (!values_ok || !have_px || W == 0) continue;
        const double x = (v[0] - v[2] / 2) * W, y = (v[1] - v[3] / 2) * H;
        const double w = v[2] * W, h = v[3] * H;
        if (std::abs(x - px[0]) > 1 || std::abs(y - px[1]) > 1 || std::abs(w - px[2]) > 1 || std::abs(h - px[3]) > 1)
            bad(label_rel + ": label box does not reconstruct bbox_px within 1 px");
        if (px[0] < 0 || px[1] < 0 || px[0] + px[2] > W || px[1] + px[3] > H || px[2] < 1 || px[3] < 1)
            bad("bbox_px outside the image");
    }

    const auto header_path = dir / "dataset.json";
    if (fs::is_regular_file(header_path)) {
        try {
            const Bytes raw = read_file(header_path);
            const json h = json::parse(raw.begin(), raw.end());
            if (h.contains("written_records") && h["written_records"].get<std::size_t>() != line)
                out.push_back({0, "dataset.json lists " + std::to_string(h["written_records"].get<std::size_t>()) +
                                      " records, manifest has " + std::to_string(line)});
        } catch (const std::exception& e) {
            out.push_back({0, std::string("dataset.json unreadable: ") + e.what()});
        }
    }
    return out;
}

}  // namespace signsynth
