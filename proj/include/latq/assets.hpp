#pragma once

// Text assets (rule files, machine files, circuit files) compiled into the
// library so the CLI and tests work without an install prefix. The table is
// generated at build time from the assets/ directory; names are paths
// relative to that directory, e.g. "rules/qft.rules".

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace latq::assets {

struct Asset {
    const char* name;
    const char* text;
};

extern const Asset kAssets[];
extern const int kAssetCount;

struct AssetMissing : std::runtime_error {
    explicit AssetMissing(const std::string& name)
        : std::runtime_error("no embedded asset named '" + name + "'") {}
};

// Exact-name lookup; throws AssetMissing.
std::string_view find(std::string_view name);

// True if an asset with that exact name exists.
bool contains(std::string_view name);

// All embedded names, in table order (sorted by path).
std::vector<std::string_view> list();

} // namespace latq::assets
