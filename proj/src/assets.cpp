#include "latq/assets.hpp"

namespace latq::assets {

std::string_view find(std::string_view name) {
    for (int i = 0; i < kAssetCount; ++i) {
        if (name == kAssets[i].name) return kAssets[i].text;
    }
    throw AssetMissing(std::string(name));
}

bool contains(std::string_view name) {
    for (int i = 0; i < kAssetCount; ++i) {
        if (name == kAssets[i].name) return true;
    }
    return false;
}

std::vector<std::string_view> list() {
    std::vector<std::string_view> out;
    out.reserve(static_cast<std::size_t>(kAssetCount));
    for (int i = 0; i < kAssetCount; ++i) out.emplace_back(kAssets[i].name);
    return out;
}

} // namespace latq::assets
