#pragma once

#include "ocfs/error.hpp"

#include <algorithm>
#include <iterator>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace ocfs {

using IdSet = std::set<std::string>;

// "Both": features kept by both univariate selections.
inline IdSet fuse_feature_sets_both(const IdSet& a, const IdSet& b) {
    IdSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
    return out;
}

// "Combined": lots flagged by every method.
inline IdSet fuse_detections_combined(std::span<const IdSet> flags) {
    require(flags.size() >= 2, Errc::TooFewMethods, "combining detections needs at least 2 methods");
    IdSet acc = flags.front();
    for (std::size_t i = 1; i < flags.size() && !acc.empty(); ++i) acc = fuse_feature_sets_both(acc, flags[i]);
    return acc;
}

}  // namespace ocfs
