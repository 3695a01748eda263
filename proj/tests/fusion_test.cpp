#include "ocfs/fusion.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <iterator>
#include <random>

using namespace ocfs;

TEST(FuseBoth, Examples) {
    const IdSet a{"p1", "p2"}, b{"p2", "p3"};
    EXPECT_EQ(fuse_feature_sets_both(a, b), (IdSet{"p2"}));
    EXPECT_EQ(fuse_feature_sets_both(a, a), a);
    EXPECT_TRUE(fuse_feature_sets_both(a, IdSet{"q"}).empty());
}

TEST(FuseCombined, Examples) {
    std::vector<IdSet> flags{{"L1", "L2"}, {"L2", "L3"}, {"L2"}};
    EXPECT_EQ(fuse_detections_combined(flags), (IdSet{"L2"}));
    std::vector<IdSet> same{{"L1", "L4"}, {"L1", "L4"}};
    EXPECT_EQ(fuse_detections_combined(same), same[0]);
    std::vector<IdSet> none{{"L1"}, {}};
    EXPECT_TRUE(fuse_detections_combined(none).empty());
    std::vector<IdSet> one{{"L1"}};
    try {
        fuse_detections_combined(one);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::TooFewMethods);
    }
}

TEST(FuseCombined, RandomConfigurationsMatchMembershipTest) {
    std::mt19937_64 rng(2024);
    std::bernoulli_distribution coin(0.6);
    std::uniform_int_distribution<int> methods(2, 4);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<IdSet> flags(static_cast<std::size_t>(methods(rng)));
        for (auto& f : flags)
            for (int lot = 0; lot < 30; ++lot)
                if (coin(rng)) f.insert("L" + std::to_string(lot));
        const IdSet combined = fuse_detections_combined(flags);
        for (int lot = 0; lot < 30; ++lot) {
            const std::string id = "L" + std::to_string(lot);
            const bool everywhere = std::all_of(flags.begin(), flags.end(), [&](const IdSet& f) { return f.count(id); });
            EXPECT_EQ(combined.count(id) == 1, everywhere);
        }
        for (const auto& f : flags) EXPECT_TRUE(std::includes(f.begin(), f.end(), combined.begin(), combined.end()));
    }
}
