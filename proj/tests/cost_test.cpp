#include <gtest/gtest.h>

#include "support.hpp"

namespace navstruct {
namespace {

TEST(StorageCost, EmptyStructureIsFree) {
  auto sizes = testing::flat_sizes(3, 11.0, 3.5, 1.0);
  EXPECT_EQ(storage_cost(Structure{}, sizes), 0.0);
}

TEST(StorageCost, SumsIntraAndInterOnly) {
  auto sizes = testing::flat_sizes(2, 11.0, 3.5, 1.0);
  Structure s;
  s.intra = {0};
  s.edges = {{0, 1}};
  EXPECT_DOUBLE_EQ(storage_cost(s, sizes), 12.0);
}

TEST(StorageCost, OneLandmarkOverFourMembers) {
  auto sizes = testing::flat_sizes(5, 11.0, 3.5, 1.0);
  Structure s;
  s.intra = {0};
  s.edges = {{0, 1}, {0, 2}, {0, 3}, {0, 4}};
  EXPECT_DOUBLE_EQ(storage_cost(s, sizes), 15.0);
}

TEST(StorageCost, MissingSizeIsCorruptTable) {
  SizeTable sizes(2);
  sizes.set_intra(0, 11.0);
  Structure s;
  s.intra = {0};
  s.edges = {{0, 1}};
  EXPECT_THROW(storage_cost(s, sizes), CorruptTable);
}

TEST(OneHop, StoredEdgeAddsMergeSize) {
  auto sizes = testing::flat_sizes(2, 11.0, 3.5, 4.0);
  Structure s;
  s.edges = {{0, 1}};
  EXPECT_DOUBLE_EQ(one_hop_overhead(s, sizes, 0, 1).value(), 7.5);
  EXPECT_FALSE(one_hop_overhead(s, sizes, 1, 0).has_value());
  EXPECT_THROW(one_hop_overhead(s, sizes, 1, 1), InvalidInput);
}

TEST(ZeroHop, PrefersOwnIntraOnTies) {
  auto sizes = testing::flat_sizes(2, 11.0, 3.5, 1.0);
  Structure s;
  s.intra = {0, 1};
  s.edges = {{0, 1}};
  auto z = zero_hop_choice(s, sizes, 1);
  EXPECT_DOUBLE_EQ(z.bits, 11.0);
  EXPECT_EQ(z.via, kNone);
}

TEST(ZeroHop, LandmarkCombo) {
  auto sizes = testing::flat_sizes(2, 11.0, 3.5, 1.0);
  Structure s;
  s.intra = {0};
  s.edges = {{0, 1}};
  auto z = zero_hop_choice(s, sizes, 1);
  EXPECT_DOUBLE_EQ(z.bits, 15.5);
  EXPECT_EQ(z.via, 0);
}

TEST(ZeroHop, CheaperComboBeatsOwnIntra) {
  auto sizes = testing::flat_sizes(3, 11.0, 3.5, 1.0);
  sizes.set_intra(2, 20.0);
  Structure s;
  s.intra = {0, 1, 2};
  s.edges = {{1, 2}, {0, 2}};
  auto z = zero_hop_choice(s, sizes, 2);
  EXPECT_DOUBLE_EQ(z.bits, 15.5);
  EXPECT_EQ(z.via, 0);  // lowest index among equal combos
}

TEST(ZeroHop, NoReconstructionIsInfeasible) {
  auto sizes = testing::flat_sizes(2, 11.0, 3.5, 1.0);
  Structure s;
  s.intra = {0};
  EXPECT_THROW(zero_hop_overhead(s, sizes, 1), InfeasibleStructure);
  EXPECT_THROW(StructureIndex(s, sizes), InfeasibleStructure);
}

TEST(StructureIndex, AgreesWithDirectOverheads) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto inst = testing::random_instance(seed);
    StructureIndex idx(inst.structure, inst.sizes);
    const auto n = static_cast<Mdu>(inst.sizes.size());
    for (Mdu j = 0; j < n; ++j) {
      EXPECT_DOUBLE_EQ(idx.zero_hop(j), zero_hop_overhead(inst.structure, inst.sizes, j));
      for (Mdu i = 0; i < n; ++i) {
        if (i == j) continue;
        EXPECT_DOUBLE_EQ(idx.one_hop(i, j),
                         one_hop_overhead(inst.structure, inst.sizes, i, j).value_or(kUnavailable));
      }
    }
  }
}

TEST(AugmentedIndex, MatchesRebuiltStructure) {
  auto inst = testing::random_instance(42);
  StructureIndex base(inst.structure, inst.sizes);
  const auto n = static_cast<Mdu>(inst.sizes.size());
  for (Mdu a = 0; a < n; ++a)
    for (Mdu b = 0; b < n; ++b) {
      if (a == b || inst.structure.has_edge(a, b)) continue;
      Edge e{a, b};
      AugmentedIndex aug(base, std::span<const Edge>(&e, 1));
      Structure bigger = inst.structure;
      bigger.edges.insert(e);
      StructureIndex rebuilt(bigger, inst.sizes);
      for (Mdu j = 0; j < n; ++j) {
        ASSERT_DOUBLE_EQ(aug.zero_hop(j), rebuilt.zero_hop(j));
        for (Mdu i = 0; i < n; ++i)
          if (i != j) ASSERT_EQ(aug.has_edge(i, j), rebuilt.has_edge(i, j));
      }
    }
}

TEST(Monotonicity, AddingEdgesNeverRaisesOverheads) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto inst = testing::random_instance(seed);
    Structure bigger = inst.structure;
    const auto n = static_cast<Mdu>(inst.sizes.size());
    for (Mdu i = 0; i < n; ++i)
      for (Mdu j = 0; j < n; ++j)
        if (i != j && (i + j + static_cast<Mdu>(seed)) % 3 == 0) bigger.edges.insert({i, j});
    EXPECT_GE(storage_cost(bigger, inst.sizes), storage_cost(inst.structure, inst.sizes));
    for (Mdu j = 0; j < n; ++j) {
      EXPECT_LE(zero_hop_overhead(bigger, inst.sizes, j), zero_hop_overhead(inst.structure, inst.sizes, j));
      for (Mdu i = 0; i < n; ++i) {
        if (i == j) continue;
        EXPECT_LE(one_hop_overhead(bigger, inst.sizes, i, j).value_or(kUnavailable),
                  one_hop_overhead(inst.structure, inst.sizes, i, j).value_or(kUnavailable));
      }
    }
  }
}

TEST(ValidateStructure, LandmarkInvariants) {
  Structure s;
  s.intra = {0, 2};
  s.edges = {{0, 1}, {0, 2}, {2, 0}, {2, 3}};
  s.landmarks = {{0, {0, 1}}, {2, {2, 3}}};
  EXPECT_TRUE(validate_structure(s, 4).empty());
  s.edges.erase({2, 0});
  EXPECT_EQ(validate_structure(s, 4).size(), 1u);
  s.landmarks[1].members = {2};
  EXPECT_EQ(validate_structure(s, 4).size(), 2u);  // missing reverse edge and uncovered MDU 3
}

}  // namespace
}  // namespace navstruct
