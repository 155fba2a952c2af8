#include <gtest/gtest.h>

#include <filesystem>

#include "support.hpp"

namespace navstruct {
namespace {

TEST(Numbers, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.123456789, 0.0}) EXPECT_EQ(parse_double(format_double(v), "t"), v);
  EXPECT_THROW(parse_double("1.5x", "t"), InvalidInput);
  EXPECT_THROW(parse_int("", "t"), InvalidInput);
}

TEST(ScenarioJson, RoundTrip) {
  auto inst = testing::random_instance(4);
  auto back = scenario_from_json(json::parse(scenario_to_json(inst.scenario).dump()));
  EXPECT_EQ(back.graph, inst.scenario.graph);
  EXPECT_EQ(back.nav, inst.scenario.nav);
  EXPECT_EQ(back.lifetime, inst.scenario.lifetime);
}

TEST(ScenarioJson, RejectsUnknownAndMissingKeys) {
  auto j = scenario_to_json(testing::ping_pong(2.0, 2));
  auto extra = j;
  extra["colour"] = 1;
  EXPECT_THROW(scenario_from_json(extra), InvalidInput);
  auto missing = j;
  missing.erase("lifetime");
  EXPECT_THROW(scenario_from_json(missing), InvalidInput);
  auto wrong_type = j;
  wrong_type["start"] = "zero";
  EXPECT_THROW(scenario_from_json(wrong_type), InvalidInput);
  auto bad_row = j;
  bad_row["p_start"] = json::array({json::array({1, 0.5})});
  EXPECT_THROW(scenario_from_json(bad_row), InvalidInput);  // row sums to 0.5
}

TEST(SizesCsv, RoundTripAndErrors) {
  auto inst = testing::random_instance(8);
  auto back = sizes_from_csv(sizes_to_csv(inst.sizes));
  EXPECT_EQ(back, inst.sizes);
  EXPECT_THROW(sizes_from_csv("kind,i,j\nI,0,,1\n"), InvalidInput);
  EXPECT_THROW(sizes_from_csv("kind,i,j,bits\nQ,0,,1\n"), InvalidInput);
  EXPECT_THROW(sizes_from_csv("kind,i,j,bits\nI,0,1,1\n"), InvalidInput);
  EXPECT_THROW(sizes_from_csv("kind,i,j,bits\nP,1,1,1\n"), InvalidInput);
  EXPECT_THROW(sizes_from_csv("kind,i,j,bits\nI,0,,-1\n"), InvalidInput);
  auto partial = sizes_from_csv("kind,i,j,bits\nI,0,,11\nI,1,,11\n");
  EXPECT_THROW(require_complete(partial, 2), CorruptTable);
}

TEST(StructureJson, RoundTripWithLandmarks) {
  auto sizes = testing::flat_sizes(4, 11.0, 3.5, 1.0);
  auto s = build_initial_structure({{0, {0, 1}}, {2, {2, 3}}}, sizes);
  auto back = structure_from_json(json::parse(structure_to_json(s).dump()), 4);
  EXPECT_EQ(back.intra, s.intra);
  EXPECT_EQ(back.edges, s.edges);
  ASSERT_EQ(back.landmarks.size(), 2u);
  EXPECT_EQ(back.landmarks[1].members, (std::vector<Mdu>{2, 3}));
  auto broken = structure_to_json(s);
  broken["p_edges"] = json::array({json::array({0, 1})});
  EXPECT_THROW(structure_from_json(broken, 4), InvalidInput);
  EXPECT_THROW(structure_from_json(json::parse(R"({"i_set":[0],"p_edges":[],"extra":1})")), InvalidInput);
}

TEST(PolicyJson, RoundTrip) {
  auto inst = testing::random_instance(12);
  auto r = evaluate(inst.scenario, inst.sizes, inst.structure, BufferModel::flexible);
  ASSERT_FALSE(r.policy.empty());
  auto back = policy_from_json(json::parse(policy_to_json(r.policy, r.buffer).dump()));
  EXPECT_EQ(back.buffer, BufferModel::flexible);
  EXPECT_EQ(back.policy, r.policy);
}

TEST(TradeoffCsv, GroupsByMethodThenLambda) {
  std::vector<TradeoffRow> rows{{"flex-lm", 1.0, 10.5, 3.25, 2, 7},
                                {"flex-ga", 0.5, 20.0, 1.0 / 3.0, 0, 9},
                                {"flex-lm", 0.1, 30.0, 2.0, 3, 11}};
  const auto text = tradeoff_to_csv(rows);
  auto back = tradeoff_from_csv(text);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[0], rows[2]);
  EXPECT_EQ(back[1], rows[0]);
  EXPECT_EQ(back[2], rows[1]);
  EXPECT_EQ(text.substr(0, text.find('\n')), kTradeoffHeader);
  EXPECT_THROW(tradeoff_to_csv({}), InvalidInput);
}

TEST(LambdaList, ParsesAndRejects) {
  EXPECT_EQ(parse_lambda_list("0.5,1,2"), (std::vector<double>{0.5, 1.0, 2.0}));
  EXPECT_THROW(parse_lambda_list("1,,2"), InvalidInput);
  EXPECT_THROW(parse_lambda_list("-1"), InvalidInput);
}

TEST(Files, SaveLoadAndMissingFile) {
  const auto dir = std::filesystem::temp_directory_path() / "navstruct_io_test";
  std::filesystem::create_directories(dir);
  auto inst = testing::random_instance(2);
  save_scenario((dir / "s.json").string(), inst.scenario);
  save_sizes((dir / "z.csv").string(), inst.sizes);
  save_structure((dir / "t.json").string(), inst.structure);
  EXPECT_EQ(load_scenario((dir / "s.json").string()).nav, inst.scenario.nav);
  EXPECT_EQ(load_sizes((dir / "z.csv").string()), inst.sizes);
  EXPECT_EQ(load_structure((dir / "t.json").string()).edges, inst.structure.edges);
  EXPECT_THROW(load_scenario((dir / "nope.json").string()), InvalidInput);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace navstruct
