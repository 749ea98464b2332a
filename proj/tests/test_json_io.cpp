#include <gtest/gtest.h>

#include <fstream>

#include "qwalk/json_io.hpp"

using namespace qwalk;

TEST(JsonIo, InstanceRoundTrip) {
  std::vector<std::int64_t> v{4, 9, 4, 1, 4};
  Json j = instance_to_json(v, Triple{1, 3, 5});
  auto f = instance_from_json(Json::parse(j.dump()));
  EXPECT_EQ(f.values, v);
  ASSERT_TRUE(f.planted.has_value());
  EXPECT_EQ(*f.planted, (Triple{1, 3, 5}));
  EXPECT_EQ(j.dump(), R"({"n":5,"values":[4,9,4,1,4],"planted":[1,3,5]})");
}

TEST(JsonIo, NullPlantedAndUnsortedTriple) {
  auto f = instance_from_json(Json::parse(R"({"values":[1,2,3],"planted":null})"));
  EXPECT_FALSE(f.planted.has_value());
  auto g = instance_from_json(Json::parse(R"({"values":[7,7,7],"planted":[3,1,2]})"));
  EXPECT_EQ(*g.planted, (Triple{1, 2, 3}));
}

TEST(JsonIo, RejectsMalformedInstances) {
  for (const char* bad : {R"([1,2,3])", R"({"n":3})", R"({"values":[1,"x"]})", R"({"n":4,"values":[1,2,3]})",
                          R"({"values":[]})", R"({"values":[1,2,3],"planted":[1,2]})", R"({"values":[1,2],"planted":["a",1,2]})"})
    EXPECT_THROW(instance_from_json(Json::parse(bad)), ParameterError) << bad;
}

TEST(JsonIo, ReadInstanceFileErrors) {
  EXPECT_THROW(read_instance("/nonexistent/instance.json"), ParameterError);
  const std::string path = ::testing::TempDir() + "corrupt.json";
  std::ofstream(path) << "{\"values\": [1, 2,";
  EXPECT_THROW(read_instance(path), ParameterError);
}

TEST(JsonIo, SampleInstanceParses) {
  auto f = read_instance(std::string(QWALK_TEST_DATA) + "/../../samples/instance_n12.json");
  EXPECT_EQ(f.values.size(), 12u);
  ASSERT_TRUE(f.planted.has_value());
  EXPECT_TRUE(verify_triple(f.values, *f.planted));
}

TEST(JsonIo, LedgerFieldsAndSymbols) {
  CostLedger L;
  L.queries = 3;
  L.charged = 1.5;
  L.symbols.eps = 0.25;
  L.warn("w");
  Json j = ledger_to_json(L);
  EXPECT_EQ(j["queries"], 3);
  EXPECT_EQ(j["symbols"]["eps"], 0.25);
  EXPECT_FALSE(j["symbols"].contains("delta"));
  EXPECT_EQ(j["warnings"][0], "w");
  std::vector<std::string> keys;
  for (auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys.front(), "queries");
  EXPECT_EQ(keys.back(), "warnings");
}

TEST(JsonIo, SolveResultIsByteStable) {
  auto [v, t] = generate_instance(24, true, 96, 2);
  auto a = dump(solve_result_to_json(solve(v, 5)));
  auto b = dump(solve_result_to_json(solve(v, 5)));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.back(), '\n');
  auto j = Json::parse(a);
  EXPECT_TRUE(j.contains("found"));
  EXPECT_TRUE(j.contains("repetitions"));
}

TEST(JsonIo, ChainAndHashDescriptions) {
  auto c = johnson_chain(5, 2, 1);
  EXPECT_EQ(chain_to_json(c).dump(), R"({"kind":"johnson","n":5,"r":2,"m":1})");
  PolyHash f(2, 9, 9, 11, {{0, 1}});
  EXPECT_EQ(polyhash_to_json(f).dump(), R"({"k":2,"domain":9,"range":9,"p":11,"rounds":[[0,1]]})");
}
