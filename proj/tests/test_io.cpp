#include <gtest/gtest.h>

#include <filesystem>

#include "hvrp/error.hpp"
#include "hvrp/io.hpp"

using namespace hvrp;

namespace {

const std::filesystem::path kData = HVRP_DATA_DIR;

ClrpInstance small_clrp() {
  ClrpInstance c;
  c.network.name = "small";
  c.network.depots = {{0, 0}, {10, 10}};
  c.network.vehicles = {std::nullopt, std::nullopt};
  c.network.customers = {{{1, 2}, 3}, {{8.5, 9}, 4}, {{5, 5}, 2}};
  c.network.capacity = 6;
  c.depot_capacity = {10, 7.5};
  c.opening_cost = {100, 120.25};
  c.route_cost = 10;
  return c;
}

}  // namespace

TEST(Io, CordeauP01) {
  const auto inst = load_mdvrp(kData / "cordeau" / "p01");
  EXPECT_EQ(inst.name, "p01");
  EXPECT_EQ(inst.num_customers(), 50u);
  EXPECT_EQ(inst.num_depots(), 4u);
  EXPECT_EQ(inst.capacity, 80);
  EXPECT_EQ(inst.total_demand(), 777);
  for (const auto& v : inst.vehicles) EXPECT_EQ(v, 4);
  EXPECT_EQ(inst.customers[0].pos, (Point{37, 52}));
  EXPECT_EQ(inst.customers[0].demand, 7);
  EXPECT_EQ(inst.depots[0], (Point{20, 20}));
  EXPECT_EQ(inst.depots[3], (Point{60, 50}));
}

TEST(Io, CordeauRoundTrip) {
  const auto inst = load_mdvrp(kData / "cordeau" / "p01");
  auto back = parse_cordeau(format_cordeau(inst), "p01");
  back.name = inst.name;
  EXPECT_EQ(back, inst);
}

TEST(Io, CordeauErrorsCarryLineNumbers) {
  const std::string good = "2 1 2 2\n0 10\n0 10\n1 1 1 0 3 1 2 1 2\n2 5 5 0 4 1 2 1 2\n3 0 0 0 0 0 0\n4 9 9 0 0 0 0\n";
  EXPECT_NO_THROW(parse_cordeau(good));
  try {
    parse_cordeau("2 1 2 2\n0 10\n0 10\n1 1 1 0 3 1 2 1 2\n2 5 x 0 4 1 2 1 2\n3 0 0 0 0 0 0\n4 9 9 0 0 0 0\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5u);
  }
  EXPECT_THROW(parse_cordeau("2 1 2 2\n0 10\n0 10\n1 1 1 0 3 1 2 1 2\n"), ParseError);
  EXPECT_THROW(parse_cordeau(good + "5 1 1 0 0 0 0\n"), ParseError);
  EXPECT_THROW(parse_cordeau("2 1 2 2\n0 10\n0 12\n1 1 1 0 3 1 2 1 2\n2 5 5 0 4 1 2 1 2\n3 0 0 0 0 0 0\n4 9 9 0 0 0 0\n"),
               ParseError);
}

TEST(Io, TsplibRoundTrip) {
  CvrpInstance inst;
  inst.name = "tiny";
  inst.depot = {0.5, 1.25};
  inst.customers = {{{3, 4}, 2}, {{-1, 7.125}, 5}};
  inst.capacity = 9;
  inst.fleet_limit = 2;
  const auto back = parse_tsplib_cvrp(format_tsplib_cvrp(inst));
  EXPECT_EQ(back, inst);
  inst.fleet_limit.reset();
  EXPECT_EQ(parse_tsplib_cvrp(format_tsplib_cvrp(inst)), inst);
}

TEST(Io, TsplibRejectsMalformed) {
  const std::string text =
      "NAME : t\nTYPE : CVRP\nDIMENSION : 3\nEDGE_WEIGHT_TYPE : EUC_2D\nCAPACITY : 10\n"
      "NODE_COORD_SECTION\n1 0 0\n2 1 1\n3 2 2\nDEMAND_SECTION\n1 0\n2 3\n3 4\nDEPOT_SECTION\n1\n-1\nEOF\n";
  EXPECT_EQ(parse_tsplib_cvrp(text).size(), 2u);
  auto broken = text;
  broken.replace(broken.find("EUC_2D"), 6, "GEO");
  EXPECT_THROW(parse_tsplib_cvrp(broken), ParseError);
  broken = text.substr(0, text.find("EOF"));
  EXPECT_THROW(parse_tsplib_cvrp(broken), ParseError);
  broken = text;
  broken.replace(broken.find("3 4\n"), 4, "3 40\n");
  EXPECT_THROW(parse_tsplib_cvrp(broken), ParseError);
}

TEST(Io, BarretoRoundTrip) {
  const auto inst = small_clrp();
  auto back = parse_barreto(format_barreto(inst));
  back.network.name = inst.network.name;
  EXPECT_EQ(back, inst);
}

TEST(Io, JsonRoundTripAllKinds) {
  const auto clrp = small_clrp();
  EXPECT_EQ(std::get<ClrpInstance>(instance_from_json(to_json(clrp))), clrp);
  MdvrpInstance md = clrp.network;
  md.vehicles = {2, std::nullopt};
  EXPECT_EQ(std::get<MdvrpInstance>(instance_from_json(to_json(md))), md);
  CvrpInstance cv{"c", {1, 1}, md.customers, 6, 3};
  EXPECT_EQ(std::get<CvrpInstance>(instance_from_json(to_json(cv))), cv);
  EXPECT_THROW(instance_from_json("{\"kind\": \"other\"}"), Error);
  EXPECT_THROW(instance_from_json("{not json"), Error);
}

TEST(Io, FormatNumberRoundTrips) {
  for (double v : {0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 576.87, 1e-300, 123456789.123})
    EXPECT_EQ(std::stod(format_number(v)), v);
  EXPECT_EQ(format_number(20.0), "20");
}

TEST(Io, LoadInstanceDetectsFormats) {
  const auto dir = std::filesystem::temp_directory_path() / "hvrp_io_test";
  std::filesystem::create_directories(dir);
  const auto clrp = small_clrp();
  write_instance(clrp, dir / "a.json");
  write_instance(clrp, dir / "a.txt");
  EXPECT_EQ(load_clrp(dir / "a.json"), clrp);
  auto b = load_clrp(dir / "a.txt");
  EXPECT_EQ(b.network.name, "a");
  b.network.name = clrp.network.name;
  EXPECT_EQ(b, clrp);
  EXPECT_THROW(load_mdvrp(dir / "a.txt"), Error);
  EXPECT_THROW(load_instance(dir / "missing.txt"), Error);
  std::filesystem::remove_all(dir);
}
