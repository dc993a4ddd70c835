#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cellkit/io/config.hpp"
#include "cellkit/io/output.hpp"

using namespace cellkit;
using namespace cellkit::io;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool mentions(const SchemaError& e, const std::string& what) {
  for (const auto& v : e.violations())
    if (v.find(what) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST(Config, MinimalFileFillsDefaults) {
  const auto c = parse_config_text("[physics]\nconc_solid_max = 31000\n");
  const auto p = c.physics();
  const auto r = model::PhysicalParameters::reference(31000);
  EXPECT_EQ(p.conc_solid_max, r.conc_solid_max);
  EXPECT_EQ(p.conc_solid_init, r.conc_solid_init);
  EXPECT_EQ(p.conc_electrolyte_init, r.conc_electrolyte_init);
  EXPECT_EQ(p.faraday, r.faraday);
  EXPECT_EQ(p.gas_constant, r.gas_constant);
  EXPECT_EQ(p.temperature, r.temperature);
  EXPECT_EQ(p.len_electrolyte, r.len_electrolyte);
  EXPECT_EQ(p.len_active, r.len_active);
  EXPECT_EQ(p.len_collector, r.len_collector);
  EXPECT_EQ(p.diff_electrolyte, r.diff_electrolyte);
  EXPECT_EQ(p.diff_active, r.diff_active);
  EXPECT_EQ(p.cond_ionic, r.cond_ionic);
  EXPECT_EQ(p.cond_active, r.cond_active);
  EXPECT_EQ(p.cond_collector, r.cond_collector);
  EXPECT_EQ(p.transference, r.transference);
  EXPECT_EQ(p.activity_deriv, r.activity_deriv);
  EXPECT_EQ(p.rate_const_scaled, r.rate_const_scaled);
  EXPECT_EQ(p.exch_current_li, r.exch_current_li);
  EXPECT_EQ(p.sinh_guard, r.sinh_guard);
  EXPECT_EQ(p.ocp(0.4), r.ocp(0.4));
  EXPECT_EQ(c.cells(), 200);
  EXPECT_EQ(c.solver().scheme, "radau_iia3");
  EXPECT_FALSE(c.coupled());
  EXPECT_EQ(c.output_dir(), "out");
}

TEST(Config, EchoListsDefaultsAndReparses) {
  const auto c = parse_config_text("[physics]\nconc_solid_max = 31000\n[grid]\ncells = 40\n");
  const auto echo = c.echo();
  EXPECT_NE(echo.find("cells = 40"), std::string::npos);
  EXPECT_NE(echo.find("temperature = 298.15"), std::string::npos);
  EXPECT_NE(echo.find("(default)"), std::string::npos);
  const auto again = parse_config_text(echo);
  EXPECT_EQ(again.cells(), 40);
  EXPECT_EQ(again.physics().conc_solid_max, 31000.0);
}

TEST(Config, UnknownKeyIsNamedWithLine) {
  try {
    parse_config_text("[physics]\nconc_solid_max = 31000\n\n[solver]\nrtoll = 1e-6\n");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_TRUE(mentions(e, "rtoll"));
    EXPECT_TRUE(mentions(e, "line 5"));
  }
}

TEST(Config, MissingMaximumConcentrationIsSchemaError) {
  try {
    parse_config_text("[grid]\ncells = 40\n");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_TRUE(mentions(e, "conc_solid_max"));
  }
}

TEST(Config, CollectsEveryViolation) {
  try {
    parse_config_text("[physics]\ntemperature = hot\n[bogus]\nx = 1\n[mode]\nkind = pulse\n[coupling]\norder = 7\n");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_TRUE(mentions(e, "temperature"));
    EXPECT_TRUE(mentions(e, "[bogus]"));
    EXPECT_TRUE(mentions(e, "pulse"));
    EXPECT_TRUE(mentions(e, "conc_solid_max"));
    EXPECT_GE(e.violations().size(), 4u);
  }
}

TEST(Config, CrossSectionChecks) {
  try {
    parse_config_text("[physics]\nconc_solid_max = 31000\n[mode]\nkind = cv\n[coupling]\norder = 9\n");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_TRUE(mentions(e, "mode.voltage"));
    EXPECT_TRUE(mentions(e, "order"));
  }
}

TEST(Config, SyntaxErrorCarriesLine) {
  try {
    parse_config_text("[physics]\nconc_solid_max = 31000\nthis line has no equals sign\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(Config, StudyOverridesReachSpecs) {
  const auto c = parse_config_text(
      "[physics]\nconc_solid_max = 31000\n[study]\ngrids = 8, 16\nmodes = explicit\norders = 1,2\ncase = sine\n");
  EXPECT_EQ(c.conditioning_spec().grids, (std::vector<int>{8, 16}));
  EXPECT_EQ(c.coupling_spec().modes.size(), 1u);
  EXPECT_EQ(c.coupling_spec().orders, (std::vector<int>{1, 2}));
  EXPECT_EQ(c.work_precision_spec().case_name, "sine");
  EXPECT_EQ(c.space_spec().times, studies::SpaceConvergenceSpec{}.times);
}

TEST(Config, CouplingTimesAreScaled) {
  const auto c = parse_config_text("[physics]\nconc_solid_max = 31000\n[coupling]\ndt_c_init = 1.6\n");
  EXPECT_DOUBLE_EQ(c.coupling(16.0).dt_c_init, 0.1);
}

TEST(Config, HashFollowsText) {
  const auto a = parse_config_text("[physics]\nconc_solid_max = 31000\n");
  const auto b = parse_config_text("[physics]\nconc_solid_max = 31000\n");
  const auto c = parse_config_text("[physics]\nconc_solid_max = 32000\n");
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_NE(a.hash(), c.hash());
  EXPECT_EQ(a.hash().size(), 64u);
}

TEST(Csv, QuotesFieldsThatNeedIt) {
  CsvTable t({"name", "value"});
  t.add({"plain", 1.5});
  t.add({"a,b", 2});
  t.add({"say \"hi\"", true});
  EXPECT_EQ(t.str(), "name,value\r\nplain,1.5\r\n\"a,b\",2\r\n\"say \"\"hi\"\"\",true\r\n");
  EXPECT_THROW(t.add({1.0}), Error);
}

TEST(Csv, DoublesRoundTrip) {
  const double x = 0.1 + 0.2;
  EXPECT_EQ(std::stod(Cell(x).text()), x);
}

TEST(Output, AtomicWriteLeavesNoTemporaries) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "cellkit_io_test";
  fs::remove_all(dir);
  OutputSet out(dir / "nested");
  out.write("a.csv", std::string("x\r\n1\r\n"));
  out.write("a.csv", std::string("x\r\n2\r\n"));
  out.write_manifest({{"subcommand", "test"}});
  EXPECT_EQ(slurp(dir / "nested" / "a.csv"), "x\r\n2\r\n");
  int entries = 0;
  for (const auto& e : fs::directory_iterator(dir / "nested")) {
    EXPECT_EQ(e.path().string().find(".tmp-"), std::string::npos);
    ++entries;
  }
  EXPECT_EQ(entries, 2);
  const auto manifest = nlohmann::json::parse(slurp(dir / "nested" / "manifest.json"));
  EXPECT_EQ(manifest["subcommand"], "test");
  EXPECT_TRUE(manifest["versions"].contains("eigen"));
  fs::remove_all(dir);
}
