#include "small_country.hpp"
#include "temp_dir.hpp"
#include "sitesel/cli.hpp"
#include "sitesel/fixtures.hpp"
#include "sitesel/report.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <fstream>
#include <sstream>

using namespace sitesel;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

bool has(const std::string& text, std::string_view needle) { return text.find(needle) != std::string::npos; }

}  // namespace

TEST(Cli, GeneratePublishedAndEvaluate) {
  testdata::TempDir dir;
  const auto gen = run({"generate", "published", "--chain", "lidl", "-o", dir.path().string()});
  ASSERT_EQ(gen.code, 0) << gen.err;
  const auto manifest = (dir / "manifest.json").string();
  EXPECT_TRUE(has(gen.out, "manifest.json"));

  const auto ev = run({"evaluate", "-m", manifest, "-u", (dir / "urp.json").string()});
  ASSERT_EQ(ev.code, 0) << ev.err;
  EXPECT_TRUE(has(ev.out, "universe: 1704 sites"));
  EXPECT_TRUE(has(ev.out, "lidl  ")) << ev.out;
  for (const char* n : {" 428 ", " 25 ", " 412 ", " 839 ", "94.5 %"}) EXPECT_TRUE(has(ev.out, n)) << n << "\n" << ev.out;
  EXPECT_TRUE(has(ev.out, "overall: 428 of 453"));

  const auto csv = run({"evaluate", "-m", manifest, "-u", (dir / "urp.json").string(), "-f", "csv"});
  EXPECT_TRUE(has(csv.out, "lidl,428,25,412,839,94.5 %,412,"));

  const auto json = run({"evaluate", "-m", manifest, "-u", (dir / "urp.json").string(), "-f", "json"});
  const auto doc = nlohmann::json::parse(json.out);
  EXPECT_EQ(doc["chains"][0]["contingency"]["store_unfulfilled"], 25);
  EXPECT_EQ(doc["universe"], 1704);
}

TEST(Cli, JsonOutputIsByteIdentical) {
  testdata::TempDir dir;
  ASSERT_EQ(run({"generate", "country", "-o", dir.path().string(), "--municipalities", "120"}).code, 0);
  const std::vector<std::string> args{"recommend", "-m", (dir / "manifest.json").string(), "-u",
                                      (dir / "urp.json").string(), "-n", "10", "-f", "json"};
  const auto a = run(args), b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto doc = nlohmann::json::parse(a.out);
  EXPECT_EQ(doc["results"].size(), 10u);
  EXPECT_EQ(doc["year"], 2016);

  // same seed, fresh directory: same data, same version
  testdata::TempDir other;
  ASSERT_EQ(run({"generate", "country", "-o", other.path().string(), "--municipalities", "120"}).code, 0);
  auto moved = args;
  moved[2] = (other / "manifest.json").string();
  moved[4] = (other / "urp.json").string();
  EXPECT_EQ(run(moved).out, a.out);
}

TEST(Cli, RecommendTableAndCsv) {
  testdata::TempDir dir;
  ASSERT_EQ(run({"generate", "country", "-o", dir.path().string(), "--municipalities", "60"}).code, 0);
  const auto m = (dir / "manifest.json").string(), u = (dir / "urp.json").string();
  const auto table = run({"recommend", "-m", m, "-u", u, "--top", "3"});
  ASSERT_EQ(table.code, 0) << table.err;
  EXPECT_TRUE(has(table.out, "rank "));
  EXPECT_TRUE(has(table.out, "\n1 "));
  EXPECT_TRUE(has(table.out, "purchasing power"));
  const auto csv = run({"recommend", "-m", m, "-u", u, "-n", "3", "-f", "csv", "--latest"});
  ASSERT_EQ(csv.code, 0) << csv.err;
  std::istringstream lines(csv.out);
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) ++n;
  EXPECT_EQ(n, 4);
  // no data for the year: every candidate is eliminated
  const auto empty = run({"recommend", "-m", m, "-u", u, "-y", "1990", "-f", "json"});
  EXPECT_EQ(empty.code, 0);
  EXPECT_TRUE(nlohmann::json::parse(empty.out)["results"].empty());
  EXPECT_EQ(run({"recommend", "-m", m, "-u", u, "-y", "2016", "--latest"}).code, 2);
}

TEST(Cli, CorrelateAndProfile) {
  testdata::TempDir dir;
  ASSERT_EQ(run({"generate", "country", "-o", dir.path().string()}).code, 0);
  const auto m = (dir / "manifest.json").string();
  const auto corr = run({"correlate", "-m", m, "--latest", "--factor", "inhabitants", "--factor", "land_price",
                         "--presence", "beta", "-f", "json"});
  ASSERT_EQ(corr.code, 0) << corr.err;
  const auto doc = nlohmann::json::parse(corr.out);
  EXPECT_EQ(doc["labels"][0], "beta");
  EXPECT_GT(doc["matrix"][0][1].get<double>(), 0.95);
  EXPECT_LT(std::abs(doc["matrix"][0][2].get<double>()), 0.3);
  EXPECT_EQ(doc["sites"], 200);

  const auto csv = run({"correlate", "-m", m, "--year", "2016", "--all-presence", "--index", "-f", "csv"});
  ASSERT_EQ(csv.code, 0) << csv.err;
  EXPECT_TRUE(has(csv.out, "attribute,alpha,beta,delta,purchasing_power_index\n"));

  const auto prof = run({"profile", "-m", m, "--year", "2016"});
  ASSERT_EQ(prof.code, 0) << prof.err;
  for (const char* s : {"any chain", "no chain", "delta"}) EXPECT_TRUE(has(prof.out, s)) << s << "\n" << prof.out;
  EXPECT_EQ(run({"correlate", "-m", m, "--year", "2016", "--factor", "inhabitants"}).code, 2);
}

TEST(Cli, IngestReport) {
  testdata::TempDir dir;
  ASSERT_EQ(run({"generate", "country", "-o", dir.path().string(), "--municipalities", "40"}).code, 0);
  const auto manifest = (dir / "manifest.json").string();
  const auto ok = run({"ingest", "-m", manifest});
  EXPECT_EQ(ok.code, 0) << ok.err;
  EXPECT_TRUE(has(ok.out, "version"));
  EXPECT_FALSE(has(ok.out, "warning: "));
  EXPECT_EQ(run({"ingest", "-m", manifest, "--strict"}).code, 0);

  // a value for an unknown site is a warning, not an error
  std::ofstream(dir / "factors/land_price.csv", std::ios::app) << "DE.09.001.0001,2016,70\n";
  const auto warned = run({"ingest", "-m", manifest});
  EXPECT_EQ(warned.code, 0);
  EXPECT_TRUE(has(warned.out, "warning: "));
  EXPECT_EQ(run({"ingest", "-m", manifest, "--strict"}).code, 1);
  const auto json = run({"ingest", "-m", manifest, "-f", "json"});
  EXPECT_FALSE(nlohmann::json::parse(json.out)["warnings"].empty());

  dir.write("hierarchy.csv", "code,name,level,parent\nDE,de,Nation,\nDE.X,x,Municipality,DE\n");
  EXPECT_EQ(run({"ingest", "-m", manifest}).code, 2);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"evaluate", "-m", "/nonexistent/manifest.json", "-u", "x.json"}).code, 2);
  EXPECT_EQ(run({"ingest", "--bogus"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  const auto help = run({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_TRUE(has(help.out, "recommend"));
  testdata::TempDir dir;
  EXPECT_EQ(run({"generate", "published", "--chain", "aldi", "-o", dir.path().string()}).code, 2);
}

TEST(Cli, EvaluatePerChainProfiles) {
  testdata::TempDir dir;
  const auto manifest = write_dataset(testdata::small_country(), dir.path()).string();
  auto big = threshold_profile({"N"}, "Municipality", 2016, "inhabitants", Comparator::Ge, 14000);
  std::ofstream(dir / "big.json") << to_json(big).dump();
  big.criteria[0].predicate->threshold = 5000;
  std::ofstream(dir / "mid.json") << to_json(big).dump();
  const auto r = run({"evaluate", "-m", manifest, "--chain-urp", "a=" + (dir / "big.json").string(), "--chain-urp",
                      "b=" + (dir / "mid.json").string(), "-f", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(has(r.out, "a,14,0,0,13,100.0 %,0,0\n")) << r.out;
  EXPECT_TRUE(has(r.out, "b,5,4,18,0,55.6 %,18,4\n")) << r.out;
  EXPECT_EQ(run({"evaluate", "-m", manifest, "--chain-urp", "a"}).code, 2);
  EXPECT_EQ(run({"evaluate", "-m", manifest, "-u", (dir / "big.json").string(), "-c", "zz"}).code, 2);
}
