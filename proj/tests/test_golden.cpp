#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support/oracles.hpp"
#include "tmkit/cli.hpp"

// Each case runs one CLI invocation and compares stdout with a file under
// testdata/golden. Set UPDATE_GOLDEN=1 to rewrite the files.

namespace tmkit {
namespace {

using testing::source_path;

struct GoldenCase {
  std::string name;
  std::vector<std::string> args;  // model and script paths relative to the tree
};

std::vector<GoldenCase> cases() {
  const std::vector<std::pair<std::string, std::string>> models{
      {"transmission", "models/transmission.fsm.json"},
      {"transmission_tm", "models/transmission.tm"},
      {"transmission_uml", "models/transmission_uml.fsm.json"},
      {"toggle", "models/toggle.fsm.json"},
      {"phone", "models/phone.tm"}};
  std::vector<GoldenCase> out;
  for (const auto& [stem, model] : models) {
    for (const char* command : {"check", "decompose", "order", "events"}) {
      out.push_back({stem + "." + command, {command, model}});
    }
    for (const char* stage : {"s", "d"}) {
      out.push_back({stem + ".render_" + stage, {"render", model, "--stage", stage}});
    }
  }
  for (const char* script : {"empty", "first", "first_second", "tour", "dropped"}) {
    std::string path = std::string("models/scripts/") + script + ".script";
    out.push_back({std::string("transmission.simulate_") + script,
                   {"simulate", "models/transmission.fsm.json", "--script", path}});
  }
  out.push_back({"transmission.render_b_tour",
                 {"render", "models/transmission.fsm.json", "--stage", "b", "--script",
                  "models/scripts/tour.script"}});
  out.push_back({"transmission.simulate_tour_truncated",
                 {"simulate", "models/transmission.fsm.json", "--script",
                  "models/scripts/tour.script", "--max-ticks", "12"}});
  return out;
}

class Golden : public ::testing::TestWithParam<GoldenCase> {};

TEST_P(Golden, MatchesStoredOutput) {
  const GoldenCase& c = GetParam();
  std::vector<std::string> args = c.args;
  for (std::string& a : args) {
    if (a.starts_with("models/")) a = source_path(a);
  }
  std::ostringstream out, err;
  ASSERT_EQ(run_cli(args, out, err), 0) << err.str();

  std::filesystem::path file = source_path("testdata/golden/" + c.name + ".txt");
  const char* update = std::getenv("UPDATE_GOLDEN");
  if (update && std::string(update) == "1") {
    std::filesystem::create_directories(file.parent_path());
    std::ofstream(file, std::ios::binary) << out.str();
    GTEST_SKIP() << "rewrote " << file;
  }
  ASSERT_TRUE(std::filesystem::exists(file)) << file << " missing; run with UPDATE_GOLDEN=1";
  EXPECT_EQ(out.str(), testing::slurp(file.string()));
}

INSTANTIATE_TEST_SUITE_P(Cli, Golden, ::testing::ValuesIn(cases()),
                         [](const ::testing::TestParamInfo<GoldenCase>& info) {
                           std::string name = info.param.name;
                           for (char& ch : name) {
                             if (ch == '.') ch = '_';
                           }
                           return name;
                         });

}  // namespace
}  // namespace tmkit
