#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "support/oracles.hpp"
#include "tmkit/dsl.hpp"
#include "tmkit/error.hpp"
#include "tmkit/fsm.hpp"
#include "tmkit/model.hpp"

namespace tmkit {
namespace {

using testing::enumerate_paths;
using testing::template_regex_accepts;

SModel single_path(const std::string& flow_string) {
  FlowPath path = parse_flow_string(flow_string, "T");
  return build_model(Thimac{"T", "", path.stages, {}, std::nullopt}, path.arcs);
}

std::string spell(const std::vector<StageKind>& kinds) {
  std::vector<Stage> stages;
  for (StageKind kind : kinds) stages.push_back({"", kind, "", false});
  return format_flow_string(stages);
}

bool has_rule(const std::vector<Diagnostic>& diagnostics, Rule rule) {
  return std::ranges::any_of(diagnostics,
                             [&](const Diagnostic& d) { return d.rule == rule; });
}

TEST(BuildModel, MinimalModelHasOneThimacAndOneStage) {
  Thimac x{"X", "", {{"", StageKind::create, "", false}}, {}, std::nullopt};
  SModel m = build_model(x);
  EXPECT_EQ(m.thimacs().size(), 1u);
  ASSERT_EQ(m.stages().size(), 1u);
  EXPECT_EQ(m.stages()[0].id, "X:create");
  EXPECT_EQ(m.stages()[0].owner, "X");
  EXPECT_EQ(m.root().label, "X");
}

TEST(BuildModel, AssignsOrdinalsPerKind) {
  Thimac x{"X", "", {}, {}, std::nullopt};
  for (StageKind kind : {StageKind::create, StageKind::process, StageKind::create}) {
    x.stages.push_back({"", kind, "", false});
  }
  SModel m = build_model(x);
  EXPECT_EQ(m.stages()[0].id, "X:create");
  EXPECT_EQ(m.stages()[1].id, "X:process");
  EXPECT_EQ(m.stages()[2].id, "X:create#1");
}

TEST(BuildModel, DanglingEndpointIsRejected) {
  Thimac x{"X", "", {{"", StageKind::create, "", false}}, {}, std::nullopt};
  try {
    build_model(x, {{"X:create", "X.nosuch:create", std::nullopt}});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DanglingReference);
  }
}

TEST(BuildModel, DuplicateIdsAndArcsAreRejected) {
  Thimac child{"X.A", "", {}, {}, std::nullopt};
  Thimac x{"X", "", {}, {child, child}, std::nullopt};
  try {
    build_model(x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DuplicateId);
  }

  FlowPath path = parse_flow_string("Flow.create.process", "Y");
  auto arcs = path.arcs;
  arcs.push_back(arcs.front());
  try {
    build_model(Thimac{"Y", "", path.stages, {}, std::nullopt}, arcs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DuplicateArc);
  }
}

TEST(BuildModel, ChildIdMustExtendParent) {
  Thimac x{"X", "", {}, {Thimac{"Y.A", "", {}, {}, std::nullopt}}, std::nullopt};
  try {
    build_model(x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidId);
  }
}

TEST(BuildModel, ArcsAreSortedBySourceThenTarget) {
  FlowPath path = parse_flow_string("Flow.create.process.release.transfer.output", "X");
  std::vector<FlowArc> reversed(path.arcs.rbegin(), path.arcs.rend());
  SModel m = build_model(Thimac{"X", "", path.stages, {}, std::nullopt}, reversed);
  EXPECT_TRUE(std::ranges::is_sorted(m.flows(), {}, [](const FlowArc& a) {
    return std::pair(a.src, a.dst);
  }));
}

TEST(BuildModel, TransmissionHasStateThimacs) {
  SModel m = compile_fsm_to_s(
      load_fsm_json(testing::slurp(testing::source_path("models/transmission.fsm.json"))));
  for (const char* id :
       {"Car", "Car.Transmission", "Car.Transmission.Neutral",
        "Car.Transmission.Driving.FirstGear", "Car.Transmission.Driving.SecondGear",
        "Car.Transmission.Driving.ThirdGear", "Car.Transmission.Reverse",
        "Car.Driver", "Car.Conditions"}) {
    EXPECT_NE(m.find_thimac(id), nullptr) << id;
  }
  EXPECT_EQ(m.find_thimac("Car")->label, "the car");
}

TEST(ValidateS, GenerativeSendPathIsValid) {
  EXPECT_TRUE(validate_s(single_path("Flow.create.release.transfer.output")).empty());
}

TEST(ValidateS, ExpandedInboundPathIsValid) {
  SModel m = single_path(
      "Flow.transfer.input.receive.arrive.accept.process.release.transfer.output");
  EXPECT_TRUE(validate_s(m).empty());
  EXPECT_TRUE(m.stages()[1].expanded_receive);
  EXPECT_EQ(m.stages()[1].kind, StageKind::arrive);
}

TEST(ValidateS, ReleaseBeforeCreateIsAShapeError) {
  Thimac t{"T", "", {{"", StageKind::release, "", false}, {"", StageKind::create, "", false}},
           {}, std::nullopt};
  auto diagnostics = validate_s(build_model(t, {{"T:release", "T:create", std::nullopt}}));
  ASSERT_FALSE(diagnostics.empty());
  EXPECT_TRUE(has_rule(diagnostics, Rule::path_shape));
  EXPECT_EQ(to_string(diagnostics.front().rule), "RULE_PATH_SHAPE");
}

TEST(ValidateS, TriggerOntoReleaseIsRejected) {
  FlowPath a = parse_flow_string("Flow.create", "M.A");
  FlowPath b = parse_flow_string("Flow.create.release.transfer.output", "M.B");
  Thimac m{"M", "", {},
           {Thimac{"M.A", "", a.stages, {}, std::nullopt},
            Thimac{"M.B", "", b.stages, {}, std::nullopt}},
           std::nullopt};
  auto diagnostics = validate_s(build_model(m, b.arcs, {{"M.A:create", "M.B:release"}}));
  ASSERT_EQ(diagnostics.size(), 1u);
  EXPECT_EQ(diagnostics[0].rule, Rule::trigger_target);
  EXPECT_EQ(diagnostics[0].stages,
            (std::vector<std::string>{"M.A:create", "M.B:release"}));
}

TEST(ValidateS, CrossThimacFlowMustRunOutputToInput) {
  FlowPath a = parse_flow_string("Flow.create.process", "M.A");
  FlowPath b = parse_flow_string("Flow.create", "M.B");
  Thimac m{"M", "", {},
           {Thimac{"M.A", "", a.stages, {}, std::nullopt},
            Thimac{"M.B", "", b.stages, {}, std::nullopt}},
           std::nullopt};
  auto arcs = a.arcs;
  arcs.push_back({"M.A:process", "M.B:create", std::nullopt});
  EXPECT_TRUE(has_rule(validate_s(build_model(m, arcs)), Rule::cross_flow));
}

TEST(ValidateS, CyclesSelfTriggersAndDuplicatedFlowsAreReported) {
  Thimac t{"T", "", {{"", StageKind::create, "", false}, {"", StageKind::process, "", false}},
           {}, std::nullopt};
  auto cyclic = validate_s(build_model(t, {{"T:create", "T:process", std::nullopt},
                                           {"T:process", "T:create", std::nullopt}}));
  EXPECT_TRUE(has_rule(cyclic, Rule::path_cycle));

  auto self = validate_s(build_model(t, {{"T:create", "T:process", std::nullopt}},
                                     {{"T:process", "T:process"}}));
  EXPECT_TRUE(has_rule(self, Rule::trigger_self));

  auto doubled = validate_s(build_model(t, {{"T:create", "T:process", std::nullopt}},
                                        {{"T:create", "T:process"}}));
  EXPECT_TRUE(has_rule(doubled, Rule::trigger_over_flow));
}

TEST(ValidateS, TwoPathsInOneThimacAreCheckedSeparately) {
  FlowPath out = parse_flow_string("Flow.create.release.transfer.output", "T");
  std::vector<StageKind> kinds;
  for (const Stage& s : out.stages) kinds.push_back(s.kind);
  FlowPath in = parse_flow_string("Flow.transfer.input.receive.process", "T", kinds);
  auto stages = out.stages;
  stages.insert(stages.end(), in.stages.begin(), in.stages.end());
  auto arcs = out.arcs;
  arcs.insert(arcs.end(), in.arcs.begin(), in.arcs.end());
  EXPECT_TRUE(validate_s(build_model(Thimac{"T", "", stages, {}, std::nullopt}, arcs)).empty());
}

TEST(PathTemplate, AgreesWithRegexOnEveryShortSequence) {
  std::vector<StageKind> kinds;
  std::size_t checked = 0;
  auto visit = [&](auto&& self, std::size_t length) -> void {
    if (!kinds.empty()) {
      bool contains_merged = false;
      for (std::size_t i = 1; i < kinds.size(); ++i) {
        contains_merged |= kinds[i - 1] == StageKind::receive &&
                           kinds[i] == StageKind::arrive;
      }
      // A receive followed by an arrive spells the merged form, which the
      // recognizer sees as a single arrive.
      if (!contains_merged) {
        EXPECT_EQ(PathTemplate::matches(kinds), template_regex_accepts(spell(kinds)))
            << spell(kinds);
        ++checked;
      }
    }
    if (length == 0) return;
    for (StageKind kind : kAllStageKinds) {
      kinds.push_back(kind);
      self(self, length - 1);
      kinds.pop_back();
    }
  };
  visit(visit, 5);
  EXPECT_GT(checked, 30000u);
}

class RandomModels : public ::testing::TestWithParam<int> {};

TEST_P(RandomModels, AcceptedPathsFollowTheTemplates) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()));
  for (int round = 0; round < 25; ++round) {
    SModel m = testing::random_valid_model(rng);
    ASSERT_TRUE(validate_s(m).empty()) << print_model(m);
    for (const auto& path : enumerate_paths(m)) {
      EXPECT_TRUE(template_regex_accepts(spell(path))) << spell(path);
    }
  }
}

TEST_P(RandomModels, CrossFlowsRunOutputToInput) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()) + 100);
  for (int round = 0; round < 25; ++round) {
    SModel m = testing::random_valid_model(rng);
    for (const FlowArc& arc : m.flows()) {
      if (!is_cross_thimac(m, arc)) continue;
      EXPECT_EQ(m.find_stage(arc.src)->kind, StageKind::transfer_output);
      EXPECT_EQ(m.find_stage(arc.dst)->kind, StageKind::transfer_input);
    }
  }
}

TEST_P(RandomModels, IdDepthEqualsDotCount) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()) + 200);
  for (int round = 0; round < 25; ++round) {
    SModel m = testing::random_valid_model(rng);
    auto check = [&](auto&& self, const Thimac& t, std::size_t depth) -> void {
      EXPECT_EQ(static_cast<std::size_t>(std::ranges::count(t.id, '.')), depth);
      for (const Thimac& child : t.subthimacs) self(self, child, depth + 1);
    };
    check(check, m.root(), 0);
  }
}

TEST_P(RandomModels, ValidationIsRepeatable) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()) + 300);
  for (int round = 0; round < 25; ++round) {
    SModel m = testing::random_valid_model(rng);
    // Break the model so there is something to report.
    std::vector<TriggerArc> triggers(m.triggers().begin(), m.triggers().end());
    for (const Stage& s : m.stages()) {
      if (s.kind == StageKind::release) triggers.push_back({s.id, s.id});
    }
    std::vector<FlowArc> flows(m.flows().begin(), m.flows().end());
    SModel broken = build_model(m.name(), m.root(), flows, triggers);
    EXPECT_EQ(validate_s(broken), validate_s(broken));
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomModels, ::testing::Values(1, 2, 3, 4));

}  // namespace
}  // namespace tmkit
