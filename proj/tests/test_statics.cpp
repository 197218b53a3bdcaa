#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "support/oracles.hpp"
#include "tmkit/dsl.hpp"
#include "tmkit/error.hpp"
#include "tmkit/fsm.hpp"
#include "tmkit/statics.hpp"

namespace tmkit {
namespace {

using testing::slurp;
using testing::source_path;

SModel transmission() {
  return compile_fsm_to_s(load_fsm_json(slurp(source_path("models/transmission.fsm.json"))));
}

std::map<ChangeKind, int> kind_counts(const std::vector<StaticChange>& changes) {
  std::map<ChangeKind, int> counts;
  for (const StaticChange& c : changes) ++counts[c.kind];
  return counts;
}

const StaticChange& by_id(const std::vector<StaticChange>& changes, std::string_view id) {
  auto it = std::ranges::find(changes, id, &StaticChange::id);
  if (it == changes.end()) throw std::runtime_error("no change " + std::string(id));
  return *it;
}

ErrorCode region_error(const SModel& m, const std::vector<std::vector<std::string>>& regions) {
  try {
    decompose_with_regions(m, regions);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "regions accepted";
  return ErrorCode::Io;
}

std::vector<std::vector<std::string>> regions_of(const std::vector<StaticChange>& changes) {
  std::vector<std::vector<std::string>> out;
  for (const StaticChange& c : changes) out.push_back(c.stages);
  return out;
}

void expect_partition_and_reconstruction(const SModel& m,
                                         const std::vector<StaticChange>& changes) {
  EXPECT_EQ(testing::decomposition_violation(m, changes), "");
}

TEST(Decompose, TransmissionHasTwentyTwoChanges) {
  auto changes = decompose(transmission());
  ASSERT_EQ(changes.size(), 22u);
  auto counts = kind_counts(changes);
  EXPECT_EQ(counts[ChangeKind::init], 1);
  EXPECT_EQ(counts[ChangeKind::ready], 1);
  EXPECT_EQ(counts[ChangeKind::stimulus], 8);
  EXPECT_EQ(counts[ChangeKind::shift], 8);
  EXPECT_EQ(counts[ChangeKind::condition], 4);
  EXPECT_EQ(counts[ChangeKind::statePath], 0);
}

TEST(Decompose, ShiftIsReleaseTransferTransferReceive) {
  auto changes = decompose(transmission());
  const StaticChange& shift = by_id(changes, "shift.FirstGear.SecondGear");
  EXPECT_EQ(shift.kind, ChangeKind::shift);
  EXPECT_EQ(shift.stages, (std::vector<std::string>{
                              "Car.Transmission.Driving.FirstGear:release#1",
                              "Car.Transmission.Driving.FirstGear:transfer(output)#1",
                              "Car.Transmission.Driving.SecondGear:receive#2",
                              "Car.Transmission.Driving.SecondGear:transfer(input)#2"}));
  EXPECT_EQ(shift.label, "Shifting from first to second");
  EXPECT_EQ(shift.source_state, "Car.Transmission.Driving.FirstGear");
  EXPECT_EQ(shift.target_state, "Car.Transmission.Driving.SecondGear");
}

TEST(Decompose, NamesFollowTheEventPhrasing) {
  auto changes = decompose(transmission());
  EXPECT_EQ(by_id(changes, "init").label, "Starting the car");
  EXPECT_EQ(by_id(changes, "ready.Neutral").label, "Neutral is ready");
  EXPECT_EQ(by_id(changes, "condition.Reverse").label, "Driving in reverse");
  const StaticChange& select = by_id(changes, "stimulus.Neutral.selectFirst");
  EXPECT_EQ(select.label, "Selecting from neutral to first");
  EXPECT_EQ(select.stimulus, "selectFirst");
  EXPECT_EQ(select.source_state, "Car.Transmission.Neutral");
}

TEST(Decompose, SinglePathIsOneChange) {
  FlowPath p = parse_flow_string("Flow.create.process", "X");
  auto changes = decompose(build_model(Thimac{"X", "", p.stages, {}, std::nullopt}, p.arcs));
  ASSERT_EQ(changes.size(), 1u);
  EXPECT_EQ(changes[0].kind, ChangeKind::statePath);
  EXPECT_EQ(changes[0].id, "path.X");
}

TEST(Decompose, PhoneCallIsOneChange) {
  auto changes = decompose(parse_model(slurp(source_path("models/phone.tm"))));
  ASSERT_EQ(changes.size(), 1u);
  EXPECT_EQ(changes[0].label, "A phoned B");
  EXPECT_EQ(changes[0].stages.size(), 6u);
}

TEST(Decompose, InvalidModelIsRefused) {
  Thimac t{"T", "", {{"", StageKind::release, "", false}}, {}, std::nullopt};
  try {
    decompose(build_model(t));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnvalidatedModel);
  }
}

TEST(Decompose, RandomMachinesFollowTheCountLaw) {
  std::mt19937_64 rng(3);
  for (int round = 0; round < 200; ++round) {
    FsmSpec spec = testing::random_fsm(rng);
    SModel m = compile_fsm_to_s(spec);
    auto changes = decompose(m);
    std::size_t conditions = 0;
    for (const Thimac* t : m.thimacs()) conditions += t->id.starts_with("M.Conditions.");
    EXPECT_EQ(changes.size(), 2 + 2 * spec.transitions.size() + conditions);
    expect_partition_and_reconstruction(m, changes);
  }
}

TEST(Decompose, RandomModelsArePartitioned) {
  std::mt19937_64 rng(8);
  for (int round = 0; round < 200; ++round) {
    SModel m = testing::random_valid_model(rng);
    auto changes = decompose(m);
    expect_partition_and_reconstruction(m, changes);
    std::set<std::string> ids;
    for (const StaticChange& c : changes) EXPECT_TRUE(ids.insert(c.id).second) << c.id;
  }
}

TEST(DecomposeWithRegions, WholeModelAsOneRegion) {
  SModel phone = parse_model(slurp(source_path("models/phone.tm")));
  std::vector<std::string> all;
  for (const Stage& s : phone.stages()) all.push_back(s.id);
  auto changes = decompose_with_regions(phone, {all});
  ASSERT_EQ(changes.size(), 1u);
  EXPECT_EQ(changes[0].stages.size(), phone.stages().size());
  EXPECT_EQ(changes[0].arcs.size(), phone.flows().size());

  // A state's outgoing paths hang off its stimuli, not its hub, so the
  // transmission as a whole is not one connected piece.
  SModel m = transmission();
  all.clear();
  for (const Stage& s : m.stages()) all.push_back(s.id);
  EXPECT_EQ(region_error(m, {all}), ErrorCode::DisconnectedRegion);
}

TEST(DecomposeWithRegions, DefaultRegionsGiveTheDefaultResult) {
  SModel m = transmission();
  auto changes = decompose(m);
  EXPECT_EQ(decompose_with_regions(m, regions_of(changes)), changes);
  EXPECT_EQ(decompose_with_regions(m, parse_regions(format_regions(changes))), changes);
}

TEST(DecomposeWithRegions, BadDivisionsAreNamed) {
  SModel m = transmission();
  auto regions = regions_of(decompose(m));

  auto overlapping = regions;
  overlapping[1].push_back(overlapping[0].front());
  EXPECT_EQ(region_error(m, overlapping), ErrorCode::OverlappingRegions);

  auto uncovered = regions;
  uncovered.pop_back();
  EXPECT_EQ(region_error(m, uncovered), ErrorCode::UncoveredStage);

  std::vector<std::vector<std::string>> joined{regions[0]};
  joined[0].insert(joined[0].end(), regions[2].begin(), regions[2].end());
  for (std::size_t i = 1; i < regions.size(); ++i) {
    if (i != 2) joined.push_back(regions[i]);
  }
  // condition.FirstGear and condition.SecondGear touch no common arc.
  EXPECT_EQ(region_error(m, joined), ErrorCode::DisconnectedRegion);

  auto dangling = regions;
  dangling[0].push_back("Car.Nowhere:create");
  EXPECT_EQ(region_error(m, dangling), ErrorCode::DanglingReference);
}

TEST(RegionFile, CommentsAndOrdinals) {
  auto regions = parse_regions(
      "# a comment line\n"
      "A:create, A:process#1  # trailing\n"
      "\n"
      "B:transfer(input)#2,B:receive\n");
  ASSERT_EQ(regions.size(), 2u);
  EXPECT_EQ(regions[0], (std::vector<std::string>{"A:create", "A:process#1"}));
  EXPECT_EQ(regions[1], (std::vector<std::string>{"B:transfer(input)#2", "B:receive"}));
}

TEST(OrderChanges, SelectPrecedesShiftPrecedesCondition) {
  SModel m = transmission();
  DModel d = order_changes(m, decompose(m));
  EXPECT_TRUE(d.precedence.contains({"stimulus.Neutral.selectFirst", "shift.Neutral.FirstGear"}));
  EXPECT_TRUE(d.precedence.contains({"shift.Neutral.FirstGear", "condition.FirstGear"}));
  EXPECT_TRUE(d.precedence.contains({"init", "ready.Neutral"}));
  EXPECT_TRUE(std::ranges::is_sorted(d.changes, {}, &StaticChange::id));
}

TEST(OrderChanges, SingleChangeHasNoPrecedence) {
  FlowPath p = parse_flow_string("Flow.create", "X");
  SModel m = build_model(Thimac{"X", "", p.stages, {}, std::nullopt});
  DModel d = order_changes(m, decompose(m));
  EXPECT_EQ(d.changes.size(), 1u);
  EXPECT_TRUE(d.precedence.empty());
}

TEST(OrderChanges, ChainClosureMatchesReachability) {
  SModel m = parse_model(
      "model Chain\n"
      "thimac Chain {\n"
      "  thimac A {\n    path Flow.create.process\n  }\n"
      "  thimac B {\n    path Flow.create.process\n  }\n"
      "  thimac C {\n    path Flow.create.process\n  }\n"
      "}\n"
      "trigger Chain.A:process -> Chain.B:create\n"
      "trigger Chain.B:process -> Chain.C:create\n");
  std::vector<std::vector<std::string>> regions{
      {"Chain.A:create", "Chain.A:process"},
      {"Chain.B:create", "Chain.B:process"},
      {"Chain.C:create", "Chain.C:process"}};
  DModel d = order_changes(m, decompose_with_regions(m, regions));
  ASSERT_EQ(d.changes.size(), 3u);
  std::map<std::string, std::string> id_of;
  for (const StaticChange& change : d.changes) id_of[change.stages.front()] = change.id;
  std::string ia = id_of.at("Chain.A:create");
  std::string ib = id_of.at("Chain.B:create");
  std::string ic = id_of.at("Chain.C:create");
  EXPECT_EQ(d.precedence, (std::set<ChangePair>{{ia, ib}, {ib, ic}}));
  EXPECT_EQ(testing::transitive_closure(d.precedence),
            (std::set<ChangePair>{{ia, ib}, {ib, ic}, {ia, ic}}));
}

TEST(OrderChanges, PrecedenceEqualsArcScan) {
  std::mt19937_64 rng(21);
  for (int round = 0; round < 100; ++round) {
    SModel m = compile_fsm_to_s(testing::random_fsm(rng));
    auto changes = decompose(m);
    DModel d = order_changes(m, changes);
    EXPECT_EQ(d.precedence, testing::scan_inter_change_arcs(m, changes));
  }
}

TEST(Simultaneous, ChangesTriggeredFromOneStage) {
  SModel m = parse_model(
      "model Fan\n"
      "thimac Fan {\n"
      "  thimac A {\n    path Flow.create.process\n  }\n"
      "  thimac B {\n    path Flow.create\n  }\n"
      "  thimac C {\n    path Flow.create\n  }\n"
      "}\n"
      "trigger Fan.A:process -> Fan.B:create\n"
      "trigger Fan.A:process -> Fan.C:create\n");
  DModel d = order_changes(m, decompose(m));
  ASSERT_EQ(d.changes.size(), 3u);
  auto pairs = simultaneous(d);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs.begin()->first, "ready.B");
  EXPECT_EQ(pairs.begin()->second, "ready.C");
}

}  // namespace
}  // namespace tmkit
