#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "bamsim/bam_config.hpp"
#include "bamsim/link_state.hpp"
#include "bamsim/rng.hpp"
#include "bamsim/types.hpp"
#include "oracle.hpp"

using namespace bamsim;

namespace {

FlowRequest req(FlowId id, int cls, Bandwidth b) {
  return FlowRequest{id, cls, b, 0.0, 1.0};
}

// Wide link shared by the frozen examples below.
BamConfigSet wide_configs() {
  return BamConfigSet(100, {50, 30, 20}, {50, 80, 100}, {50, 30, 20});
}

// Small link used by the exhaustive walk and the fuzz.
BamConfigSet small_configs() {
  return BamConfigSet(10, {6, 5, 4}, {5, 8, 10}, {5, 3, 2});
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  REQUIRE(false);
  return ErrorCode::BadState;
}

}  // namespace

TEST_CASE("per-class caps govern admission under hard partitioning") {
  LinkState link(wide_configs(), BamKind::MAM);

  auto first = link.decide(req(1, 0, 40));
  CHECK(first.verdict == Verdict::Admit);
  CHECK(first.victims.empty());
  link.apply(req(1, 0, 40), first);
  CHECK(link.used(0) == 40);
  CHECK(link.used_total() == 40);

  auto second = link.decide(req(2, 0, 15));
  CHECK(second.verdict == Verdict::Reject);
  CHECK(second.reason == RejectReason::ClassCap);
  link.apply(req(2, 0, 15), second);  // rejected apply is a no-op
  CHECK(link.used_total() == 40);

  // The partition never produces victims: room in another class is unusable.
  CHECK(link.admit(req(3, 1, 30)).verdict == Verdict::Admit);
  CHECK(link.decide(req(4, 1, 1)).verdict == Verdict::Reject);
  CHECK(link.decide(req(4, 1, 1)).reason == RejectReason::ClassCap);
}

TEST_CASE("nested caps admit high classes by evicting lower ones") {
  LinkState link(wide_configs(), BamKind::RDM);
  for (FlowId id = 1; id <= 9; ++id) {
    REQUIRE(link.admit(req(id, 2, 10)).verdict == Verdict::Admit);
  }
  REQUIRE(link.used(2) == 90);

  auto d = link.decide(req(10, 0, 20));
  CHECK(d.verdict == Verdict::AdmitWithPreemption);
  // One ten-unit low-class flow covers the deficit; the newest one goes.
  CHECK(d.victims == std::vector<FlowId>{9});
  link.apply(req(10, 0, 20), d);
  CHECK(link.used(0) == 20);
  CHECK(link.used(2) == 80);
  CHECK(link.used_total() == 100);

  // Preemption never helps when a ceiling at or below the class is full.
  auto over = link.decide(req(11, 2, 5));
  CHECK(over.verdict == Verdict::Reject);
  CHECK(over.reason == RejectReason::TotalCapacity);
}

TEST_CASE("idle shares are lent out and reclaimed by rewriting the ledger") {
  LinkState link(wide_configs(), BamKind::ATCS);
  REQUIRE(link.admit(req(1, 2, 20)).verdict == Verdict::Admit);

  auto loan = link.decide(req(2, 2, 30));
  CHECK(loan.verdict == Verdict::Admit);
  CHECK(loan.lender == std::optional<int>(0));
  CHECK_FALSE(loan.ledger_rewrite);
  link.apply(req(2, 2, 30), loan);
  CHECK(link.share_load(0) == 30);
  CHECK(link.share_load(2) == 20);

  // Native arrival that only fits once the loan moves to another share.
  auto d = link.decide(req(3, 0, 40));
  CHECK(d.verdict == Verdict::Admit);
  CHECK(d.lender == std::nullopt);
  CHECK(d.ledger_rewrite);
  link.apply(req(3, 0, 40), d);
  CHECK(link.used_total() == 90);
  CHECK(link.allocations().at(2).budget_class() == 1);  // loan migrated
  CHECK(link.allocations().at(3).budget_class() == 0);
  CHECK(link.share_load(0) == 40);
  CHECK(link.share_load(1) == 30);
  CHECK(link.share_load(2) == 20);
  CHECK(link.invariant_violation() == std::nullopt);
}

TEST_CASE("native arrivals preempt loans and stay native afterwards") {
  LinkState link(small_configs(), BamKind::ATCS);  // shares (5, 3, 2)
  REQUIRE(link.admit(req(1, 0, 3)).verdict == Verdict::Admit);
  REQUIRE(link.admit(req(2, 2, 2)).verdict == Verdict::Admit);
  auto borrowed = link.admit(req(3, 2, 3));
  REQUIRE(borrowed.verdict == Verdict::Admit);
  REQUIRE(borrowed.lender == std::optional<int>(1));

  auto d = link.decide(req(4, 0, 4));
  CHECK(d.verdict == Verdict::AdmitWithPreemption);
  CHECK(d.victims == std::vector<FlowId>{3});
  CHECK(d.ledger_rewrite);
  link.apply(req(4, 0, 4), d);
  CHECK_FALSE(link.has_flow(3));
  CHECK(link.allocations().at(4).budget_class() == 0);  // new flow kept native
  CHECK(link.allocations().at(1).budget_class() == 1);  // older one now borrows
  CHECK(link.invariant_violation() == std::nullopt);
}

TEST_CASE("release restores the previous state exactly") {
  LinkState link(wide_configs(), BamKind::RDM);
  REQUIRE(link.admit(req(1, 1, 25)).verdict == Verdict::Admit);
  LinkState before = link;

  REQUIRE(link.admit(req(2, 2, 40)).verdict == Verdict::Admit);
  link.release(2);
  CHECK(link == before);

  link.release(1);
  CHECK(link.used_total() == 0);
  CHECK(link.flow_count() == 0);
}

TEST_CASE("releasing a borrowed allocation returns the lent share") {
  LinkState link(wide_configs(), BamKind::ATCS);
  REQUIRE(link.admit(req(1, 2, 20)).verdict == Verdict::Admit);
  LinkState before = link;

  auto loan = link.admit(req(2, 2, 30));
  REQUIRE(loan.lender == std::optional<int>(0));
  REQUIRE(link.share_load(0) == 30);
  link.release(2);
  CHECK(link.share_load(0) == 0);
  CHECK(link == before);
}

TEST_CASE("switching models evicts just enough to satisfy the target") {
  LinkState link(wide_configs(), BamKind::RDM);
  for (FlowId id = 1; id <= 9; ++id) {
    REQUIRE(link.admit(req(id, 2, 10)).verdict == Verdict::Admit);
  }

  SUBCASE("switch to the active model changes nothing") {
    LinkState before = link;
    auto victims = link.switch_to(BamKind::RDM, SwitchMode::EnforceNew);
    CHECK(victims.empty());
    CHECK(link == before);
  }

  SUBCASE("enforcing the new model preempts the newest surplus flows") {
    auto victims = link.switch_to(BamKind::MAM, SwitchMode::EnforceNew);
    // used[2] = 90 must come down to the 20-unit class cap: seven flows go.
    CHECK(victims == std::vector<FlowId>({3, 4, 5, 6, 7, 8, 9}));
    CHECK(link.active_bam() == BamKind::MAM);
    CHECK(link.used(2) == 20);
    CHECK(link.invariant_violation() == std::nullopt);
  }

  SUBCASE("grandfathering keeps every flow and reports the violation") {
    auto victims = link.switch_to(BamKind::MAM, SwitchMode::KeepAll);
    CHECK(victims.empty());
    CHECK(link.flow_count() == 9);
    CHECK(link.active_bam() == BamKind::MAM);
    CHECK(link.invariant_violation() != std::nullopt);
  }
}

TEST_CASE("switching away from sharing clears the loan ledger") {
  LinkState link(wide_configs(), BamKind::ATCS);
  REQUIRE(link.admit(req(1, 2, 20)).verdict == Verdict::Admit);
  REQUIRE(link.admit(req(2, 2, 30)).lender == std::optional<int>(0));

  auto victims = link.switch_to(BamKind::RDM, SwitchMode::EnforceNew);
  CHECK(victims.empty());  // 50 units of class 2 fit under the 100 ceiling
  for (const auto& [id, alloc] : link.allocations()) {
    CHECK(alloc.lender == std::nullopt);
    CHECK(alloc.budget_class() == alloc.cls);
  }
  CHECK(link.invariant_violation() == std::nullopt);
}

TEST_CASE("utilization is exact at both edges") {
  LinkState link(wide_configs(), BamKind::MAM);
  CHECK(link.utilization() == 0.0);
  REQUIRE(link.admit(req(1, 0, 50)).verdict == Verdict::Admit);
  REQUIRE(link.admit(req(2, 1, 30)).verdict == Verdict::Admit);
  REQUIRE(link.admit(req(3, 2, 20)).verdict == Verdict::Admit);
  CHECK(link.used_total() == 100);
  CHECK(link.utilization() == 1.0);
}

TEST_CASE("malformed requests are refused with specific codes") {
  LinkState link(wide_configs(), BamKind::MAM);
  REQUIRE(link.admit(req(1, 0, 10)).verdict == Verdict::Admit);

  CHECK(code_of([&] { link.decide(req(2, 0, 0)); }) ==
        ErrorCode::NonPositiveBandwidth);
  CHECK(code_of([&] { link.decide(req(2, 0, -5)); }) ==
        ErrorCode::NonPositiveBandwidth);
  CHECK(code_of([&] { link.decide(req(2, 3, 1)); }) ==
        ErrorCode::BadClassIndex);
  CHECK(code_of([&] { link.decide(req(2, -1, 1)); }) ==
        ErrorCode::BadClassIndex);
  CHECK(code_of([&] { link.decide(req(1, 0, 1)); }) ==
        ErrorCode::DuplicateFlowId);
  CHECK(code_of([&] { link.release(99); }) == ErrorCode::UnknownFlowId);
  CHECK(link.used_total() == 10);
}

TEST_CASE("config validation catches capacity and shape errors") {
  auto ok = wide_configs();
  CHECK(ok.validate().empty());

  BamConfigSet bad_rdm(100, {50, 30, 20}, {80, 50, 100}, {50, 30, 20});
  CHECK_FALSE(bad_rdm.validate().empty());  // ceilings must be nondecreasing

  BamConfigSet bad_tail(100, {50, 30, 20}, {50, 80, 90}, {50, 30, 20});
  CHECK_FALSE(bad_tail.validate().empty());  // last ceiling must equal C

  BamConfigSet bad_share(100, {50, 30, 20}, {50, 80, 100}, {60, 30, 20});
  CHECK_FALSE(bad_share.validate().empty());  // shares must sum to C

  CHECK(code_of([&] { LinkState link(bad_share, BamKind::MAM); }) ==
        ErrorCode::InvalidSpec);
}

namespace {

std::string canon(const LinkState& link) {
  std::string key;
  for (const auto& r : oracle::refs_of(link)) {
    key += std::to_string(r.cls) + ":" + std::to_string(r.bw) + ":" +
           std::to_string(r.budget) + ";";
  }
  return key;
}

// Breadth-first admission walk: decide every request at every reachable
// state and require exact agreement with the reference search.
void walk_and_check(BamKind kind, int depth_limit, long* decisions_out) {
  const BamConfigSet configs = small_configs();
  struct Node {
    LinkState link;
    FlowId next_id;
    int depth;
  };
  std::deque<Node> frontier;
  std::set<std::string> seen;
  frontier.push_back(Node{LinkState(configs, kind), 1, 0});
  seen.insert(canon(frontier.front().link));
  long decisions = 0;

  while (!frontier.empty()) {
    Node node = std::move(frontier.front());
    frontier.pop_front();
    const auto refs = oracle::refs_of(node.link);
    for (int cls = 0; cls < 3; ++cls) {
      for (Bandwidth b = 1; b <= 5; ++b) {
        const FlowRequest r = req(node.next_id, cls, b);
        const Decision d = node.link.decide(r);
        const oracle::Outcome o = oracle::decide(configs, kind, refs, r);
        ++decisions;
        REQUIRE(d.verdict == o.verdict);
        REQUIRE(d.victims == o.victims);
        REQUIRE(d.reason == o.reason);
        REQUIRE(d.lender == o.lender);
        REQUIRE(d.ledger_rewrite == o.rewrite);
        if (kind == BamKind::MAM) REQUIRE(d.victims.empty());
        if (kind == BamKind::RDM) {
          for (FlowId v : d.victims) {
            REQUIRE(node.link.allocations().at(v).cls > cls);
          }
        }
        if (kind == BamKind::ATCS) {
          for (FlowId v : d.victims) {
            const auto& a = node.link.allocations().at(v);
            REQUIRE(a.budget_class() != a.cls);
          }
        }
        if (!d.admissible() || node.depth >= depth_limit) continue;
        LinkState next = node.link;
        next.apply(r, d);
        REQUIRE(next.invariant_violation() == std::nullopt);
        if (seen.insert(canon(next)).second) {
          frontier.push_back(Node{std::move(next), node.next_id + 1,
                                  node.depth + 1});
        }
      }
    }
  }
  if (decisions_out) *decisions_out = decisions;
}

}  // namespace

TEST_CASE("every decision matches the reference search on a small link") {
  long decisions = 0;
  walk_and_check(BamKind::MAM, 4, &decisions);
  CHECK(decisions > 1000);
  walk_and_check(BamKind::RDM, 4, &decisions);
  CHECK(decisions > 1000);
  walk_and_check(BamKind::ATCS, 4, &decisions);
  CHECK(decisions > 1000);
}

TEST_CASE("random operations never corrupt the link") {
  const BamConfigSet configs(20, {12, 10, 8}, {10, 16, 20}, {10, 6, 4});
  REQUIRE(configs.validate().empty());
  constexpr BamKind kKinds[] = {BamKind::MAM, BamKind::RDM, BamKind::ATCS};

  for (BamKind start : kKinds) {
    LinkState link(configs, start);
    Rng rng(mix_seed(20240601, static_cast<std::uint64_t>(start)));
    std::vector<FlowId> live;
    FlowId next_id = 1;

    for (int step = 0; step < 4000; ++step) {
      const double roll = rng.next_unit();
      if (roll < 0.55) {
        const int cls = static_cast<int>(rng.next_u64() % 3);
        const auto b = static_cast<Bandwidth>(1 + rng.next_u64() % 8);
        const FlowRequest r = req(next_id, cls, b);
        const Decision d = link.decide(r);
        const Decision again = link.decide(r);
        REQUIRE(d.verdict == again.verdict);
        REQUIRE(d.victims == again.victims);
        link.apply(r, d);
        if (d.admissible()) {
          for (FlowId v : d.victims) {
            live.erase(std::find(live.begin(), live.end(), v));
          }
          live.push_back(next_id++);
        }
      } else if (roll < 0.85) {
        if (!live.empty()) {
          const std::size_t at = rng.next_u64() % live.size();
          link.release(live[at]);
          live.erase(live.begin() + static_cast<std::ptrdiff_t>(at));
        }
      } else {
        const BamKind target = kKinds[rng.next_u64() % 3];
        const auto expected = oracle::enforce_victims(
            configs, target, oracle::refs_of(link));
        const auto victims = link.switch_to(target, SwitchMode::EnforceNew);
        REQUIRE(victims == expected);
        for (FlowId v : victims) {
          live.erase(std::find(live.begin(), live.end(), v));
        }
        if (target != BamKind::ATCS) {
          for (const auto& [id, alloc] : link.allocations()) {
            REQUIRE(alloc.lender == std::nullopt);
          }
        }
      }
      REQUIRE(link.invariant_violation() == std::nullopt);
      REQUIRE(link.flow_count() == live.size());
    }
  }
}
