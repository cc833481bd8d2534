#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bamsim/bam_config.hpp"
#include "bamsim/types.hpp"

namespace bamsim {

// Admission state of one link under its active bandwidth allocation model.
//
// All three models share the allocation ledger, so the link can switch models
// in place. Verdict rules per model:
//   MAM:  admit iff used[c] + b <= bc[c] and total + b <= capacity. Never
//         preempts and never lends.
//   RDM:  admit iff every cumulative ceiling still holds after the add;
//         otherwise strictly lower-priority flows may be preempted.
//   ATCS: admit iff every allocation plus the request can be assigned to the
//         per-class shares (loans allowed, single lender per allocation);
//         otherwise a native placement may preempt borrowed allocations.
//
// Victim sets are minimal in count over per-class newest-first candidate
// suffixes; ties prefer victims from the lowest-priority classes.
//
// decide() is const and reports what admit() would do. apply() executes a
// decision immediately after the decide() that produced it; interleaving any
// other mutation invalidates the decision.
class LinkState {
 public:
  LinkState() = default;
  LinkState(BamConfigSet configs, BamKind active);

  const BamConfigSet& configs() const { return configs_; }
  const BamConfig& active_config() const { return configs_.get(active_); }
  BamKind active_bam() const { return active_; }
  int class_count() const { return configs_.class_count(); }
  Bandwidth capacity() const { return configs_.capacity(); }

  Bandwidth used(int cls) const { return used_[cls]; }
  Bandwidth used_total() const { return used_total_; }
  // Load carried by class `cls`'s share: its native allocations plus loans it
  // is currently extending. Equals used(cls) when nothing is borrowed.
  Bandwidth share_load(int cls) const { return share_load_[cls]; }
  double utilization() const;

  bool has_flow(FlowId id) const { return allocs_.count(id) > 0; }
  const std::map<FlowId, Allocation>& allocations() const { return allocs_; }
  std::size_t flow_count() const { return allocs_.size(); }

  Decision decide(const FlowRequest& req) const;
  void apply(const FlowRequest& req, const Decision& d);
  Decision admit(const FlowRequest& req);
  void release(FlowId id);

  // Switches the active model. EnforceNew preempts until the new model's
  // constraints hold; KeepAll grandfathers existing allocations. Returns the
  // preempted flows. Loan labels are recomputed for the new model.
  std::vector<FlowId> switch_to(BamKind kind, SwitchMode mode);

  // First violated structural constraint of the active model, nullopt when
  // clean. KeepAll switches may leave reportable violations by design.
  std::optional<std::string> invariant_violation() const;

  bool operator==(const LinkState& other) const;

 private:
  Decision decide_mam(const FlowRequest& req) const;
  Decision decide_rdm(const FlowRequest& req) const;
  Decision decide_atcs(const FlowRequest& req) const;

  void insert_allocation(const FlowRequest& req, std::optional<int> lender);
  void erase_allocation(FlowId id);
  void clear_lenders();
  // Recomputes the loan ledger canonically; pin_native forces that flow onto
  // its own class's share. Requires a feasible assignment to exist.
  void rebalance_ledger(std::optional<FlowId> pin_native);
  std::vector<std::pair<FlowId, const Allocation*>> ordered_by_seq() const;
  std::vector<Bandwidth> all_sizes() const;

  BamConfigSet configs_;
  BamKind active_ = BamKind::MAM;
  std::map<FlowId, Allocation> allocs_;
  std::vector<std::vector<FlowId>> order_;  // per class, oldest -> newest
  std::vector<Bandwidth> used_;
  std::vector<Bandwidth> share_load_;
  Bandwidth used_total_ = 0;
  std::uint64_t next_seq_ = 1;
};

}  // namespace bamsim
