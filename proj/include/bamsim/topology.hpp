#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bamsim/link_state.hpp"
#include "bamsim/types.hpp"

namespace bamsim {

// How one link looks from outside, for reports.
struct LinkView {
  std::string id;
  BamKind active_bam = BamKind::MAM;
  Bandwidth used_total = 0;
  std::vector<Bandwidth> used;
  std::vector<Bandwidth> share_load;
  double utilization = 0.0;
  std::size_t flow_count = 0;
};

// Admission/teardown totals since construction.
struct PathCounters {
  std::int64_t admits = 0;
  std::int64_t rejects = 0;
  std::int64_t preemptions = 0;  // flows torn down by admissions or switches
  std::int64_t switches = 0;     // links whose model actually changed
};

// A set of links sharing one model configuration, with named multi-link
// routes. A path flow holds the same bandwidth on every link of its route;
// admission is atomic: either every link takes it or nothing changes.
//
// Preemption cascades network-wide: a flow preempted on one link is torn down
// on all links of its route, after which the triggering request re-validates
// everywhere before anything is applied.
class Topology {
 public:
  Topology(const std::vector<std::string>& link_ids,
           const std::map<std::string, std::vector<std::string>>& routes,
           const BamConfigSet& configs, BamKind initial);

  const std::vector<std::string>& link_ids() const { return link_ids_; }
  const LinkState& link(const std::string& id) const;
  const std::vector<std::string>& route(const std::string& name) const;
  bool has_route(const std::string& name) const {
    return routes_.count(name) > 0;
  }

  bool has_flow(FlowId id) const { return flow_routes_.count(id) > 0; }
  std::size_t flow_count() const { return flow_routes_.size(); }

  // Admits `req` on every link of the route, preempting where a link's model
  // allows it. The returned decision summarizes the whole path: victims are
  // the network-wide union.
  Decision setup_path(const std::string& route_name, const FlowRequest& req);

  // Removes the flow from every link of its route.
  void teardown_path(FlowId id);

  // Switches one link (or all links when `link_id` is empty) to `kind`.
  // Returns flows torn down network-wide by enforcement.
  std::vector<FlowId> apply_bam_switch(const std::optional<std::string>& link_id,
                                       BamKind kind, SwitchMode mode);

  const PathCounters& counters() const { return counters_; }

  Bandwidth used_total() const;
  Bandwidth capacity_total() const;
  double utilization() const;

  std::vector<LinkView> snapshot() const;

  // First broken cross-link property: a registered flow missing or reshaped
  // on a route link, an allocation no registry entry explains, or a per-link
  // constraint violation.
  std::optional<std::string> coherence_violation() const;

 private:
  int link_index(const std::string& id) const;
  void remove_everywhere(FlowId id);

  std::vector<std::string> link_ids_;
  std::vector<LinkState> links_;
  std::map<std::string, int> index_;
  std::map<std::string, std::vector<std::string>> route_names_;
  std::map<std::string, std::vector<int>> routes_;
  std::map<FlowId, std::pair<std::string, FlowRequest>> flow_routes_;
  PathCounters counters_;
};

}  // namespace bamsim
