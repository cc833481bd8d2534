#include "bamsim/topology.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace bamsim {

Topology::Topology(const std::vector<std::string>& link_ids,
                   const std::map<std::string, std::vector<std::string>>& routes,
                   const BamConfigSet& configs, BamKind initial) {
  if (link_ids.empty()) fail(ErrorCode::InvalidSpec, "no links given");
  for (const std::string& id : link_ids) {
    if (id.empty()) fail(ErrorCode::InvalidSpec, "link ids must be non-empty");
    if (index_.count(id) > 0) {
      fail(ErrorCode::InvalidSpec, "duplicate link id " + id);
    }
    index_[id] = static_cast<int>(links_.size());
    link_ids_.push_back(id);
    links_.emplace_back(configs, initial);
  }
  for (const auto& [name, members] : routes) {
    if (name.empty()) {
      fail(ErrorCode::InvalidSpec, "route names must be non-empty");
    }
    if (members.empty()) {
      fail(ErrorCode::InvalidSpec, "route " + name + " has no links");
    }
    std::vector<int> indices;
    std::set<int> seen;
    for (const std::string& link : members) {
      auto it = index_.find(link);
      if (it == index_.end()) {
        fail(ErrorCode::InvalidSpec,
             "route " + name + " uses unknown link " + link);
      }
      if (!seen.insert(it->second).second) {
        fail(ErrorCode::InvalidSpec,
             "route " + name + " repeats link " + link);
      }
      indices.push_back(it->second);
    }
    route_names_[name] = members;
    routes_[name] = std::move(indices);
  }
}

const LinkState& Topology::link(const std::string& id) const {
  return links_[link_index(id)];
}

const std::vector<std::string>& Topology::route(const std::string& name) const {
  auto it = route_names_.find(name);
  if (it == route_names_.end()) {
    fail(ErrorCode::UnknownRoute, "unknown route " + name);
  }
  return it->second;
}

int Topology::link_index(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) fail(ErrorCode::UnknownLink, "unknown link " + id);
  return it->second;
}

Decision Topology::setup_path(const std::string& route_name,
                              const FlowRequest& req) {
  auto rit = routes_.find(route_name);
  if (rit == routes_.end()) {
    fail(ErrorCode::UnknownRoute, "unknown route " + route_name);
  }
  if (flow_routes_.count(req.id) > 0) {
    fail(ErrorCode::DuplicateFlowId,
         "flow " + std::to_string(req.id) + " already set up");
  }
  const std::vector<int>& hops = rit->second;

  std::vector<Decision> decisions;
  decisions.reserve(hops.size());
  for (int li : hops) {
    Decision d = links_[li].decide(req);
    if (!d.admissible()) {
      ++counters_.rejects;
      d.victims.clear();
      return d;
    }
    decisions.push_back(std::move(d));
  }

  std::vector<FlowId> victims;
  for (const Decision& d : decisions) {
    victims.insert(victims.end(), d.victims.begin(), d.victims.end());
  }
  std::sort(victims.begin(), victims.end());
  victims.erase(std::unique(victims.begin(), victims.end()), victims.end());

  if (victims.empty()) {
    for (std::size_t h = 0; h < hops.size(); ++h) {
      links_[hops[h]].apply(req, decisions[h]);
    }
  } else {
    // Preempted flows leave every link of their own route, then the request
    // re-validates on a strictly roomier network; only then does it land.
    for (FlowId v : victims) {
      remove_everywhere(v);
      ++counters_.preemptions;
    }
    for (std::size_t h = 0; h < hops.size(); ++h) {
      Decision d = links_[hops[h]].decide(req);
      if (d.verdict != Verdict::Admit) {
        fail(ErrorCode::BadState, "preemption did not free the path");
      }
      decisions[h] = std::move(d);
      links_[hops[h]].apply(req, decisions[h]);
    }
  }

  flow_routes_.emplace(req.id, std::make_pair(route_name, req));
  ++counters_.admits;

  Decision summary;
  summary.verdict =
      victims.empty() ? Verdict::Admit : Verdict::AdmitWithPreemption;
  summary.victims = std::move(victims);
  summary.reason = RejectReason::None;
  if (hops.size() == 1) summary.lender = decisions.front().lender;
  for (const Decision& d : decisions) {
    summary.ledger_rewrite = summary.ledger_rewrite || d.ledger_rewrite;
  }
  return summary;
}

void Topology::teardown_path(FlowId id) {
  auto it = flow_routes_.find(id);
  if (it == flow_routes_.end()) {
    fail(ErrorCode::UnknownFlowId,
         "flow " + std::to_string(id) + " not set up");
  }
  for (int li : routes_.at(it->second.first)) links_[li].release(id);
  flow_routes_.erase(it);
}

void Topology::remove_everywhere(FlowId id) {
  auto it = flow_routes_.find(id);
  if (it == flow_routes_.end()) return;
  for (int li : routes_.at(it->second.first)) {
    if (links_[li].has_flow(id)) links_[li].release(id);
  }
  flow_routes_.erase(it);
}

std::vector<FlowId> Topology::apply_bam_switch(
    const std::optional<std::string>& link_id, BamKind kind, SwitchMode mode) {
  std::vector<int> targets;
  if (link_id) {
    targets.push_back(link_index(*link_id));
  } else {
    for (std::size_t i = 0; i < links_.size(); ++i) {
      targets.push_back(static_cast<int>(i));
    }
  }

  std::vector<FlowId> victims;
  for (int li : targets) {
    const BamKind before = links_[li].active_bam();
    auto evicted = links_[li].switch_to(kind, mode);
    if (before != kind) ++counters_.switches;
    victims.insert(victims.end(), evicted.begin(), evicted.end());
  }
  std::sort(victims.begin(), victims.end());
  victims.erase(std::unique(victims.begin(), victims.end()), victims.end());
  for (FlowId v : victims) {
    remove_everywhere(v);  // gone from the switched link already, purge rest
    ++counters_.preemptions;
  }
  return victims;
}

Bandwidth Topology::used_total() const {
  Bandwidth total = 0;
  for (const LinkState& l : links_) total += l.used_total();
  return total;
}

Bandwidth Topology::capacity_total() const {
  Bandwidth total = 0;
  for (const LinkState& l : links_) total += l.capacity();
  return total;
}

double Topology::utilization() const {
  return static_cast<double>(used_total()) /
         static_cast<double>(capacity_total());
}

std::vector<LinkView> Topology::snapshot() const {
  std::vector<LinkView> views;
  views.reserve(links_.size());
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const LinkState& l = links_[i];
    LinkView v;
    v.id = link_ids_[i];
    v.active_bam = l.active_bam();
    v.used_total = l.used_total();
    for (int c = 0; c < l.class_count(); ++c) {
      v.used.push_back(l.used(c));
      v.share_load.push_back(l.share_load(c));
    }
    v.utilization = l.utilization();
    v.flow_count = l.flow_count();
    views.push_back(std::move(v));
  }
  return views;
}

std::optional<std::string> Topology::coherence_violation() const {
  std::ostringstream out;
  for (const auto& [id, entry] : flow_routes_) {
    for (int li : routes_.at(entry.first)) {
      if (!links_[li].has_flow(id)) {
        out << "flow " << id << " missing on link " << link_ids_[li];
        return out.str();
      }
      const Allocation& a = links_[li].allocations().at(id);
      if (a.bandwidth != entry.second.bandwidth ||
          a.cls != entry.second.cls) {
        out << "flow " << id << " reshaped on link " << link_ids_[li];
        return out.str();
      }
    }
  }
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const LinkState& l = links_[i];
    if (l.used_total() > l.capacity()) {
      out << "link " << link_ids_[i] << " over capacity";
      return out.str();
    }
    std::vector<Bandwidth> used(l.class_count(), 0);
    std::vector<Bandwidth> share(l.class_count(), 0);
    Bandwidth total = 0;
    for (const auto& [id, a] : l.allocations()) {
      auto rit = flow_routes_.find(id);
      if (rit == flow_routes_.end()) {
        out << "link " << link_ids_[i] << " carries unregistered flow " << id;
        return out.str();
      }
      bool on_route = false;
      for (int li : routes_.at(rit->second.first)) {
        on_route = on_route || li == static_cast<int>(i);
      }
      if (!on_route) {
        out << "flow " << id << " strayed onto link " << link_ids_[i];
        return out.str();
      }
      used[a.cls] += a.bandwidth;
      share[a.budget_class()] += a.bandwidth;
      total += a.bandwidth;
    }
    for (int c = 0; c < l.class_count(); ++c) {
      if (used[c] != l.used(c) || share[c] != l.share_load(c)) {
        out << "link " << link_ids_[i] << " class " << c
            << " bookkeeping drifted";
        return out.str();
      }
    }
    if (total != l.used_total()) {
      out << "link " << link_ids_[i] << " total bookkeeping drifted";
      return out.str();
    }
  }
  return std::nullopt;
}

}  // namespace bamsim
