#include "bamsim/link_state.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "packing.hpp"

namespace bamsim {

namespace {

// Preemption candidates of one class, newest admission first. freed[k] is the
// bandwidth released by taking the first k candidates.
struct VictimPool {
  int cls = 0;
  std::vector<FlowId> ids;
  std::vector<Bandwidth> freed;
};

// Enumerates count vectors summing to k (counts[i] <= pool size), assigning as
// much as possible to the highest class index first, and returns the first
// vector accepted by `feasible`.
std::optional<std::vector<int>> search_counts(
    const std::vector<VictimPool>& pools, int k,
    const std::function<bool(const std::vector<int>&)>& feasible) {
  std::vector<int> room_before(pools.size(), 0);  // capacity of pools[0..i-1]
  for (std::size_t i = 1; i < pools.size(); ++i) {
    room_before[i] =
        room_before[i - 1] + static_cast<int>(pools[i - 1].ids.size());
  }
  std::vector<int> counts(pools.size(), 0);
  std::function<bool(int, int)> place = [&](int idx, int remaining) {
    if (idx < 0) return remaining == 0 && feasible(counts);
    int cap = std::min(remaining, static_cast<int>(pools[idx].ids.size()));
    for (int take = cap; take >= 0; --take) {
      if (remaining - take > room_before[idx]) break;  // cannot place the rest
      counts[idx] = take;
      if (place(idx - 1, remaining - take)) return true;
    }
    counts[idx] = 0;
    return false;
  };
  if (place(static_cast<int>(pools.size()) - 1, k)) return counts;
  return std::nullopt;
}

std::vector<FlowId> collect_victims(const std::vector<VictimPool>& pools,
                                    const std::vector<int>& counts) {
  std::vector<FlowId> out;
  for (std::size_t i = 0; i < pools.size(); ++i) {
    out.insert(out.end(), pools[i].ids.begin(),
               pools[i].ids.begin() + counts[i]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Smallest victim set (by count, then by preferring low-priority classes)
// whose removal satisfies `feasible`. Tries counts 1..pool total.
std::optional<std::vector<FlowId>> min_count_victims(
    const std::vector<VictimPool>& pools,
    const std::function<bool(const std::vector<int>&)>& feasible) {
  int total = 0;
  for (const auto& p : pools) total += static_cast<int>(p.ids.size());
  for (int k = 1; k <= total; ++k) {
    if (auto counts = search_counts(pools, k, feasible)) {
      return collect_victims(pools, *counts);
    }
  }
  return std::nullopt;
}

}  // namespace

LinkState::LinkState(BamConfigSet configs, BamKind active)
    : configs_(std::move(configs)), active_(active) {
  auto errors = configs_.validate();
  if (!errors.empty()) fail(ErrorCode::InvalidSpec, errors.front());
  int n = configs_.class_count();
  order_.resize(n);
  used_.assign(n, 0);
  share_load_.assign(n, 0);
}

double LinkState::utilization() const {
  return static_cast<double>(used_total_) /
         static_cast<double>(configs_.capacity());
}

Decision LinkState::decide(const FlowRequest& req) const {
  if (req.bandwidth <= 0) {
    fail(ErrorCode::NonPositiveBandwidth,
         "flow " + std::to_string(req.id) + ": bandwidth must be positive");
  }
  if (req.cls < 0 || req.cls >= class_count()) {
    fail(ErrorCode::BadClassIndex,
         "flow " + std::to_string(req.id) + ": class " +
             std::to_string(req.cls) + " out of range");
  }
  if (allocs_.count(req.id) > 0) {
    fail(ErrorCode::DuplicateFlowId,
         "flow " + std::to_string(req.id) + " already allocated");
  }
  switch (active_) {
    case BamKind::MAM:
      return decide_mam(req);
    case BamKind::RDM:
      return decide_rdm(req);
    case BamKind::ATCS:
      return decide_atcs(req);
  }
  fail(ErrorCode::BadState, "unknown allocation model");
}

Decision LinkState::decide_mam(const FlowRequest& req) const {
  const auto& bc = configs_.get(BamKind::MAM).bc;
  Decision d;
  if (used_[req.cls] + req.bandwidth > bc[req.cls]) {
    d.reason = RejectReason::ClassCap;
    return d;
  }
  if (used_total_ + req.bandwidth > configs_.capacity()) {
    d.reason = RejectReason::TotalCapacity;
    return d;
  }
  d.verdict = Verdict::Admit;
  return d;
}

Decision LinkState::decide_rdm(const FlowRequest& req) const {
  const auto& bc = configs_.get(BamKind::RDM).bc;
  const int n = class_count();
  const int c = req.cls;
  Decision d;

  // Cumulative load of classes 0..k, with the request included from class c
  // on. Ceilings at or above the request's own class can only be repaired by
  // preempting strictly lower-priority flows, which never relieves ceilings
  // at or below c: a violation there is final.
  std::vector<Bandwidth> cum(n, 0);
  Bandwidth run = 0;
  for (int k = 0; k < n; ++k) {
    run += used_[k];
    cum[k] = run + (k >= c ? req.bandwidth : 0);
  }
  for (int k = 0; k <= c; ++k) {
    if (cum[k] > bc[k]) {
      d.reason = (k == n - 1) ? RejectReason::TotalCapacity
                              : RejectReason::CumulativeCap;
      return d;
    }
  }
  bool clean = true;
  for (int k = c + 1; k < n; ++k) {
    if (cum[k] > bc[k]) clean = false;
  }
  if (clean) {
    d.verdict = Verdict::Admit;
    return d;
  }

  // Preempt lower-priority flows, newest first within a class, fewest flows
  // overall. Feasible because dropping all of classes c+1..k reduces the
  // ceiling-k load to the (already satisfied) ceiling-c load.
  std::vector<VictimPool> pools;
  for (int v = c + 1; v < n; ++v) {
    VictimPool p;
    p.cls = v;
    p.freed.push_back(0);
    for (auto it = order_[v].rbegin(); it != order_[v].rend(); ++it) {
      p.ids.push_back(*it);
      p.freed.push_back(p.freed.back() + allocs_.at(*it).bandwidth);
    }
    pools.push_back(std::move(p));
  }
  auto feasible = [&](const std::vector<int>& counts) {
    Bandwidth freed_cum = 0;
    std::size_t pi = 0;
    for (int k = c + 1; k < n; ++k) {
      while (pi < pools.size() && pools[pi].cls <= k) {
        freed_cum += pools[pi].freed[counts[pi]];
        ++pi;
      }
      if (cum[k] - freed_cum > bc[k]) return false;
    }
    return true;
  };
  auto victims = min_count_victims(pools, feasible);
  if (!victims) fail(ErrorCode::BadState, "ceiling repair search failed");
  d.verdict = Verdict::AdmitWithPreemption;
  d.victims = std::move(*victims);
  return d;
}

Decision LinkState::decide_atcs(const FlowRequest& req) const {
  const auto& bc = configs_.get(BamKind::ATCS).bc;
  const int n = class_count();
  const int c = req.cls;
  const Bandwidth b = req.bandwidth;
  Decision d;

  // Native share first, then the lowest-index class able to lend.
  if (share_load_[c] + b <= bc[c]) {
    d.verdict = Verdict::Admit;
    return d;
  }
  for (int l = 0; l < n; ++l) {
    if (l == c) continue;
    if (share_load_[l] + b <= bc[l]) {
      d.verdict = Verdict::Admit;
      d.lender = l;
      return d;
    }
  }

  // No share has contiguous room, but reassigning existing loans may open
  // one. Admission then rewrites the whole loan ledger canonically.
  if (used_total_ + b <= configs_.capacity()) {
    std::vector<Bandwidth> sizes = all_sizes();
    sizes.push_back(b);
    if (detail::packable(bc, sizes)) {
      std::vector<int> pinned(sizes.size(), -1);
      std::vector<std::vector<int>> pref(sizes.size());
      std::size_t i = 0;
      for (const auto& [id, alloc] : ordered_by_seq()) {
        (void)id;
        pref[i].push_back(alloc->cls);
        for (int l = 0; l < n; ++l) {
          if (l != alloc->cls) pref[i].push_back(l);
        }
        ++i;
      }
      pref[i].push_back(c);
      for (int l = 0; l < n; ++l) {
        if (l != c) pref[i].push_back(l);
      }
      auto assign = detail::pack_assign(bc, sizes, pinned, pref);
      if (!assign) fail(ErrorCode::BadState, "ledger rewrite lost feasibility");
      int budget = assign->back();
      d.verdict = Verdict::Admit;
      if (budget != c) d.lender = budget;
      d.ledger_rewrite = true;
      return d;
    }
  }

  // Last resort: evict borrowed allocations so the request can sit on its own
  // class's share. Only loans are evictable; native allocations never are.
  if (b <= bc[c]) {
    std::vector<VictimPool> pools(n);
    for (int v = 0; v < n; ++v) {
      pools[v].cls = v;
      pools[v].freed.push_back(0);
      for (auto it = order_[v].rbegin(); it != order_[v].rend(); ++it) {
        const Allocation& a = allocs_.at(*it);
        if (!a.lender) continue;
        pools[v].ids.push_back(*it);
        pools[v].freed.push_back(pools[v].freed.back() + a.bandwidth);
      }
    }
    std::vector<Bandwidth> budgets = bc;
    budgets[c] -= b;
    auto feasible = [&](const std::vector<int>& counts) {
      std::unordered_set<FlowId> gone;
      for (int v = 0; v < n; ++v) {
        for (int k = 0; k < counts[v]; ++k) gone.insert(pools[v].ids[k]);
      }
      std::vector<Bandwidth> remaining;
      remaining.reserve(allocs_.size());
      for (const auto& [id, alloc] : allocs_) {
        if (gone.count(id) == 0) remaining.push_back(alloc.bandwidth);
      }
      return detail::packable(budgets, remaining);
    };
    if (auto victims = min_count_victims(pools, feasible)) {
      d.verdict = Verdict::AdmitWithPreemption;
      d.victims = std::move(*victims);
      d.ledger_rewrite = true;
      return d;
    }
  }

  d.reason = (used_total_ + b > configs_.capacity())
                 ? RejectReason::TotalCapacity
                 : RejectReason::ShareInfeasible;
  return d;
}

void LinkState::apply(const FlowRequest& req, const Decision& d) {
  if (!d.admissible()) return;
  for (FlowId v : d.victims) erase_allocation(v);
  insert_allocation(req, d.lender);
  if (d.ledger_rewrite && active_ == BamKind::ATCS) {
    // A preempting flow earned its place on its own class's share; a plain
    // rewrite admission takes whatever the canonical assignment gives it.
    rebalance_ledger(d.verdict == Verdict::AdmitWithPreemption
                         ? std::optional<FlowId>(req.id)
                         : std::nullopt);
  }
}

Decision LinkState::admit(const FlowRequest& req) {
  Decision d = decide(req);
  apply(req, d);
  return d;
}

void LinkState::release(FlowId id) {
  if (allocs_.count(id) == 0) {
    fail(ErrorCode::UnknownFlowId,
         "flow " + std::to_string(id) + " not allocated");
  }
  erase_allocation(id);
}

std::vector<FlowId> LinkState::switch_to(BamKind kind, SwitchMode mode) {
  const auto& target = configs_.get(kind);
  const int n = class_count();

  std::vector<FlowId> victims;
  if (mode == SwitchMode::EnforceNew) {
    auto feasible_after = [&](const std::vector<int>& counts,
                              const std::vector<VictimPool>& pools) {
      std::vector<Bandwidth> left = used_;
      std::unordered_set<FlowId> gone;
      for (int v = 0; v < n; ++v) {
        left[v] -= pools[v].freed[counts[v]];
        for (int k = 0; k < counts[v]; ++k) gone.insert(pools[v].ids[k]);
      }
      switch (kind) {
        case BamKind::MAM: {
          Bandwidth total = 0;
          for (int v = 0; v < n; ++v) {
            if (left[v] > target.bc[v]) return false;
            total += left[v];
          }
          return total <= configs_.capacity();
        }
        case BamKind::RDM: {
          Bandwidth run = 0;
          for (int v = 0; v < n; ++v) {
            run += left[v];
            if (run > target.bc[v]) return false;
          }
          return true;
        }
        case BamKind::ATCS: {
          std::vector<Bandwidth> remaining;
          remaining.reserve(allocs_.size());
          for (const auto& [id, alloc] : allocs_) {
            if (gone.count(id) == 0) remaining.push_back(alloc.bandwidth);
          }
          return detail::packable(target.bc, remaining);
        }
      }
      return false;
    };

    std::vector<VictimPool> pools(n);
    for (int v = 0; v < n; ++v) {
      pools[v].cls = v;
      pools[v].freed.push_back(0);
      for (auto it = order_[v].rbegin(); it != order_[v].rend(); ++it) {
        pools[v].ids.push_back(*it);
        pools[v].freed.push_back(pools[v].freed.back() +
                                 allocs_.at(*it).bandwidth);
      }
    }
    std::vector<int> zero(n, 0);
    if (!feasible_after(zero, pools)) {
      auto found = min_count_victims(pools, [&](const std::vector<int>& cnt) {
        return feasible_after(cnt, pools);
      });
      if (!found) fail(ErrorCode::BadState, "model switch repair failed");
      victims = std::move(*found);
      for (FlowId v : victims) erase_allocation(v);
    }
  }

  active_ = kind;
  if (kind == BamKind::ATCS) {
    // Canonical loan labels when the survivors fit the shares; a carried-over
    // overload keeps everything native and reads as an invariant violation.
    if (detail::packable(target.bc, all_sizes())) {
      rebalance_ledger(std::nullopt);
    } else {
      clear_lenders();
    }
  } else {
    clear_lenders();
  }
  return victims;
}

std::optional<std::string> LinkState::invariant_violation() const {
  const auto& bc = active_config().bc;
  const int n = class_count();
  std::ostringstream out;
  if (used_total_ > configs_.capacity()) {
    out << "total load " << used_total_ << " exceeds capacity "
        << configs_.capacity();
    return out.str();
  }
  switch (active_) {
    case BamKind::MAM: {
      for (int c = 0; c < n; ++c) {
        if (used_[c] > bc[c]) {
          out << "class " << c << " load " << used_[c] << " exceeds cap "
              << bc[c];
          return out.str();
        }
      }
      break;
    }
    case BamKind::RDM: {
      Bandwidth run = 0;
      for (int c = 0; c < n; ++c) {
        run += used_[c];
        if (run > bc[c]) {
          out << "classes 0.." << c << " load " << run << " exceeds ceiling "
              << bc[c];
          return out.str();
        }
      }
      break;
    }
    case BamKind::ATCS: {
      for (int c = 0; c < n; ++c) {
        if (share_load_[c] > bc[c]) {
          out << "share " << c << " load " << share_load_[c]
              << " exceeds share size " << bc[c];
          return out.str();
        }
      }
      break;
    }
  }
  if (active_ != BamKind::ATCS) {
    for (const auto& [id, alloc] : allocs_) {
      if (alloc.lender) {
        out << "flow " << id << " holds a loan under a model without loans";
        return out.str();
      }
    }
  }
  return std::nullopt;
}

bool LinkState::operator==(const LinkState& other) const {
  // next_seq_ is bookkeeping, not admission state: two histories that reach
  // the same allocation set are equal even if one burned more sequence ids.
  return configs_ == other.configs_ && active_ == other.active_ &&
         allocs_ == other.allocs_ && order_ == other.order_ &&
         used_ == other.used_ && share_load_ == other.share_load_ &&
         used_total_ == other.used_total_;
}

void LinkState::insert_allocation(const FlowRequest& req,
                                  std::optional<int> lender) {
  Allocation a;
  a.id = req.id;
  a.cls = req.cls;
  a.bandwidth = req.bandwidth;
  a.lender = lender;
  a.admitted_at = req.arrival_time;
  a.seq = next_seq_++;
  used_[a.cls] += a.bandwidth;
  share_load_[a.budget_class()] += a.bandwidth;
  used_total_ += a.bandwidth;
  order_[a.cls].push_back(a.id);
  allocs_.emplace(a.id, a);
}

void LinkState::erase_allocation(FlowId id) {
  auto it = allocs_.find(id);
  const Allocation& a = it->second;
  used_[a.cls] -= a.bandwidth;
  share_load_[a.budget_class()] -= a.bandwidth;
  used_total_ -= a.bandwidth;
  auto& ord = order_[a.cls];
  ord.erase(std::find(ord.begin(), ord.end(), id));
  allocs_.erase(it);
}

void LinkState::clear_lenders() {
  for (auto& [id, alloc] : allocs_) alloc.lender.reset();
  share_load_ = used_;
}

std::vector<std::pair<FlowId, const Allocation*>> LinkState::ordered_by_seq()
    const {
  std::vector<std::pair<FlowId, const Allocation*>> items;
  items.reserve(allocs_.size());
  for (const auto& [id, alloc] : allocs_) items.emplace_back(id, &alloc);
  std::sort(items.begin(), items.end(), [](const auto& x, const auto& y) {
    return x.second->seq < y.second->seq;
  });
  return items;
}

std::vector<Bandwidth> LinkState::all_sizes() const {
  std::vector<Bandwidth> sizes;
  sizes.reserve(allocs_.size());
  for (const auto& [id, alloc] : ordered_by_seq()) {
    (void)id;
    sizes.push_back(alloc->bandwidth);
  }
  return sizes;
}

void LinkState::rebalance_ledger(std::optional<FlowId> pin_native) {
  const auto& bc = configs_.get(BamKind::ATCS).bc;
  const int n = class_count();
  auto items = ordered_by_seq();
  std::vector<Bandwidth> sizes;
  std::vector<int> pinned(items.size(), -1);
  std::vector<std::vector<int>> pref(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Allocation& a = *items[i].second;
    sizes.push_back(a.bandwidth);
    if (pin_native && *pin_native == a.id) pinned[i] = a.cls;
    pref[i].push_back(a.cls);
    for (int l = 0; l < n; ++l) {
      if (l != a.cls) pref[i].push_back(l);
    }
  }
  auto assign = detail::pack_assign(bc, sizes, pinned, pref);
  if (!assign) fail(ErrorCode::BadState, "loan ledger rebalance infeasible");
  for (std::size_t i = 0; i < items.size(); ++i) {
    Allocation& a = allocs_.at(items[i].first);
    int budget = (*assign)[i];
    a.lender = (budget == a.cls) ? std::nullopt : std::optional<int>(budget);
  }
  share_load_.assign(n, 0);
  for (const auto& [id, alloc] : allocs_) {
    share_load_[alloc.budget_class()] += alloc.bandwidth;
  }
}

}  // namespace bamsim
