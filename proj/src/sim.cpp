#include "bamsim/sim.hpp"

#include <optional>
#include <queue>

#include "bamsim/rng.hpp"
#include "bamsim/traffic.hpp"

namespace bamsim {

namespace {

constexpr std::uint64_t kControllerStream = 0x4354524c;  // controller rng tag

// Events at one instant settle in rank order: the epoch boundary closes
// first, departures free capacity next, arrivals contend last.
enum EventRank { kTick = 0, kDeparture = 1, kArrival = 2 };

struct Event {
  double time = 0.0;
  int rank = kTick;
  std::uint64_t seq = 0;  // insertion order, breaks remaining ties
  std::uint64_t payload = 0;
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.rank != b.rank) return a.rank > b.rank;
    return a.seq > b.seq;
  }
};

}  // namespace

EpochAccumulator::EpochAccumulator(int class_count, Bandwidth capacity_total,
                                   double high_util_cut)
    : classes_(class_count), capacity_(capacity_total), cut_(high_util_cut) {
  if (class_count < 1 || capacity_total <= 0) {
    fail(ErrorCode::InvalidSpec, "accumulator needs classes and capacity");
  }
  reset(0.0);
}

void EpochAccumulator::reset(double now) {
  start_ = now;
  last_ = now;
  util_integral_ = 0.0;
  high_time_ = 0.0;
  arrivals_.assign(classes_, 0);
  rejects_.assign(classes_, 0);
  offered_.assign(classes_, 0.0);
  preemptions_ = 0;
}

void EpochAccumulator::advance(double now) {
  const double dt = now - last_;
  if (dt < 0.0) fail(ErrorCode::BadState, "time went backwards");
  if (dt > 0.0) {
    util_integral_ += static_cast<double>(load_) * dt;
    if (static_cast<double>(load_) >=
        cut_ * static_cast<double>(capacity_)) {
      high_time_ += dt;
    }
    last_ = now;
  }
}

void EpochAccumulator::record_arrival(int cls, double offered_bh) {
  ++arrivals_[cls];
  offered_[cls] += offered_bh;
}

void EpochAccumulator::record_reject(int cls) { ++rejects_[cls]; }

EpochAccumulator::Epoch EpochAccumulator::finalize(double now) {
  advance(now);
  if (now <= start_) {
    fail(ErrorCode::EmptyWindow, "epoch has no duration");
  }
  const double len = now - start_;
  Epoch e;
  e.start = start_;
  e.end = now;
  e.utilization = util_integral_ / (static_cast<double>(capacity_) * len);
  e.loss_proxy = high_time_ / len;
  e.arrivals = arrivals_;
  e.rejects = rejects_;
  e.offered_bh = offered_;
  e.preemptions = preemptions_;
  return e;
}

RunReport run(const ScenarioConfig& config, std::uint64_t seed,
              const RunOptions& options) {
  const BamConfigSet configs = config.config_set();
  {
    auto errors = configs.validate();
    if (!errors.empty()) fail(ErrorCode::InvalidScenario, errors.front());
  }

  Topology topo(config.topology.links, config.topology.routes, configs,
                config.initial_bam);
  auto controller =
      make_controller(config.controller.mode, config.initial_bam,
                      config.controller.cbr, config.controller.rl);
  if (!options.memory_in_text.empty()) {
    controller->load_memory(options.memory_in_text);
  }
  Rng controller_rng(mix_seed(seed, kControllerStream));

  const std::vector<FlowRequest> workload = build_workload(config.workload, seed);

  RunReport report;
  report.seed = seed;
  report.workload_digest = workload_hash(workload);
  report.flow_count = workload.size();

  const int total_epochs = config.total_epochs();
  const double epoch_length = config.sim.epoch_length;

  std::priority_queue<Event, std::vector<Event>, EventAfter> queue;
  std::uint64_t next_event_seq = 0;
  auto push = [&](double time, int rank, std::uint64_t payload) {
    queue.push(Event{time, rank, next_event_seq++, payload});
  };
  for (std::size_t i = 0; i < workload.size(); ++i) {
    push(workload[i].arrival_time, kArrival, i);
  }
  for (int e = 1; e <= total_epochs; ++e) {
    push(static_cast<double>(e) * epoch_length, kTick,
         static_cast<std::uint64_t>(e));
  }

  EpochAccumulator acc(config.classes, topo.capacity_total());
  acc.reset(0.0);
  acc.set_load(0);

  BamKind governed = config.initial_bam;
  std::optional<ControllerContext> prev_ctx;
  BamKind prev_action = governed;
  bool prev_switched = false;
  bool finished = false;

  while (!queue.empty() && !finished) {
    const Event ev = queue.top();
    queue.pop();
    acc.advance(ev.time);

    switch (ev.rank) {
      case kTick: {
        const int epoch = static_cast<int>(ev.payload);
        EpochAccumulator::Epoch window = acc.finalize(ev.time);

        MetricsSnapshot m;
        m.epoch = epoch;
        m.utilization = window.utilization;
        m.arrivals = window.arrivals;
        m.rejects = window.rejects;
        m.offered_bh = window.offered_bh;
        m.preemptions = window.preemptions;
        m.loss_proxy = window.loss_proxy;
        m.active_bam = governed;

        ObservationWindow obs;
        obs.duration = window.end - window.start;
        obs.offered_bh = window.offered_bh;
        obs.utilization = window.utilization;

        ControllerContext ctx;
        ctx.metrics = m;
        ctx.profile = classify_profile(obs, config.workload.reference_bc);
        ctx.profile_id = match_profile_id(ctx.profile);
        if (config.classes == 3) {
          ctx.features = make_features(obs, config.workload.reference_bc,
                                       m.aggregate_blocking());
        }
        ctx.state = rl_state(ctx.profile_id, ctx.profile.overloaded);

        const BamKind action = controller->decide(ctx, governed, controller_rng);
        const double r = reward(config.policy, m, prev_switched);
        if (prev_ctx) controller->learn(*prev_ctx, prev_action, r, ctx);

        EpochRow row;
        row.epoch = epoch;
        row.bam = governed;
        row.utilization = m.utilization;
        row.arrivals = m.arrivals;
        row.rejects = m.rejects;
        row.offered_bh = m.offered_bh;
        for (int c = 0; c < config.classes; ++c) {
          row.blocking.push_back(m.class_blocking(c));
        }
        row.aggregate_blocking = m.aggregate_blocking();
        row.mean_blocking = m.mean_blocking();
        row.loss_proxy = m.loss_proxy;
        row.preemptions = m.preemptions;
        row.profile_id = ctx.profile_id;
        row.action = action;
        row.switched = action != governed;
        row.reward = r;
        report.epochs.push_back(std::move(row));

        prev_ctx = std::move(ctx);
        prev_action = action;
        prev_switched = action != governed;

        if (epoch == total_epochs) {
          finished = true;  // the chosen action has no epoch left to govern
          break;
        }
        acc.reset(ev.time);
        if (action != governed) {
          auto victims = topo.apply_bam_switch(std::nullopt, action,
                                               config.switch_mode);
          acc.record_preemptions(static_cast<std::int64_t>(victims.size()));
          governed = action;
        }
        acc.set_load(topo.used_total());
        break;
      }
      case kArrival: {
        const FlowRequest& req = workload[ev.payload];
        acc.record_arrival(req.cls, static_cast<double>(req.bandwidth) *
                                        req.holding_time);
        Decision d = topo.setup_path(config.class_routes[req.cls], req);
        if (d.admissible()) {
          push(ev.time + req.holding_time, kDeparture, req.id);
          if (!d.victims.empty()) {
            acc.record_preemptions(
                static_cast<std::int64_t>(d.victims.size()));
          }
        } else {
          acc.record_reject(req.cls);
        }
        acc.set_load(topo.used_total());
        break;
      }
      case kDeparture: {
        const FlowId id = ev.payload;
        if (topo.has_flow(id)) {  // preempted flows leave a stale event
          topo.teardown_path(id);
          acc.set_load(topo.used_total());
        }
        break;
      }
    }

    if (options.check_invariants) {
      if (auto violation = topo.coherence_violation()) {
        fail(ErrorCode::BadState, *violation);
      }
    }
  }

  RunTotals& totals = report.totals;
  totals.arrivals.assign(config.classes, 0);
  totals.rejects.assign(config.classes, 0);
  double occupancy_sum = 0.0;
  std::int64_t arrivals_sum = 0;
  std::int64_t rejects_sum = 0;
  for (const EpochRow& row : report.epochs) {
    occupancy_sum += row.utilization;
    if (row.epoch <= config.sim.warmup_epochs) continue;
    ++totals.measured_epochs;
    totals.mean_utilization += row.utilization;
    totals.mean_reward += row.reward;
    totals.mean_blocking += row.mean_blocking;
    totals.preemptions += row.preemptions;
    totals.switches += row.switched ? 1 : 0;
    for (int c = 0; c < config.classes; ++c) {
      totals.arrivals[c] += row.arrivals[c];
      totals.rejects[c] += row.rejects[c];
      arrivals_sum += row.arrivals[c];
      rejects_sum += row.rejects[c];
    }
  }
  if (totals.measured_epochs > 0) {
    totals.mean_utilization /= totals.measured_epochs;
    totals.mean_reward /= totals.measured_epochs;
    totals.mean_blocking /= totals.measured_epochs;
  }
  if (arrivals_sum > 0) {
    totals.aggregate_blocking = static_cast<double>(rejects_sum) /
                                static_cast<double>(arrivals_sum);
  }
  if (!report.epochs.empty()) {
    totals.occupancy = occupancy_sum / static_cast<double>(report.epochs.size());
  }

  report.lifetime = topo.counters();
  report.final_links = topo.snapshot();
  if (controller->has_memory()) {
    report.controller_memory = controller->save_memory();
  }
  return report;
}

}  // namespace bamsim
