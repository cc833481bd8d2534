#include "bamsim/report_io.hpp"

#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace bamsim {

namespace {

using nlohmann::json;

std::string hex_digest(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

// Shortest round-trip decimal form, same as the JSON encoding.
std::string number(double v) { return json(v).dump(); }

json links_json(const std::vector<LinkView>& links) {
  json out = json::array();
  for (const LinkView& l : links) {
    out.push_back({{"id", l.id},
                   {"bam", to_string(l.active_bam)},
                   {"used", l.used},
                   {"share_load", l.share_load},
                   {"used_total", l.used_total},
                   {"utilization", l.utilization},
                   {"flows", l.flow_count}});
  }
  return out;
}

}  // namespace

std::string report_to_json(const RunReport& report,
                           const ScenarioConfig& config) {
  json epochs = json::array();
  for (const EpochRow& row : report.epochs) {
    epochs.push_back({{"epoch", row.epoch},
                      {"bam", to_string(row.bam)},
                      {"utilization", row.utilization},
                      {"arrivals", row.arrivals},
                      {"rejects", row.rejects},
                      {"offered_bh", row.offered_bh},
                      {"blocking", row.blocking},
                      {"aggregate_blocking", row.aggregate_blocking},
                      {"mean_blocking", row.mean_blocking},
                      {"loss_proxy", row.loss_proxy},
                      {"preemptions", row.preemptions},
                      {"profile_id", row.profile_id},
                      {"action", to_string(row.action)},
                      {"switched", row.switched},
                      {"reward", row.reward}});
  }

  const RunTotals& t = report.totals;
  json j = {{"schema_version", 1},
            {"seed", report.seed},
            {"workload_digest", hex_digest(report.workload_digest)},
            {"flow_count", report.flow_count},
            {"scenario", json::parse(scenario_to_json(config))},
            {"epochs", epochs},
            {"totals",
             {{"measured_epochs", t.measured_epochs},
              {"mean_utilization", t.mean_utilization},
              {"mean_reward", t.mean_reward},
              {"aggregate_blocking", t.aggregate_blocking},
              {"mean_blocking", t.mean_blocking},
              {"arrivals", t.arrivals},
              {"rejects", t.rejects},
              {"preemptions", t.preemptions},
              {"switches", t.switches},
              {"occupancy", t.occupancy}}},
            {"lifetime",
             {{"admits", report.lifetime.admits},
              {"rejects", report.lifetime.rejects},
              {"preemptions", report.lifetime.preemptions},
              {"switches", report.lifetime.switches}}},
            {"links", links_json(report.final_links)}};
  return j.dump(2) + "\n";
}

std::string epochs_to_csv(const RunReport& report) {
  std::ostringstream out;
  const std::size_t classes =
      report.epochs.empty() ? 0 : report.epochs.front().arrivals.size();

  out << "epoch,bam";
  for (std::size_t c = 0; c < classes; ++c) out << ",arrivals_" << c;
  for (std::size_t c = 0; c < classes; ++c) out << ",rejects_" << c;
  for (std::size_t c = 0; c < classes; ++c) out << ",blocking_" << c;
  out << ",utilization,aggregate_blocking,mean_blocking,loss_proxy,"
         "preemptions,profile_id,action,switched,reward\n";

  for (const EpochRow& row : report.epochs) {
    out << row.epoch << ',' << to_string(row.bam);
    for (std::size_t c = 0; c < classes; ++c) out << ',' << row.arrivals[c];
    for (std::size_t c = 0; c < classes; ++c) out << ',' << row.rejects[c];
    for (std::size_t c = 0; c < classes; ++c) {
      out << ',' << number(row.blocking[c]);
    }
    out << ',' << number(row.utilization) << ','
        << number(row.aggregate_blocking) << ',' << number(row.mean_blocking)
        << ',' << number(row.loss_proxy) << ',' << row.preemptions << ','
        << row.profile_id << ',' << to_string(row.action) << ','
        << (row.switched ? 1 : 0) << ',' << number(row.reward) << '\n';
  }

  const RunTotals& t = report.totals;
  out << "# measured_epochs=" << t.measured_epochs << '\n';
  out << "# mean_utilization=" << number(t.mean_utilization) << '\n';
  out << "# mean_reward=" << number(t.mean_reward) << '\n';
  out << "# aggregate_blocking=" << number(t.aggregate_blocking) << '\n';
  out << "# mean_blocking=" << number(t.mean_blocking) << '\n';
  out << "# preemptions=" << t.preemptions << '\n';
  out << "# switches=" << t.switches << '\n';
  out << "# occupancy=" << number(t.occupancy) << '\n';
  return out.str();
}

CompareEntry summarize_runs(const std::string& label,
                            const std::vector<std::uint64_t>& seeds,
                            const std::vector<RunReport>& reports) {
  CompareEntry entry;
  entry.label = label;
  entry.seeds = seeds;
  for (const RunReport& r : reports) {
    entry.rewards.push_back(r.totals.mean_reward);
    entry.utilizations.push_back(r.totals.mean_utilization);
    entry.blockings.push_back(r.totals.aggregate_blocking);
    entry.switches.push_back(r.totals.switches);
    entry.digests.push_back(hex_digest(r.workload_digest));
    entry.mean_reward += r.totals.mean_reward;
    entry.mean_utilization += r.totals.mean_utilization;
    entry.mean_blocking += r.totals.aggregate_blocking;
    entry.mean_switches += static_cast<double>(r.totals.switches);
  }
  if (!reports.empty()) {
    const double n = static_cast<double>(reports.size());
    entry.mean_reward /= n;
    entry.mean_utilization /= n;
    entry.mean_blocking /= n;
    entry.mean_switches /= n;
  }
  return entry;
}

std::string compare_to_json(const std::vector<CompareEntry>& entries,
                            const ScenarioConfig& config) {
  json list = json::array();
  for (const CompareEntry& e : entries) {
    list.push_back({{"controller", e.label},
                    {"seeds", e.seeds},
                    {"per_seed",
                     {{"mean_reward", e.rewards},
                      {"mean_utilization", e.utilizations},
                      {"aggregate_blocking", e.blockings},
                      {"switches", e.switches},
                      {"workload_digest", e.digests}}},
                    {"mean_reward", e.mean_reward},
                    {"mean_utilization", e.mean_utilization},
                    {"mean_blocking", e.mean_blocking},
                    {"mean_switches", e.mean_switches}});
  }
  json j = {{"schema_version", 1},
            {"scenario", json::parse(scenario_to_json(config))},
            {"controllers", list}};
  return j.dump(2) + "\n";
}

std::string compare_to_text(const std::vector<CompareEntry>& entries) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-10s %6s %12s %12s %14s %14s\n",
                "controller", "seeds", "mean_reward", "mean_util",
                "mean_blocking", "mean_switches");
  out << line;
  for (const CompareEntry& e : entries) {
    std::snprintf(line, sizeof(line), "%-10s %6zu %12.4f %12.4f %14.4f %14.2f\n",
                  e.label.c_str(), e.seeds.size(), e.mean_reward,
                  e.mean_utilization, e.mean_blocking, e.mean_switches);
    out << line;
  }
  return out.str();
}

}  // namespace bamsim
