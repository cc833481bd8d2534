#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bamsim {

using FlowId = std::uint64_t;
using Bandwidth = std::int64_t;  // integer bandwidth units end to end

enum class BamKind { MAM = 0, RDM = 1, ATCS = 2 };
inline constexpr int kBamKindCount = 3;
inline constexpr BamKind kBamKinds[kBamKindCount] = {BamKind::MAM, BamKind::RDM,
                                                     BamKind::ATCS};

const char* to_string(BamKind k);
std::optional<BamKind> bam_kind_from_string(std::string_view s);

enum class SwitchMode { KeepAll, EnforceNew };
const char* to_string(SwitchMode m);
std::optional<SwitchMode> switch_mode_from_string(std::string_view s);

struct FlowRequest {
  FlowId id = 0;
  int cls = 0;  // class index, 0 = highest priority
  Bandwidth bandwidth = 0;
  double arrival_time = 0.0;
  double holding_time = 0.0;
};

// One admitted flow on one link. `lender`, when set, names the class whose
// share this allocation occupies instead of its own class's share.
struct Allocation {
  FlowId id = 0;
  int cls = 0;
  Bandwidth bandwidth = 0;
  std::optional<int> lender;
  double admitted_at = 0.0;
  std::uint64_t seq = 0;  // global admission counter, newest = largest

  int budget_class() const { return lender ? *lender : cls; }
  friend bool operator==(const Allocation&, const Allocation&) = default;
};

enum class Verdict { Admit, AdmitWithPreemption, Reject };
const char* to_string(Verdict v);

enum class RejectReason {
  None,
  ClassCap,         // per-class ceiling exceeded
  CumulativeCap,    // nested cumulative ceiling exceeded
  TotalCapacity,    // link capacity exceeded
  ShareInfeasible,  // no share assignment fits the request
};
const char* to_string(RejectReason r);

struct Decision {
  Verdict verdict = Verdict::Reject;
  std::vector<FlowId> victims;                  // non-empty iff AdmitWithPreemption
  RejectReason reason = RejectReason::None;     // set iff Reject
  std::optional<int> lender;                    // share the new allocation occupies
  bool ledger_rewrite = false;                  // applying reassigns existing loans

  bool admissible() const { return verdict != Verdict::Reject; }
};

enum class ErrorCode {
  DuplicateFlowId,
  UnknownFlowId,
  NonPositiveBandwidth,
  BadClassIndex,
  UnknownLink,
  UnknownRoute,
  EmptyWindow,
  InvalidSpec,
  InvalidScenario,
  BadState,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace bamsim
