#include "bamsim/bam_config.hpp"

#include <numeric>

namespace bamsim {

const char* to_string(BamKind k) {
  switch (k) {
    case BamKind::MAM: return "MAM";
    case BamKind::RDM: return "RDM";
    case BamKind::ATCS: return "ATCS";
  }
  return "?";
}

std::optional<BamKind> bam_kind_from_string(std::string_view s) {
  if (s == "MAM") return BamKind::MAM;
  if (s == "RDM") return BamKind::RDM;
  if (s == "ATCS") return BamKind::ATCS;
  return std::nullopt;
}

const char* to_string(SwitchMode m) {
  return m == SwitchMode::KeepAll ? "keep_all" : "enforce_new";
}

std::optional<SwitchMode> switch_mode_from_string(std::string_view s) {
  if (s == "keep_all") return SwitchMode::KeepAll;
  if (s == "enforce_new") return SwitchMode::EnforceNew;
  return std::nullopt;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Admit: return "admit";
    case Verdict::AdmitWithPreemption: return "admit_with_preemption";
    case Verdict::Reject: return "reject";
  }
  return "?";
}

const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::None: return "none";
    case RejectReason::ClassCap: return "class_cap";
    case RejectReason::CumulativeCap: return "cumulative_cap";
    case RejectReason::TotalCapacity: return "total_capacity";
    case RejectReason::ShareInfeasible: return "share_infeasible";
  }
  return "?";
}

BamConfigSet::BamConfigSet(Bandwidth capacity, std::vector<Bandwidth> mam_bc,
                           std::vector<Bandwidth> rdm_bc,
                           std::vector<Bandwidth> atcs_bc)
    : capacity_(capacity) {
  configs_[static_cast<int>(BamKind::MAM)] = {capacity, std::move(mam_bc)};
  configs_[static_cast<int>(BamKind::RDM)] = {capacity, std::move(rdm_bc)};
  configs_[static_cast<int>(BamKind::ATCS)] = {capacity, std::move(atcs_bc)};
}

const BamConfig& BamConfigSet::get(BamKind kind) const {
  return configs_[static_cast<int>(kind)];
}

int BamConfigSet::class_count() const {
  return configs_[0].class_count();
}

std::vector<std::string> BamConfigSet::validate() const {
  std::vector<std::string> errors;
  if (capacity_ <= 0) errors.push_back("capacity must be positive");

  const auto& mam = get(BamKind::MAM).bc;
  const auto& rdm = get(BamKind::RDM).bc;
  const auto& atcs = get(BamKind::ATCS).bc;

  if (mam.empty()) errors.push_back("at least one traffic class is required");
  if (rdm.size() != mam.size() || atcs.size() != mam.size()) {
    errors.push_back("constraint vectors must all have the same length");
    return errors;  // later checks assume equal lengths
  }

  for (std::size_t c = 0; c < mam.size(); ++c) {
    if (mam[c] < 0 || rdm[c] < 0 || atcs[c] < 0) {
      errors.push_back("constraint values must be nonnegative (class " +
                       std::to_string(c) + ")");
    }
    if (mam[c] > capacity_) {
      errors.push_back("MAM bc[" + std::to_string(c) +
                       "] exceeds link capacity");
    }
    if (c > 0 && rdm[c] < rdm[c - 1]) {
      errors.push_back("RDM bc must be nondecreasing (bc[" + std::to_string(c) +
                       "] < bc[" + std::to_string(c - 1) + "])");
    }
  }
  if (!rdm.empty() && rdm.back() != capacity_) {
    errors.push_back("RDM bc must end at the link capacity");
  }
  if (!atcs.empty()) {
    const Bandwidth sum = std::accumulate(atcs.begin(), atcs.end(), Bandwidth{0});
    if (sum != capacity_) {
      errors.push_back("ATCS shares must sum to the link capacity");
    }
  }
  return errors;
}

}  // namespace bamsim
