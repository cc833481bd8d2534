#pragma once

#include <array>
#include <string>
#include <vector>

#include "bamsim/types.hpp"

namespace bamsim {

// Bandwidth-constraint vector for one allocation model on a link.
//
// Interpretation per model:
//   MAM:  bc[c] is a private per-class ceiling, bc[c] <= capacity.
//   RDM:  bc[c] caps the cumulative usage of classes 0..c; vector is
//         nondecreasing and bc[N-1] == capacity.
//   ATCS: bc[c] is class c's own share; shares sum to capacity and idle share
//         may be lent across classes.
struct BamConfig {
  Bandwidth capacity = 0;
  std::vector<Bandwidth> bc;

  int class_count() const { return static_cast<int>(bc.size()); }
  friend bool operator==(const BamConfig&, const BamConfig&) = default;
};

// The three constraint vectors for one link; capacity is shared so the link
// can switch models in place.
class BamConfigSet {
 public:
  BamConfigSet() = default;
  BamConfigSet(Bandwidth capacity, std::vector<Bandwidth> mam_bc,
               std::vector<Bandwidth> rdm_bc, std::vector<Bandwidth> atcs_bc);

  const BamConfig& get(BamKind kind) const;
  Bandwidth capacity() const { return capacity_; }
  int class_count() const;

  // All violated structural rules, empty when well formed.
  std::vector<std::string> validate() const;

  friend bool operator==(const BamConfigSet&, const BamConfigSet&) = default;

 private:
  Bandwidth capacity_ = 0;
  std::array<BamConfig, kBamKindCount> configs_;
};

}  // namespace bamsim
