#pragma once

#include <string>
#include <utility>
#include <vector>

#include "causatree/dataset.hpp"
#include "causatree/infotheory.hpp"

namespace causatree {

struct ConfounderRemoval {
  std::string feature;       // removed feature X
  std::string explained_by;  // the Z with the smallest I(X;Y|Z)
  double mi_xy = 0.0;        // I(X;Y)
  double cmi_xyz = 0.0;      // I(X;Y|Z) for the recorded Z
};

struct ConfounderReport {
  std::vector<ConfounderRemoval> removed;  // sorted by feature name
  std::vector<std::string> retained;       // independent features kept
  std::vector<std::string> flagged;        // passed the relevance gate
  double tau_flag = 0.0;
  double epsilon = 0.0;
  double target_entropy = 0.0;  // H(Y) over the discretized target
  std::vector<std::string> notes;
};

// Backdoor-pattern screening over the independent features, with the
// discretized d2h as the target Y:
//
//   flag X    when I(X;Y) >= tau_flag * H(Y)
//   remove X  when some other original feature Z has
//             I(X;Y|Z) < epsilon * I(X;Y)
//
// Flags are evaluated on the original feature set and all removals are
// applied simultaneously, so a feature can serve as the explaining Z for
// another even if it is itself removed. Fewer than two independent features
// means there is nothing to condition on: the dataset passes through
// unchanged with a note. All statistics skip rows with missing cells in the
// variables involved.
std::pair<Dataset, ConfounderReport> filter_confounders(
    const Dataset& d, const Discretizer& disc, const TargetCodes& target,
    double tau_flag, double epsilon);

}  // namespace causatree
