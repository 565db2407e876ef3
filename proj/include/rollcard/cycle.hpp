#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace rollcard {

struct CycleCheckResult {
  bool acyclic = true;
  // Index of the first edge whose insertion closes a cycle.
  std::size_t first_cycle_index = 0;
  // One witness cycle as a node list [n0, n1, ..., nk] meaning
  // n0 -> n1 -> ... -> nk -> n0.
  std::vector<std::string> witness;
};

// Inserts edges in order and reports the first insertion that creates a
// cycle. Agrees with a per-prefix topological-sort brute force.
CycleCheckResult check_acyclic_incremental(
    const std::vector<std::pair<std::string, std::string>>& edges);

}  // namespace rollcard
