#include "rollcard/cycle.hpp"

#include <algorithm>
#include <unordered_map>

namespace rollcard {

CycleCheckResult check_acyclic_incremental(
    const std::vector<std::pair<std::string, std::string>>& edges) {
  std::unordered_map<std::string, int> ids;
  std::vector<std::string> names;
  auto intern = [&](const std::string& name) {
    auto [it, inserted] = ids.try_emplace(name, static_cast<int>(names.size()));
    if (inserted) names.push_back(name);
    return it->second;
  };

  std::vector<std::vector<int>> adjacency;
  std::vector<int> seen;        // BFS visit stamps, avoids clearing
  std::vector<int> parent;      // BFS predecessor for witness reconstruction
  int stamp = 0;

  for (std::size_t i = 0; i < edges.size(); ++i) {
    int source = intern(edges[i].first);
    int target = intern(edges[i].second);
    std::size_t needed = names.size();
    if (adjacency.size() < needed) {
      adjacency.resize(needed);
      seen.resize(needed, 0);
      parent.resize(needed, -1);
    }

    // The new edge closes a cycle iff target already reaches source.
    ++stamp;
    std::vector<int> queue{target};
    seen[target] = stamp;
    parent[target] = -1;
    bool found = (target == source);
    for (std::size_t head = 0; head < queue.size() && !found; ++head) {
      for (int next : adjacency[queue[head]]) {
        if (seen[next] == stamp) continue;
        seen[next] = stamp;
        parent[next] = queue[head];
        if (next == source) {
          found = true;
          break;
        }
        queue.push_back(next);
      }
    }

    if (found) {
      CycleCheckResult result;
      result.acyclic = false;
      result.first_cycle_index = i;
      // Path target -> ... -> source, then the new edge source -> target
      // closes it. Report the cycle starting at target.
      std::vector<int> path;
      for (int at = source; at != -1; at = parent[at]) path.push_back(at);
      std::reverse(path.begin(), path.end());
      if (path.empty() || path.front() != target) path.insert(path.begin(), target);
      for (int node : path) result.witness.push_back(names[node]);
      return result;
    }
    adjacency[source].push_back(target);
  }
  return {};
}

}  // namespace rollcard
