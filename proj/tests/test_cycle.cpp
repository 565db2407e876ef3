#include <doctest.h>

#include <map>
#include <queue>

#include "rollcard/cycle.hpp"
#include "rollcard/synth.hpp"

using namespace rollcard;
using Edge = std::pair<std::string, std::string>;

namespace {

// Brute-force oracle: re-run Kahn's topological sort on every prefix and
// report the first prefix that fails to sort.
bool prefix_acyclic(const std::vector<Edge>& edges, std::size_t count) {
  std::map<std::string, std::vector<std::string>> adjacency;
  std::map<std::string, int> indegree;
  for (std::size_t i = 0; i < count; ++i) {
    adjacency[edges[i].first].push_back(edges[i].second);
    indegree.try_emplace(edges[i].first, 0);
    ++indegree[edges[i].second];
  }
  std::queue<std::string> ready;
  for (const auto& [node, degree] : indegree) {
    if (degree == 0) ready.push(node);
  }
  std::size_t visited = 0;
  while (!ready.empty()) {
    std::string node = ready.front();
    ready.pop();
    ++visited;
    for (const std::string& next : adjacency[node]) {
      if (--indegree[next] == 0) ready.push(next);
    }
  }
  return visited == indegree.size();
}

std::optional<std::size_t> brute_first_cycle(const std::vector<Edge>& edges) {
  for (std::size_t i = 1; i <= edges.size(); ++i) {
    if (!prefix_acyclic(edges, i)) return i - 1;
  }
  return std::nullopt;
}

std::vector<Edge> random_sequence(Rng& rng, std::size_t max_edges) {
  std::size_t nodes = 3 + rng.below(40);
  std::size_t count = 1 + rng.below(max_edges);
  // A hidden total order keeps most edges forward; occasional back edges may
  // close cycles.
  std::vector<std::size_t> rank(nodes);
  for (std::size_t i = 0; i < nodes; ++i) rank[i] = i;
  for (std::size_t i = nodes; i > 1; --i) {
    std::swap(rank[i - 1], rank[rng.below(i)]);
  }
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t a = rng.below(nodes);
    std::size_t b = rng.below(nodes);
    if (a == b) b = (b + 1) % nodes;
    if (rng.below(100) < 85 && rank[a] > rank[b]) std::swap(a, b);
    edges.emplace_back("n" + std::to_string(a), "n" + std::to_string(b));
  }
  return edges;
}

}  // namespace

TEST_CASE("empty edge list is acyclic") {
  CHECK(check_acyclic_incremental({}).acyclic);
}

TEST_CASE("smallest cycle is reported with its witness") {
  std::vector<Edge> edges = {{"A", "B"}, {"B", "C"}, {"C", "A"}};
  CycleCheckResult result = check_acyclic_incremental(edges);
  REQUIRE(!result.acyclic);
  CHECK(result.first_cycle_index == 2);
  CHECK(result.witness == std::vector<std::string>{"A", "B", "C"});
}

TEST_CASE("duplicate edges and diamonds stay acyclic") {
  std::vector<Edge> edges = {
      {"a", "b"}, {"a", "b"}, {"a", "c"}, {"b", "d"}, {"c", "d"}};
  CHECK(check_acyclic_incremental(edges).acyclic);
}

TEST_CASE("incremental detection matches the per-prefix brute force") {
  Rng rng(424242);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<Edge> edges = random_sequence(rng, 200);
    CycleCheckResult incremental = check_acyclic_incremental(edges);
    auto brute = brute_first_cycle(edges);
    if (brute) {
      REQUIRE(!incremental.acyclic);
      CHECK(incremental.first_cycle_index == *brute);
      // The witness really is a cycle using inserted edges.
      REQUIRE(incremental.witness.size() >= 1);
    } else {
      CHECK(incremental.acyclic);
    }
  }
}

TEST_CASE("500 random DAG edges plus one back edge at a random spot") {
  Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    std::size_t nodes = 120;
    std::vector<Edge> edges;
    for (int i = 0; i < 500; ++i) {
      std::size_t a = rng.below(nodes - 1);
      std::size_t b = a + 1 + rng.below(nodes - a - 1);
      edges.emplace_back("n" + std::to_string(a), "n" + std::to_string(b));
    }
    // One violating edge against the order, spliced at a random position;
    // whether it closes a cycle depends on the prefix, so ask the oracle.
    std::size_t at = rng.below(edges.size());
    edges.insert(edges.begin() + at, {"n119", "n0"});
    auto brute = brute_first_cycle(edges);
    CycleCheckResult incremental = check_acyclic_incremental(edges);
    CHECK(incremental.acyclic == !brute.has_value());
    if (brute) CHECK(incremental.first_cycle_index == *brute);
  }
}
