#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rollcard/access.hpp"

namespace rollcard {

inline constexpr std::array<std::string_view, 6> kBuiltinViews = {
    "final_score",       "token_step_rl",        "per_worker",
    "tool_call_safety",  "proof_search_summary", "search_tree"};

inline constexpr std::array<std::string_view, 6> kQuantities = {
    "return",    "timing",     "worker_flow",
    "tool_safety", "proof_cost", "search_shape"};

// Projection spec. Built-in names carry fixed column plans; custom specs name
// every source field they read.
struct ViewSpec {
  std::string name;
  bool builtin = true;
  // custom projection: one stream, explicit columns, declarative filter
  std::string custom_stream;
  std::vector<std::string> custom_columns;
  Filter custom_filter = Filter::always();

  static ViewSpec builtin_view(const std::string& name);
  static ViewSpec custom(std::string name, std::string stream,
                         std::vector<std::string> columns, Filter filter);
};

// T_v plus its drops manifest D_v; the pair is v(R) = (T_v, D_v).
struct ViewTable {
  std::string view_name;
  std::vector<Record> rows;
  DropsManifest provenance;
};

// Projects the card through a tracked reader. Built-in views degrade
// explicitly (omissions recorded in the manifest) when optional source
// fields are absent; custom specs throw MissingSourceField instead.
ViewTable project(const CardSource& source, const ViewSpec& spec);
ViewTable project(const CardBundle& card, const ViewSpec& spec);

// Newline-delimited records; the drops manifest is the sidecar document.
std::string serialize_table(const ViewTable& table);

enum class Preservation { Preserved, Partial, Erased };

struct PreservationStatus {
  std::string quantity;
  Preservation status = Preservation::Erased;
  std::string note;  // free-text proxy note for partial cells
};

std::string_view preservation_name(Preservation p);

// Reference computation of a quantity over the full card (the mu oracle).
Json compute_quantity(const CardSource& source, const std::string& quantity);

// Operational test: preserved iff the view table alone reproduces the
// full-card value; erased iff the table carries no related column; partial
// otherwise. Never a table lookup.
PreservationStatus preservation_status(const CardSource& source,
                                       const ViewSpec& spec,
                                       const std::string& quantity);
PreservationStatus preservation_status(const CardBundle& card,
                                       const ViewSpec& spec,
                                       const std::string& quantity);

}  // namespace rollcard
