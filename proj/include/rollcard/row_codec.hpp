#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "rollcard/rows.hpp"

namespace rollcard {

using AnyRow =
    std::variant<EventRow, NodeRow, EdgeRow, AnnotationRow, MutationRow>;

// Parses one newline-free UTF-8 line into the typed row for the stream.
// Unknown columns are kept verbatim in the row's extras. Throws
// MalformedRecord, MissingRequiredColumn, or TypeMismatch.
EventRow parse_event_row(std::string_view line);
NodeRow parse_node_row(std::string_view line);
EdgeRow parse_edge_row(std::string_view line);
AnnotationRow parse_annotation_row(std::string_view line);
MutationRow parse_mutation_row(std::string_view line);

AnyRow parse_row(StreamKind kind, std::string_view line);

// Serializes a row to its canonical line (no trailing newline). Known columns
// come first in schema order, extras follow in their original order. Row
// invariants are checked first; violations throw InvariantViolation.
std::string serialize_row(const EventRow& row);
std::string serialize_row(const NodeRow& row);
std::string serialize_row(const EdgeRow& row);
std::string serialize_row(const AnnotationRow& row);
std::string serialize_row(const MutationRow& row);

std::string serialize_row(const AnyRow& row);

// Row-local invariant checks shared by serialize_row and the validator.
void check_row(const EventRow& row);
void check_row(const NodeRow& row);
void check_row(const EdgeRow& row);
void check_row(const AnnotationRow& row);
void check_row(const MutationRow& row);

}  // namespace rollcard
