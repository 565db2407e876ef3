#pragma once

#include "rollcard/jsonio.hpp"

namespace rollcard {

// JSON Schema (draft 2020-12) document covering the five stream row types
// plus the manifest: required columns, closed enumerations, and the
// extras-tolerance rule (additionalProperties stays true). Stable across
// runs.
Json export_row_schemas();

}  // namespace rollcard
