#pragma once

#include <string>
#include <vector>

#include "rollcard/rule_entry.hpp"

namespace rollcard::cli {

// Exit codes: 0 success/pass, 1 io failure, 2 conformance fail, 64 usage.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitConformance = 2;
inline constexpr int kExitUsage = 64;

int run(const std::vector<std::string>& args);

// name@version:key=value,... -> a fully declared rule entry. Policy branches
// not mentioned get the explicit defaults missing=fail, error=fail,
// unparseable=fail, group_filter=off, all echoed in the entry's config.
ReportingRuleEntry parse_rule_spec(const std::string& spec);

}  // namespace rollcard::cli
