#pragma once

#include <map>
#include <string>

#include "tabverify/table.hpp"

namespace tabverify::table {

// Parses a standalone expression whose identifiers are resolved in `scope`.
ExprPtr parse_expr(const std::string& text, const std::map<std::string, ValueType>& scope);

ValueType value_type_from_string(const std::string& s);

}  // namespace tabverify::table
