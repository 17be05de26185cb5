#pragma once

// Items query language: the candidate-filtering expression language.
//
//   expr    := or
//   or      := and ("or" and)*
//   and     := unary ("and" unary)*
//   unary   := "not" unary | cmp | "(" expr ")"
//   cmp     := operand (op operand | "in" list | "contains" operand)?
//   operand := attrname | number | quoted-string | "true" | "false"
//   list    := "[" (literal ("," literal)*)? "]"
//
// Keywords are case-insensitive. A bare operand is a valid condition only when
// it is an attribute reference (a boolean column); every comparison must
// reference at least one attribute, so constant predicates such as
// `true == true` are rejected at parse time.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "fusionrec/common.hpp"

namespace fusionrec::iql {

enum class ValueType { numeric, string, string_list, boolean };

std::string type_name(ValueType t);

struct SyntaxError : Error {
    SyntaxError(std::size_t offset, std::vector<std::string> expected, const std::string& what);
    std::size_t offset;
    std::vector<std::string> expected;
};

struct TypeError : Error {
    TypeError(std::size_t offset, const std::string& what);
    std::size_t offset;
};

using ScalarLiteral = std::variant<double, std::string, bool>;

enum class CmpOp { eq, ne, lt, le, gt, ge };

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
    enum class Kind {
        literal,       // scalar literal
        list_literal,  // bracketed literal list
        attribute,     // column reference
        compare,       // lhs op rhs
        in_op,         // lhs in rhs (list literal or string_list attribute)
        contains_op,   // lhs contains rhs (byte substring)
        and_op,
        or_op,
        not_op,
    };

    Kind kind;
    std::size_t offset = 0;  // byte offset in the query text

    ScalarLiteral literal;
    std::vector<ScalarLiteral> list;
    std::string attr;
    CmpOp op = CmpOp::eq;
    ExprPtr lhs;
    ExprPtr rhs;

    // Filled in by typecheck.
    ValueType value_type = ValueType::boolean;  // for operand nodes
    std::uint32_t attr_index = 0;               // column position for attribute nodes
};

ExprPtr parse(const std::string& text);

struct CatalogSchema {
    // Declaration order defines column order.
    std::vector<std::pair<std::string, ValueType>> attributes;

    std::uint32_t index_of(const std::string& name) const;  // throws ContractError
    bool contains(const std::string& name) const;
    std::uint32_t size() const { return static_cast<std::uint32_t>(attributes.size()); }
};

// Parses {"attr": "numeric" | "string" | "string_list" | "boolean", ...}.
CatalogSchema parse_schema_json(const std::string& json_text);

// Resolves attribute references and checks operand types in place: ordering
// only on numeric, `contains` on string/string_list, `in` between a scalar and
// a list literal or string_list column, booleans only under logical operators.
void typecheck(Expr& root, const CatalogSchema& schema);

std::string to_string(const Expr& e);  // debug rendering of a parse tree

}  // namespace fusionrec::iql
