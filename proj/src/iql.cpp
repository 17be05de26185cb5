#include "fusionrec/iql.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

#include "json.hpp"

namespace fusionrec::iql {

std::string type_name(ValueType t) {
    switch (t) {
        case ValueType::numeric: return "numeric";
        case ValueType::string: return "string";
        case ValueType::string_list: return "string_list";
        case ValueType::boolean: return "boolean";
    }
    return "?";
}

namespace {

std::string join_expected(const std::vector<std::string>& expected) {
    std::string out;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (i) out += expected.size() == 2 ? " or " : (i + 1 == expected.size() ? ", or " : ", ");
        out += expected[i];
    }
    return out;
}

}  // namespace

SyntaxError::SyntaxError(std::size_t offset_, std::vector<std::string> expected_,
                         const std::string& what)
    : Error("syntax error at offset " + std::to_string(offset_) + ": " + what +
            (expected_.empty() ? "" : " (expected " + join_expected(expected_) + ")")),
      offset(offset_),
      expected(std::move(expected_)) {}

TypeError::TypeError(std::size_t offset_, const std::string& what)
    : Error("type error at offset " + std::to_string(offset_) + ": " + what), offset(offset_) {}

namespace {

enum class Tok {
    lparen, rparen, lbracket, rbracket, comma,
    ident, number, string,
    kw_and, kw_or, kw_not, kw_in, kw_contains, kw_true, kw_false,
    eq, ne, lt, le, gt, ge,
    end,
};

struct Token {
    Tok kind;
    std::size_t offset;
    std::string text;
    double number = 0.0;
};

std::string ascii_lower(const std::string& s) {
    std::string out = s;
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) {}

    std::vector<Token> run() {
        std::vector<Token> tokens;
        while (true) {
            skip_ws();
            if (pos_ >= text_.size()) {
                tokens.push_back({Tok::end, text_.size(), ""});
                return tokens;
            }
            tokens.push_back(next());
        }
    }

private:
    void skip_ws() {
        while (pos_ < text_.size() &&
               std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    Token next() {
        const std::size_t at = pos_;
        const char c = text_[pos_];
        switch (c) {
            case '(': ++pos_; return {Tok::lparen, at, "("};
            case ')': ++pos_; return {Tok::rparen, at, ")"};
            case '[': ++pos_; return {Tok::lbracket, at, "["};
            case ']': ++pos_; return {Tok::rbracket, at, "]"};
            case ',': ++pos_; return {Tok::comma, at, ","};
            case '=':
                if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '=') {
                    pos_ += 2;
                    return {Tok::eq, at, "=="};
                }
                throw SyntaxError(at, {"=="}, "unexpected '='");
            case '!':
                if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '=') {
                    pos_ += 2;
                    return {Tok::ne, at, "!="};
                }
                throw SyntaxError(at, {"!="}, "unexpected '!'");
            case '<':
                if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '=') {
                    pos_ += 2;
                    return {Tok::le, at, "<="};
                }
                ++pos_;
                return {Tok::lt, at, "<"};
            case '>':
                if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '=') {
                    pos_ += 2;
                    return {Tok::ge, at, ">="};
                }
                ++pos_;
                return {Tok::gt, at, ">"};
            case '"': return lex_string(at);
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' ||
            (c == '.' && pos_ + 1 < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))))
            return lex_number(at);
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return lex_word(at);
        throw SyntaxError(at, {}, std::string("unexpected character '") + c + "'");
    }

    Token lex_string(std::size_t at) {
        ++pos_;  // opening quote
        std::string value;
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '"') {
                ++pos_;
                return {Tok::string, at, std::move(value)};
            }
            if (c == '\\' && pos_ + 1 < text_.size()) {
                const char esc = text_[pos_ + 1];
                if (esc == '"' || esc == '\\') {
                    value.push_back(esc);
                    pos_ += 2;
                    continue;
                }
            }
            value.push_back(c);
            ++pos_;
        }
        throw SyntaxError(at, {"closing '\"'"}, "unterminated string");
    }

    Token lex_number(std::size_t at) {
        std::size_t end = pos_;
        if (text_[end] == '-' || text_[end] == '+') ++end;
        while (end < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[end])) || text_[end] == '.'))
            ++end;
        if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
            ++end;
            if (end < text_.size() && (text_[end] == '-' || text_[end] == '+')) ++end;
            while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end])))
                ++end;
        }
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + end, value);
        if (ec != std::errc() || ptr != text_.data() + end)
            throw SyntaxError(at, {"number"}, "malformed number");
        Token t{Tok::number, at, text_.substr(pos_, end - pos_), value};
        pos_ = end;
        return t;
    }

    Token lex_word(std::size_t at) {
        std::size_t end = pos_;
        while (end < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_' ||
                text_[end] == '.'))
            ++end;
        std::string word = text_.substr(pos_, end - pos_);
        pos_ = end;
        const std::string lower = ascii_lower(word);
        if (lower == "and") return {Tok::kw_and, at, word};
        if (lower == "or") return {Tok::kw_or, at, word};
        if (lower == "not") return {Tok::kw_not, at, word};
        if (lower == "in") return {Tok::kw_in, at, word};
        if (lower == "contains") return {Tok::kw_contains, at, word};
        if (lower == "true") return {Tok::kw_true, at, word};
        if (lower == "false") return {Tok::kw_false, at, word};
        return {Tok::ident, at, std::move(word)};
    }

    const std::string& text_;
    std::size_t pos_ = 0;
};

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    ExprPtr run() {
        if (peek().kind == Tok::end)
            throw SyntaxError(peek().offset, {"expression"}, "empty query");
        ExprPtr e = parse_or();
        if (peek().kind != Tok::end)
            throw SyntaxError(peek().offset, {"'and'", "'or'", "end of input"},
                              "trailing input after expression");
        return e;
    }

private:
    const Token& peek() const { return tokens_[pos_]; }
    const Token& advance() { return tokens_[pos_++]; }
    bool match(Tok k) {
        if (peek().kind != k) return false;
        ++pos_;
        return true;
    }

    ExprPtr make(Expr::Kind kind, std::size_t offset) {
        auto e = std::make_unique<Expr>();
        e->kind = kind;
        e->offset = offset;
        return e;
    }

    ExprPtr parse_or() {
        ExprPtr lhs = parse_and();
        while (peek().kind == Tok::kw_or) {
            const std::size_t at = advance().offset;
            ExprPtr node = make(Expr::Kind::or_op, at);
            node->lhs = std::move(lhs);
            node->rhs = parse_and();
            lhs = std::move(node);
        }
        return lhs;
    }

    ExprPtr parse_and() {
        ExprPtr lhs = parse_unary();
        while (peek().kind == Tok::kw_and) {
            const std::size_t at = advance().offset;
            ExprPtr node = make(Expr::Kind::and_op, at);
            node->lhs = std::move(lhs);
            node->rhs = parse_unary();
            lhs = std::move(node);
        }
        return lhs;
    }

    ExprPtr parse_unary() {
        if (peek().kind == Tok::kw_not) {
            const std::size_t at = advance().offset;
            ExprPtr node = make(Expr::Kind::not_op, at);
            node->lhs = parse_unary();
            return node;
        }
        if (match(Tok::lparen)) {
            ExprPtr e = parse_or();
            if (!match(Tok::rparen))
                throw SyntaxError(peek().offset, {"')'"}, "unclosed parenthesis");
            return e;
        }
        return parse_cmp();
    }

    ExprPtr parse_cmp() {
        ExprPtr lhs = parse_operand();
        const Tok k = peek().kind;
        if (k == Tok::eq || k == Tok::ne || k == Tok::lt || k == Tok::le || k == Tok::gt ||
            k == Tok::ge) {
            const Token& op = advance();
            ExprPtr node = make(Expr::Kind::compare, op.offset);
            switch (op.kind) {
                case Tok::eq: node->op = CmpOp::eq; break;
                case Tok::ne: node->op = CmpOp::ne; break;
                case Tok::lt: node->op = CmpOp::lt; break;
                case Tok::le: node->op = CmpOp::le; break;
                case Tok::gt: node->op = CmpOp::gt; break;
                default: node->op = CmpOp::ge; break;
            }
            node->lhs = std::move(lhs);
            node->rhs = parse_operand();
            require_attribute_side(*node);
            return node;
        }
        if (k == Tok::kw_in) {
            const std::size_t at = advance().offset;
            ExprPtr node = make(Expr::Kind::in_op, at);
            node->lhs = std::move(lhs);
            node->rhs = peek().kind == Tok::lbracket ? parse_list() : parse_operand();
            require_attribute_side(*node);
            return node;
        }
        if (k == Tok::kw_contains) {
            const std::size_t at = advance().offset;
            ExprPtr node = make(Expr::Kind::contains_op, at);
            node->lhs = std::move(lhs);
            node->rhs = parse_operand();
            require_attribute_side(*node);
            return node;
        }
        // Bare operand: only an attribute reference can stand as a condition.
        if (lhs->kind != Expr::Kind::attribute)
            throw SyntaxError(peek().offset,
                              {"'=='", "'!='", "'<'", "'<='", "'>'", "'>='", "'in'", "'contains'"},
                              "literal cannot stand alone as a condition");
        return lhs;
    }

    void require_attribute_side(const Expr& node) {
        const bool has_attr = (node.lhs && node.lhs->kind == Expr::Kind::attribute) ||
                              (node.rhs && node.rhs->kind == Expr::Kind::attribute);
        if (!has_attr)
            throw SyntaxError(node.offset, {"attribute reference"},
                              "comparison must reference at least one attribute");
    }

    ExprPtr parse_operand() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::ident: {
                advance();
                ExprPtr e = make(Expr::Kind::attribute, t.offset);
                e->attr = t.text;
                return e;
            }
            case Tok::number: {
                advance();
                ExprPtr e = make(Expr::Kind::literal, t.offset);
                e->literal = t.number;
                return e;
            }
            case Tok::string: {
                advance();
                ExprPtr e = make(Expr::Kind::literal, t.offset);
                e->literal = t.text;
                return e;
            }
            case Tok::kw_true:
            case Tok::kw_false: {
                advance();
                ExprPtr e = make(Expr::Kind::literal, t.offset);
                e->literal = (t.kind == Tok::kw_true);
                return e;
            }
            default:
                throw SyntaxError(t.offset, {"attribute", "number", "string"},
                                  "expected an operand");
        }
    }

    ExprPtr parse_list() {
        const Token& open = advance();  // '['
        ExprPtr e = make(Expr::Kind::list_literal, open.offset);
        if (match(Tok::rbracket)) return e;
        while (true) {
            const Token& t = peek();
            switch (t.kind) {
                case Tok::number: e->list.emplace_back(t.number); break;
                case Tok::string: e->list.emplace_back(t.text); break;
                case Tok::kw_true: e->list.emplace_back(true); break;
                case Tok::kw_false: e->list.emplace_back(false); break;
                default:
                    throw SyntaxError(t.offset, {"number", "string", "']'"},
                                      "expected a literal inside list");
            }
            advance();
            if (match(Tok::rbracket)) return e;
            if (!match(Tok::comma))
                throw SyntaxError(peek().offset, {"','", "']'"}, "expected ',' or ']'");
        }
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

}  // namespace

ExprPtr parse(const std::string& text) { return Parser(Lexer(text).run()).run(); }

std::uint32_t CatalogSchema::index_of(const std::string& name) const {
    for (std::uint32_t i = 0; i < attributes.size(); ++i)
        if (attributes[i].first == name) return i;
    throw ContractError("unknown attribute: " + name);
}

bool CatalogSchema::contains(const std::string& name) const {
    for (const auto& [n, t] : attributes)
        if (n == name) return true;
    return false;
}

CatalogSchema parse_schema_json(const std::string& json_text) {
    const auto j = nlohmann::json::parse(json_text);
    if (!j.is_object()) throw ContractError("schema must be a JSON object");
    CatalogSchema schema;
    for (const auto& [name, value] : j.items()) {
        if (name.empty()) throw ContractError("schema attribute names must be non-empty");
        const std::string t = value.get<std::string>();
        ValueType vt;
        if (t == "numeric") vt = ValueType::numeric;
        else if (t == "string") vt = ValueType::string;
        else if (t == "string_list") vt = ValueType::string_list;
        else if (t == "boolean") vt = ValueType::boolean;
        else throw ContractError("unknown schema type: " + t);
        if (schema.contains(name)) throw ContractError("duplicate schema attribute: " + name);
        schema.attributes.emplace_back(name, vt);
    }
    return schema;
}

namespace {

ValueType literal_type(const ScalarLiteral& lit) {
    if (std::holds_alternative<double>(lit)) return ValueType::numeric;
    if (std::holds_alternative<std::string>(lit)) return ValueType::string;
    return ValueType::boolean;
}

// Resolves operand nodes; returns the operand's value type.
ValueType check_operand(Expr& e, const CatalogSchema& schema) {
    switch (e.kind) {
        case Expr::Kind::attribute: {
            if (!schema.contains(e.attr))
                throw TypeError(e.offset, "unknown attribute '" + e.attr + "'");
            e.attr_index = schema.index_of(e.attr);
            e.value_type = schema.attributes[e.attr_index].second;
            return e.value_type;
        }
        case Expr::Kind::literal:
            e.value_type = literal_type(e.literal);
            return e.value_type;
        default:
            throw TypeError(e.offset, "expected an operand");
    }
}

void check_condition(Expr& e, const CatalogSchema& schema);

void check_compare(Expr& e, const CatalogSchema& schema) {
    const ValueType lt = check_operand(*e.lhs, schema);
    const ValueType rt = check_operand(*e.rhs, schema);
    const bool ordering = e.op != CmpOp::eq && e.op != CmpOp::ne;
    if (ordering) {
        if (lt != ValueType::numeric || rt != ValueType::numeric)
            throw TypeError(e.offset, "ordering comparison requires numeric operands, got " +
                                          type_name(lt) + " and " + type_name(rt));
        return;
    }
    if (lt == ValueType::string_list || rt == ValueType::string_list)
        throw TypeError(e.offset, "string_list values cannot be compared with ==/!=");
    if (lt != rt)
        throw TypeError(e.offset, "cannot compare " + type_name(lt) + " with " + type_name(rt));
}

void check_in(Expr& e, const CatalogSchema& schema) {
    const ValueType lt = check_operand(*e.lhs, schema);
    if (lt == ValueType::string_list)
        throw TypeError(e.lhs->offset, "left side of 'in' must be a scalar");
    if (e.rhs->kind == Expr::Kind::list_literal) {
        for (const auto& item : e.rhs->list) {
            if (literal_type(item) != lt)
                throw TypeError(e.rhs->offset, "list elements must be " + type_name(lt));
        }
        e.rhs->value_type = ValueType::string_list;
        return;
    }
    const ValueType rt = check_operand(*e.rhs, schema);
    if (rt != ValueType::string_list)
        throw TypeError(e.rhs->offset,
                        "right side of 'in' must be a list literal or string_list attribute");
    if (lt != ValueType::string)
        throw TypeError(e.lhs->offset, "membership in a string_list requires a string value");
}

void check_contains(Expr& e, const CatalogSchema& schema) {
    const ValueType lt = check_operand(*e.lhs, schema);
    if (lt != ValueType::string && lt != ValueType::string_list)
        throw TypeError(e.lhs->offset, "'contains' requires a string or string_list left side");
    const ValueType rt = check_operand(*e.rhs, schema);
    if (rt != ValueType::string)
        throw TypeError(e.rhs->offset, "'contains' requires a string right side");
}

void check_condition(Expr& e, const CatalogSchema& schema) {
    switch (e.kind) {
        case Expr::Kind::and_op:
        case Expr::Kind::or_op:
            check_condition(*e.lhs, schema);
            check_condition(*e.rhs, schema);
            return;
        case Expr::Kind::not_op:
            check_condition(*e.lhs, schema);
            return;
        case Expr::Kind::compare:
            check_compare(e, schema);
            return;
        case Expr::Kind::in_op:
            check_in(e, schema);
            return;
        case Expr::Kind::contains_op:
            check_contains(e, schema);
            return;
        case Expr::Kind::attribute: {
            // A bare column is a condition only when boolean.
            const ValueType t = check_operand(e, schema);
            if (t != ValueType::boolean)
                throw TypeError(e.offset, "bare attribute '" + e.attr + "' is " + type_name(t) +
                                              ", only boolean attributes stand alone");
            return;
        }
        default:
            throw TypeError(e.offset, "literal is not a condition");
    }
}

}  // namespace

void typecheck(Expr& root, const CatalogSchema& schema) { check_condition(root, schema); }

namespace {

void render(const Expr& e, std::ostringstream& out) {
    switch (e.kind) {
        case Expr::Kind::literal:
            if (std::holds_alternative<double>(e.literal)) out << std::get<double>(e.literal);
            else if (std::holds_alternative<bool>(e.literal))
                out << (std::get<bool>(e.literal) ? "true" : "false");
            else out << '"' << std::get<std::string>(e.literal) << '"';
            break;
        case Expr::Kind::list_literal: {
            out << '[';
            for (std::size_t i = 0; i < e.list.size(); ++i) {
                if (i) out << ", ";
                Expr tmp;
                tmp.kind = Expr::Kind::literal;
                tmp.literal = e.list[i];
                render(tmp, out);
            }
            out << ']';
            break;
        }
        case Expr::Kind::attribute: out << e.attr; break;
        case Expr::Kind::compare: {
            static const char* names[] = {"==", "!=", "<", "<=", ">", ">="};
            out << '(';
            render(*e.lhs, out);
            out << ' ' << names[static_cast<int>(e.op)] << ' ';
            render(*e.rhs, out);
            out << ')';
            break;
        }
        case Expr::Kind::in_op:
            out << '(';
            render(*e.lhs, out);
            out << " in ";
            render(*e.rhs, out);
            out << ')';
            break;
        case Expr::Kind::contains_op:
            out << '(';
            render(*e.lhs, out);
            out << " contains ";
            render(*e.rhs, out);
            out << ')';
            break;
        case Expr::Kind::and_op:
            out << '(';
            render(*e.lhs, out);
            out << " and ";
            render(*e.rhs, out);
            out << ')';
            break;
        case Expr::Kind::or_op:
            out << '(';
            render(*e.lhs, out);
            out << " or ";
            render(*e.rhs, out);
            out << ')';
            break;
        case Expr::Kind::not_op:
            out << "(not ";
            render(*e.lhs, out);
            out << ')';
            break;
    }
}

}  // namespace

std::string to_string(const Expr& e) {
    std::ostringstream out;
    render(e, out);
    return out.str();
}

}  // namespace fusionrec::iql
