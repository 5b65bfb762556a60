#include <cctype>
#include <optional>

#include "credo/error.hpp"
#include "credo/logic/formula.hpp"

namespace credo::logic {

namespace {

enum class Tok { Ident, String, Not, And, Or, Arrow, LParen, RParen, End };

struct Token {
  Tok kind;
  std::size_t offset;
  std::string text;
};

const char* describe(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::String: return "quoted atom";
    case Tok::Not: return "'!'";
    case Tok::And: return "'&'";
    case Tok::Or: return "'|'";
    case Tok::Arrow: return "'->'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::End: return "end of input";
  }
  return "token";
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::size_t start = pos_;
    if (pos_ == text_.size()) return {Tok::End, start, {}};
    const char c = text_[pos_];
    switch (c) {
      case '!': ++pos_; return {Tok::Not, start, "!"};
      case '&': ++pos_; return {Tok::And, start, "&"};
      case '|': ++pos_; return {Tok::Or, start, "|"};
      case '(': ++pos_; return {Tok::LParen, start, "("};
      case ')': ++pos_; return {Tok::RParen, start, ")"};
      case '-':
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
          pos_ += 2;
          return {Tok::Arrow, start, "->"};
        }
        throw SyntaxError(start, "expected '->'");
      case '"': return string_literal();
      default: break;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      return {Tok::Ident, start, std::string(text_.substr(start, pos_ - start))};
    }
    throw SyntaxError(start, std::string("unexpected character '") + c + "'");
  }

 private:
  Token string_literal() {
    const std::size_t start = pos_++;
    std::string value;
    while (pos_ < text_.size()) {
      const char c = text_[pos_++];
      if (c == '"') return {Tok::String, start, std::move(value)};
      if (c == '\\') {
        if (pos_ == text_.size()) break;
        value.push_back(text_[pos_++]);
      } else {
        value.push_back(c);
      }
    }
    throw SyntaxError(start, "unterminated quoted atom");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  Parser(std::string_view text, AtomRegistry* mutable_registry, const AtomRegistry& registry, bool auto_register)
      : lexer_(text), mutable_(mutable_registry), registry_(registry), auto_register_(auto_register) {
    advance();
  }

  Formula parse() {
    Formula f = implication();
    if (current_.kind != Tok::End) fail("expected end of input");
    return f;
  }

 private:
  void advance() { current_ = lexer_.next(); }

  [[noreturn]] void fail(const std::string& what) const {
    throw SyntaxError(current_.offset, what + ", found " + describe(current_.kind));
  }

  Formula implication() {
    Formula lhs = disjunction();
    if (current_.kind == Tok::Arrow) {
      advance();
      return implies(std::move(lhs), implication());
    }
    return lhs;
  }

  Formula disjunction() {
    Formula lhs = conjunction();
    while (current_.kind == Tok::Or) {
      advance();
      lhs = disjoin(std::move(lhs), conjunction());
    }
    return lhs;
  }

  Formula conjunction() {
    Formula lhs = unary();
    while (current_.kind == Tok::And) {
      advance();
      lhs = conjoin(std::move(lhs), unary());
    }
    return lhs;
  }

  Formula unary() {
    if (current_.kind == Tok::Not) {
      advance();
      return negate(unary());
    }
    return primary();
  }

  Formula primary() {
    switch (current_.kind) {
      case Tok::LParen: {
        advance();
        Formula inner = implication();
        if (current_.kind != Tok::RParen) fail("expected ')'");
        advance();
        return inner;
      }
      case Tok::Ident: {
        Formula f = atom(resolve_identifier(current_));
        advance();
        return f;
      }
      case Tok::String: {
        Formula f = atom(resolve_surface(current_));
        advance();
        return f;
      }
      default:
        fail("expected an atom, '!' or '('");
    }
  }

  std::string resolve_identifier(const Token& t) {
    if (registry_.contains(t.text)) return t.text;
    if (!auto_register_ || mutable_ == nullptr)
      throw Error(ErrorCode::UnknownAtom, "atom '" + t.text + "' at offset " + std::to_string(t.offset) +
                                              " is not registered");
    mutable_->add(t.text, t.text);
    return t.text;
  }

  std::string resolve_surface(const Token& t) {
    if (auto id = registry_.id_for_surface(t.text)) return *id;
    if (!auto_register_ || mutable_ == nullptr)
      throw Error(ErrorCode::UnknownAtom, "no atom with surface \"" + t.text + "\" (offset " +
                                              std::to_string(t.offset) + ")");
    return mutable_->intern_surface(t.text);
  }

  Lexer lexer_;
  Token current_{Tok::End, 0, {}};
  AtomRegistry* mutable_;
  const AtomRegistry& registry_;
  bool auto_register_;
};

}  // namespace

Formula parse_formula(std::string_view text, AtomRegistry& registry, ParseOptions options) {
  return Parser(text, &registry, registry, options.auto_register).parse();
}

Formula parse_formula(std::string_view text, const AtomRegistry& registry) {
  return Parser(text, nullptr, registry, false).parse();
}

}  // namespace credo::logic
