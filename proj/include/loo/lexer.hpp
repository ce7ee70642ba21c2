// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cctype>
#include <stdexcept>
#include <string>
#include <vector>

#include "loo/base.hpp"

namespace loo {

struct ParseError : std::runtime_error {
  SrcPos pos;
  ParseError(SrcPos p, const std::string& msg)
      : std::runtime_error("parse error at " + std::to_string(p.line) + ":" +
                           std::to_string(p.col) + ": " + msg),
        pos(p) {}
};

struct Token {
  enum class Kind { Ident, Int, Str, Punct, End };
  Kind kind;
  std::string text;  // identifier, punct spelling
  std::int64_t ival = 0;
  std::string sval;
  SrcPos pos;
};

// Shared by the .loo, .spec, .scn, and .proof readers. Identifiers admit
// trailing primes (key') and '$' so generated temporaries stay printable.
class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { next(); }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    next();
    return t;
  }

  bool at(const std::string& punct_or_kw) const {
    return (tok_.kind == Token::Kind::Punct || tok_.kind == Token::Kind::Ident) &&
           tok_.text == punct_or_kw;
  }
  bool at_ident() const { return tok_.kind == Token::Kind::Ident; }
  bool at_end() const { return tok_.kind == Token::Kind::End; }

  bool eat(const std::string& s) {
    if (!at(s)) return false;
    next();
    return true;
  }
  void expect(const std::string& s) {
    if (!eat(s)) fail("expected '" + s + "', found '" + tok_.text + "'");
  }
  std::string expect_ident(const char* what = "identifier") {
    if (tok_.kind != Token::Kind::Ident)
      fail(std::string("expected ") + what + ", found '" + tok_.text + "'");
    return take().text;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(tok_.pos, msg);
  }
  SrcPos pos() const { return tok_.pos; }

 private:
  static bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
  }
  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
           c == '\'' || c == '$';
  }

  void next() {
    skip_ws();
    tok_.pos = cur();
    if (i_ >= src_.size()) {
      tok_ = Token{Token::Kind::End, "<eof>", 0, "", cur()};
      return;
    }
    char c = src_[i_];
    if (ident_start(c)) {
      size_t j = i_;
      while (j < src_.size() && ident_char(src_[j])) ++j;
      tok_ = Token{Token::Kind::Ident, src_.substr(i_, j - i_), 0, "", cur()};
      advance(j - i_);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i_;
      while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j])))
        ++j;
      Token t{Token::Kind::Int, src_.substr(i_, j - i_), 0, "", cur()};
      t.ival = std::stoll(t.text);
      tok_ = t;
      advance(j - i_);
      return;
    }
    if (c == '"') {
      std::string out;
      size_t j = i_ + 1;
      while (j < src_.size() && src_[j] != '"') {
        if (src_[j] == '\\' && j + 1 < src_.size()) ++j;
        out.push_back(src_[j]);
        ++j;
      }
      if (j >= src_.size()) throw ParseError(cur(), "unterminated string");
      Token t{Token::Kind::Str, out, 0, out, cur()};
      tok_ = t;
      advance(j + 1 - i_);
      return;
    }
    // Multi-character punctuation, longest first.
    static const char* puncts[] = {"|-", "||", "/\\", "\\/", "->", "==", "!=",
                                   "<=", ">=", ":=", "+=", "-=", "..", "::"};
    for (const char* p : puncts) {
      size_t n = std::char_traits<char>::length(p);
      if (src_.compare(i_, n, p) == 0) {
        tok_ = Token{Token::Kind::Punct, p, 0, "", cur()};
        advance(n);
        return;
      }
    }
    tok_ = Token{Token::Kind::Punct, std::string(1, c), 0, "", cur()};
    advance(1);
  }

  void skip_ws() {
    for (;;) {
      while (i_ < src_.size() &&
             std::isspace(static_cast<unsigned char>(src_[i_])))
        advance(1);
      if (i_ >= src_.size()) break;
      if (src_.compare(i_, 2, "//") == 0 || src_[i_] == '#') {
        while (i_ < src_.size() && src_[i_] != '\n') advance(1);
        continue;
      }
      if (src_.compare(i_, 2, "/*") == 0) {
        advance(2);
        while (i_ < src_.size() && src_.compare(i_, 2, "*/") != 0) advance(1);
        if (i_ < src_.size()) advance(2);
        continue;
      }
      break;
    }
  }

  SrcPos cur() const { return SrcPos{line_, col_}; }
  void advance(size_t n) {
    for (size_t k = 0; k < n && i_ < src_.size(); ++k, ++i_) {
      if (src_[i_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
    }
  }

  std::string src_;
  size_t i_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

}  // namespace loo
