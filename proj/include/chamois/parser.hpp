// Copyright (c) chamois-lite contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Text format:
//
//   function := "func" name "(" reg ("," reg)* ")" "entry" int "{" (int ":" instr)* "}"
//   instr    := "nop" "->" int
//             | reg ":=" int-literal "->" int
//             | reg ":=" "move" reg "->" int
//             | reg ":=" op reg reg "->" int
//             | "if" cmp reg reg "->" int "," int
//             | "return" reg
//   op  := add | sub | mul | div
//   cmp := eq | ne | lt | le | gt | ge
//   reg := "r" int
//
// "#" starts a comment running to the end of the line. A block file is a
// function followed by an optional trailer "live:" reg ("," reg)*.

#include <cctype>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chamois/ir.hpp"

namespace chamois {

class ParseError : public std::runtime_error {
  public:
    ParseError(int line, int column, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
          line_(line), column_(column) {}

    [[nodiscard]] int line() const { return line_; }
    [[nodiscard]] int column() const { return column_; }

  private:
    int line_;
    int column_;
};

struct BlockFile {
    Function function;
    std::vector<Reg> live;
};

namespace detail {

struct Token {
    enum Kind { ident, integer, symbol, end } kind = end;
    std::string text;
    int line = 1;
    int column = 1;
};

class Lexer {
  public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }

    [[nodiscard]] const Token& peek() const { return tok_; }

    Token next() {
        Token t = tok_;
        advance();
        return t;
    }

  private:
    void advance() {
        skip_space();
        tok_ = Token{};
        tok_.line = line_;
        tok_.column = col_;
        if (pos_ >= src_.size()) {
            tok_.kind = Token::end;
            return;
        }
        const char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            tok_.kind = Token::ident;
            while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
                take();
            }
        } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                   (c == '-' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            tok_.kind = Token::integer;
            take();
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                take();
            }
        } else if (src_.substr(pos_, 2) == ":=" || src_.substr(pos_, 2) == "->") {
            tok_.kind = Token::symbol;
            take();
            take();
        } else if (std::string_view("(),{}:").find(c) != std::string_view::npos) {
            tok_.kind = Token::symbol;
            take();
        } else {
            throw ParseError(line_, col_, std::string("unexpected character '") + c + "'");
        }
    }

    void take() {
        tok_.text += src_[pos_];
        ++pos_;
        ++col_;
    }

    void skip_space() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') {
                    ++pos_;
                }
            } else if (c == '\n') {
                ++pos_;
                ++line_;
                col_ = 1;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
                ++col_;
            } else {
                break;
            }
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    Token tok_;
};

class Parser {
  public:
    explicit Parser(std::string_view src) : lex_(src) {}

    Function function() {
        expect_word("func");
        Function f;
        Token name = lex_.next();
        if (name.kind != Token::ident) {
            fail(name, "expected function name");
        }
        f.name = name.text;
        expect_symbol("(");
        if (!is_symbol(")")) {
            while (true) {
                Token at = lex_.peek();
                Reg r = reg();
                for (Reg p : f.params) {
                    if (p == r) {
                        fail(at, "duplicate parameter " + reg_name(r));
                    }
                }
                f.params.push_back(r);
                if (!is_symbol(",")) {
                    break;
                }
                lex_.next();
            }
        }
        expect_symbol(")");
        expect_word("entry");
        Token entry_tok = lex_.peek();
        f.entry = location();
        expect_symbol("{");
        std::vector<std::pair<Token, Instr>> body;
        while (!is_symbol("}")) {
            Token at = lex_.peek();
            Loc l = location();
            if (f.code.contains(l)) {
                fail(at, "duplicate location " + std::to_string(l));
            }
            expect_symbol(":");
            Instr i = instruction();
            f.code = f.code.set(l, i);
            body.emplace_back(at, std::move(i));
        }
        expect_symbol("}");
        for (const auto& [at, i] : body) {
            for (Loc s : successors(i)) {
                if (!f.code.contains(s)) {
                    fail(at, "undefined location " + std::to_string(s));
                }
            }
        }
        if (!f.code.contains(f.entry)) {
            fail(entry_tok, "undefined location " + std::to_string(f.entry));
        }
        return f;
    }

    std::vector<Reg> live_trailer() {
        std::vector<Reg> live;
        if (lex_.peek().kind == Token::end) {
            return live;
        }
        expect_word("live");
        expect_symbol(":");
        if (lex_.peek().kind == Token::end) {
            return live;
        }
        live.push_back(reg());
        while (is_symbol(",")) {
            lex_.next();
            live.push_back(reg());
        }
        return live;
    }

    void expect_end() {
        if (lex_.peek().kind != Token::end) {
            fail(lex_.peek(), "unexpected '" + lex_.peek().text + "' after function");
        }
    }

  private:
    Instr instruction() {
        Token t = lex_.peek();
        if (t.kind == Token::ident && t.text == "nop") {
            lex_.next();
            return instr::Nop{arrow_target()};
        }
        if (t.kind == Token::ident && t.text == "return") {
            lex_.next();
            return instr::Return{reg()};
        }
        if (t.kind == Token::ident && t.text == "if") {
            lex_.next();
            Token ct = lex_.next();
            auto cmp = ct.kind == Token::ident ? cmp_from_string(ct.text) : std::nullopt;
            if (!cmp) {
                fail(ct, "expected comparison, got '" + ct.text + "'");
            }
            Reg a = reg();
            Reg b = reg();
            Loc yes = arrow_target();
            expect_symbol(",");
            Loc no = location();
            return instr::Branch{*cmp, a, b, yes, no};
        }
        Reg dst = reg();
        expect_symbol(":=");
        Token v = lex_.peek();
        if (v.kind == Token::integer) {
            lex_.next();
            return instr::Const{dst, Int(v.text), arrow_target()};
        }
        if (v.kind == Token::ident && v.text == "move") {
            lex_.next();
            Reg src = reg();
            return instr::Move{dst, src, arrow_target()};
        }
        auto op = v.kind == Token::ident ? binop_from_string(v.text) : std::nullopt;
        if (!op) {
            fail(v, "expected integer, 'move' or operator, got '" + v.text + "'");
        }
        lex_.next();
        Reg a = reg();
        Reg b = reg();
        return instr::Op{dst, *op, a, b, arrow_target()};
    }

    Loc arrow_target() {
        expect_symbol("->");
        return location();
    }

    Reg reg() {
        Token t = lex_.next();
        if (t.kind == Token::ident && t.text.size() > 1 && t.text[0] == 'r') {
            bool digits = true;
            for (std::size_t i = 1; i < t.text.size(); ++i) {
                digits = digits && std::isdigit(static_cast<unsigned char>(t.text[i]));
            }
            if (digits && t.text.size() < 19) {
                Reg r = std::stoll(t.text.substr(1));
                if (r >= 1) {
                    return r;
                }
            }
        }
        fail(t, "expected register, got '" + t.text + "'");
    }

    Loc location() {
        Token t = lex_.next();
        if (t.kind != Token::integer || t.text[0] == '-' || t.text.size() > 18) {
            fail(t, "expected location, got '" + t.text + "'");
        }
        Loc l = std::stoll(t.text);
        if (l < 1) {
            fail(t, "locations must be positive");
        }
        return l;
    }

    bool is_symbol(std::string_view s) const {
        return lex_.peek().kind == Token::symbol && lex_.peek().text == s;
    }

    void expect_symbol(std::string_view s) {
        Token t = lex_.next();
        if (t.kind != Token::symbol || t.text != s) {
            fail(t, "expected '" + std::string(s) + "', got '" + t.text + "'");
        }
    }

    void expect_word(std::string_view s) {
        Token t = lex_.next();
        if (t.kind != Token::ident || t.text != s) {
            fail(t, "expected '" + std::string(s) + "', got '" + t.text + "'");
        }
    }

    [[noreturn]] static void fail(const Token& t, const std::string& msg) { throw ParseError(t.line, t.column, msg); }

    Lexer lex_;
};

} // namespace detail

inline Function parse(std::string_view text) {
    detail::Parser p(text);
    Function f = p.function();
    p.expect_end();
    return f;
}

inline BlockFile parse_block_file(std::string_view text) {
    detail::Parser p(text);
    BlockFile b{p.function(), {}};
    b.live = p.live_trailer();
    p.expect_end();
    return b;
}

} // namespace chamois
