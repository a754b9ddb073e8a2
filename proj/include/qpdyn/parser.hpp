#pragma once

#include "core.hpp"
#include "poly.hpp"
#include "ratmap.hpp"

#include <json.hpp>

#include <cctype>
#include <string>

namespace qpdyn {

// Recursive-descent parser for the map grammar:
//   rational := sum ('/' sum)?
//   sum      := term (('+'|'-') term)*
//   term     := factor ('*'? factor)*
//   factor   := INT | INT '/' INT | 'z' | factor '^' UINT | '(' sum ')' | '-' factor
// One top-level division; nested division is rejected.
class MapParser {
public:
    explicit MapParser(std::string text) : text_(std::move(text)) {}

    std::pair<Poly, Poly> parse() {
        Poly num = parseSum();
        Poly den{Rat(1)};
        skipWs();
        if (peek() == '/') {
            ++pos_;
            den = parseSum();
        }
        skipWs();
        if (pos_ != text_.size())
            fail("end of input");
        return {std::move(num), std::move(den)};
    }

private:
    std::string text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& expected) {
        throw ParseError("parse error at position " + std::to_string(pos_) +
                         ": expected " + expected);
    }

    void skipWs() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    char peek() {
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    bool startsFactor(char c) const {
        return std::isdigit(static_cast<unsigned char>(c)) || c == 'z' || c == '(';
    }

    Poly parseSum() {
        skipWs();
        Poly acc = parseTerm();
        for (;;) {
            skipWs();
            char c = peek();
            if (c == '+') { ++pos_; acc = polyAdd(acc, parseTerm()); }
            else if (c == '-') { ++pos_; acc = polySub(acc, parseTerm()); }
            else break;
        }
        return acc;
    }

    Poly parseTerm() {
        Poly acc = parseFactor();
        for (;;) {
            skipWs();
            char c = peek();
            if (c == '*') { ++pos_; acc = polyMul(acc, parseFactor()); }
            else if (startsFactor(c)) { acc = polyMul(acc, parseFactor()); }
            else break;
        }
        return acc;
    }

    Poly parseFactor() {
        skipWs();
        char c = peek();
        Poly base;
        if (c == '-') {
            ++pos_;
            return polyScale(parseFactor(), Rat(-1));
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            Int n = parseInt();
            Rat v(n);
            // INT '/' INT rational literal
            std::size_t save = pos_;
            skipWs();
            if (peek() == '/') {
                std::size_t slash = pos_;
                ++pos_;
                skipWs();
                if (std::isdigit(static_cast<unsigned char>(peek()))) {
                    Int d = parseInt();
                    if (d == 0) throw ParseError("parse error at position " +
                                                 std::to_string(slash) + ": zero denominator literal");
                    v = Rat(n) / Rat(d);
                } else {
                    pos_ = save; // top-level division, not a literal
                }
            } else {
                pos_ = save;
            }
            base = Poly{v};
        } else if (c == 'z') {
            ++pos_;
            base = Poly{Rat(0), Rat(1)};
        } else if (c == '(') {
            ++pos_;
            base = parseSum();
            skipWs();
            if (peek() != ')') fail("')'");
            ++pos_;
        } else {
            fail("integer, 'z', '(' or '-'");
        }
        skipWs();
        while (peek() == '^') {
            ++pos_;
            skipWs();
            if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("exponent");
            Int e = parseInt();
            Poly pow{Rat(1)};
            for (Int i = 0; i < e; ++i) pow = polyMul(pow, base);
            base = std::move(pow);
            skipWs();
        }
        return base;
    }

    Int parseInt() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (start == pos_) fail("integer");
        return Int(text_.substr(start, pos_ - start));
    }
};

inline RationalMap parseMap(const std::string& text, const PrimeContext& ctx) {
    auto [num, den] = MapParser(text).parse();
    if (polyDeg(den) < 0) throw ZeroDenominator("denominator polynomial is identically zero");
    return RationalMap(std::move(num), std::move(den), ctx);
}

inline Rat parseRat(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return Rat(Int(s));
    Int n(s.substr(0, slash)), d(s.substr(slash + 1));
    if (d == 0) throw ParseError("zero denominator in coefficient \"" + s + "\"");
    return Rat(n) / Rat(d);
}

// {"num": ["a0","a1",...], "den": ["b0","b1",...]} with decimal or "n/d" strings
inline RationalMap parseMapJson(const std::string& text, const PrimeContext& ctx) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("invalid JSON map: ") + e.what());
    }
    if (!j.is_object() || !j.contains("num") || !j.contains("den"))
        throw ParseError("JSON map must be an object with \"num\" and \"den\" arrays");
    auto coeffs = [](const nlohmann::json& arr) {
        Poly out;
        for (const auto& c : arr) {
            if (c.is_number_integer()) out.push_back(Rat(Int(c.get<long long>())));
            else if (c.is_string()) out.push_back(parseRat(c.get<std::string>()));
            else throw ParseError("coefficients must be integers or strings");
        }
        return out;
    };
    Poly num = coeffs(j["num"]), den = coeffs(j["den"]);
    if (polyDeg(den) < 0) throw ZeroDenominator("denominator polynomial is identically zero");
    return RationalMap(std::move(num), std::move(den), ctx);
}

} // namespace qpdyn
