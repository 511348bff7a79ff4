#pragma once

// Trigonometric initial data such as "1.5*sin(x) + sin(2x) - 0.25 cos(3x)".
//
//   expr  := term { ('+' | '-') term }
//   term  := [sign] [number ['*']] ('sin' | 'cos') '(' [integer ['*']] 'x' ')'

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "surfgrow/errors.hpp"
#include "surfgrow/spectral.hpp"

namespace surfgrow {

/// Wavenumber 0 in an initial condition (the constant mode is excluded).
class ConstantTermError : public ParseError {
public:
    using ParseError::ParseError;
};

enum class TrigKind { Sin, Cos };

struct TrigTerm {
    double amplitude = 1.0;
    TrigKind kind = TrigKind::Sin;
    std::size_t wavenumber = 1;

    friend bool operator==(const TrigTerm&, const TrigTerm&) = default;
};

struct InitialConditionExpr {
    std::vector<TrigTerm> terms;

    [[nodiscard]] std::size_t max_wavenumber() const {
        std::size_t k = 0;
        for (const auto& t : terms) k = std::max(k, t.wavenumber);
        return k;
    }

    friend bool operator==(const InitialConditionExpr&, const InitialConditionExpr&) = default;
};

namespace detail {

class IcParser {
public:
    explicit IcParser(std::string_view text) : s_(text) {}

    InitialConditionExpr parse() {
        InitialConditionExpr expr;
        skip_ws();
        if (pos_ >= s_.size()) fail("expected a term");
        expr.terms.push_back(term(true));
        for (;;) {
            skip_ws();
            if (pos_ >= s_.size()) break;
            const char c = s_[pos_];
            if (c != '+' && c != '-') fail("expected '+', '-' or end of input");
            ++pos_;
            TrigTerm t = term(false);
            if (c == '-') t.amplitude = -t.amplitude;
            expr.terms.push_back(t);
        }
        return expr;
    }

private:
    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    bool starts_number() const {
        if (pos_ >= s_.size()) return false;
        const char c = s_[pos_];
        return std::isdigit(static_cast<unsigned char>(c)) || c == '.';
    }

    double number() {
        double v = 0.0;
        const char* first = s_.data() + pos_;
        const auto [ptr, ec] = std::from_chars(first, s_.data() + s_.size(), v);
        if (ec != std::errc{} || !std::isfinite(v)) fail("expected a finite number");
        pos_ += static_cast<std::size_t>(ptr - first);
        return v;
    }

    TrigTerm term(bool leading) {
        TrigTerm t;
        skip_ws();
        if (leading && pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) {
            if (s_[pos_] == '-') t.amplitude = -1.0;
            ++pos_;
            skip_ws();
        }
        if (starts_number()) {
            t.amplitude *= number();
            accept('*');
            skip_ws();
        }
        const std::string_view rest = s_.substr(pos_);
        if (rest.starts_with("sin")) {
            t.kind = TrigKind::Sin;
        } else if (rest.starts_with("cos")) {
            t.kind = TrigKind::Cos;
        } else {
            fail("expected 'sin' or 'cos'");
        }
        pos_ += 3;
        expect('(');
        skip_ws();
        const std::size_t k_pos = pos_;
        std::size_t k = 1;
        if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
            const char* first = s_.data() + pos_;
            const auto [ptr, ec] = std::from_chars(first, s_.data() + s_.size(), k);
            if (ec != std::errc{}) fail("wavenumber out of range");
            pos_ += static_cast<std::size_t>(ptr - first);
            accept('*');
        }
        expect('x');
        expect(')');
        if (k == 0) throw ConstantTermError("wavenumber must be >= 1 (mean-zero data)", k_pos);
        t.wavenumber = k;
        return t;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline InitialConditionExpr parse_ic(std::string_view text) { return detail::IcParser(text).parse(); }

/// Exact coefficients; repeated terms add up.
inline FourierField to_field(const InitialConditionExpr& expr, std::size_t n_modes = 0) {
    const std::size_t n = std::max(n_modes, expr.max_wavenumber());
    std::vector<double> cos_c(n, 0.0);
    std::vector<double> sin_c(n, 0.0);
    for (const auto& t : expr.terms) {
        (t.kind == TrigKind::Sin ? sin_c : cos_c)[t.wavenumber - 1] += t.amplitude;
    }
    return FourierField::from_real(cos_c, sin_c);
}

/// Text that parses back to the same terms.
inline std::string render(const InitialConditionExpr& expr) {
    std::string out;
    char buf[64];
    for (std::size_t i = 0; i < expr.terms.size(); ++i) {
        const TrigTerm& t = expr.terms[i];
        double a = t.amplitude;
        if (i > 0) {
            out += a < 0.0 || std::signbit(a) ? " - " : " + ";
            a = std::abs(a);
        }
        std::snprintf(buf, sizeof buf, "%.17g*%s(%zux)", a, t.kind == TrigKind::Sin ? "sin" : "cos", t.wavenumber);
        out += buf;
    }
    return out;
}

}  // namespace surfgrow
