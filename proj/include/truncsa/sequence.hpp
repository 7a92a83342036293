#pragma once

#include <charconv>
#include <cmath>
#include <functional>
#include <string>
#include <string_view>

#include "core.hpp"

namespace truncsa {

/// Deterministic scalar sequence t -> value used for a_t and for
/// truncation radii. Textual grammar (whitespace ignored):
///
///     c          constant
///     c*t, ct    linear
///     c*t^p      power (c defaults to 1 when omitted: "t^0.5")
///     log(c*t)   logarithm
class ScalarSequence {
public:
    enum class Kind { constant, power, log };

    ScalarSequence() = default;

    static ScalarSequence constant(double c) { return {Kind::constant, c, 0.0}; }
    static ScalarSequence power(double c, double p = 1.0) { return {Kind::power, c, p}; }
    static ScalarSequence log(double c) { return {Kind::log, c, 0.0}; }

    static ScalarSequence parse(std::string_view text);

    Kind kind() const noexcept { return kind_; }
    double coefficient() const noexcept { return c_; }
    double exponent() const noexcept { return p_; }

    double operator()(Index t) const {
        const double x = static_cast<double>(t);
        switch (kind_) {
        case Kind::constant: return c_;
        case Kind::power: return p_ == 1.0 ? c_ * x : c_ * std::pow(x, p_);
        case Kind::log: return std::log(c_ * x);
        }
        return 0.0;
    }

    /// Canonical spelling; parse(to_string()) reproduces *this.
    std::string to_string() const {
        switch (kind_) {
        case Kind::constant: return number(c_);
        case Kind::power:
            return p_ == 1.0 ? number(c_) + "*t" : number(c_) + "*t^" + number(p_);
        case Kind::log: return "log(" + number(c_) + "*t)";
        }
        return {};
    }

    std::function<double(Index)> function() const {
        return [s = *this](Index t) { return s(t); };
    }

    bool operator==(const ScalarSequence&) const = default;

private:
    ScalarSequence(Kind k, double c, double p) : kind_(k), c_(c), p_(p) {}

    static std::string number(double v) {
        char buf[32];
        auto res = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, res.ptr);
    }

    Kind kind_ = Kind::constant;
    double c_ = 1.0;
    double p_ = 0.0;
};

namespace detail {

class SequenceParser {
public:
    explicit SequenceParser(std::string_view text) {
        for (char ch : text)
            if (ch != ' ' && ch != '\t') src_ += ch;
    }

    ScalarSequence run() {
        if (src_.empty()) fail("empty expression");
        ScalarSequence out;
        if (src_.rfind("log(", 0) == 0) {
            pos_ = 4;
            if (src_.back() != ')') fail("missing ')'");
            const double c = linear_coefficient(src_.size() - 1);
            out = ScalarSequence::log(c);
        } else {
            double c = 1.0;
            bool have_c = false;
            if (pos_ < src_.size() && src_[pos_] != 't') {
                c = read_number();
                have_c = true;
            }
            if (pos_ == src_.size()) {
                if (!have_c) fail("expected number or 't'");
                return ScalarSequence::constant(c);
            }
            if (src_[pos_] == '*') ++pos_;
            expect('t');
            double p = 1.0;
            if (pos_ < src_.size()) {
                expect('^');
                p = read_number();
            }
            if (pos_ != src_.size()) fail("trailing characters");
            out = ScalarSequence::power(c, p);
        }
        return out;
    }

private:
    // Parses "c*t", "ct" or "t" up to position `end`.
    double linear_coefficient(std::size_t end) {
        double c = 1.0;
        if (src_[pos_] != 't') {
            c = read_number();
            if (src_[pos_] == '*') ++pos_;
        }
        expect('t');
        if (pos_ != end) fail("expected ')' after 't'");
        return c;
    }

    double read_number() {
        double v = 0.0;
        const char* first = src_.data() + pos_;
        const char* last = src_.data() + src_.size();
        if (first != last && *first == '+') ++first;
        auto res = std::from_chars(first, last, v);
        if (res.ec != std::errc{}) fail("expected a number");
        pos_ = static_cast<std::size_t>(res.ptr - src_.data());
        return v;
    }

    void expect(char ch) {
        if (pos_ >= src_.size() || src_[pos_] != ch) fail(std::string("expected '") + ch + "'");
        ++pos_;
    }

    [[noreturn]] void fail(const std::string& why) const {
        throw ConfigError("bad sequence expression \"" + src_ + "\": " + why);
    }

    std::string src_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline ScalarSequence ScalarSequence::parse(std::string_view text) {
    return detail::SequenceParser(text).run();
}

} // namespace truncsa
