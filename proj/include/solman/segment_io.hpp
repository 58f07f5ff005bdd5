#pragma once

#include <charconv>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "segment.hpp"

namespace solman {

/// Shortest decimal that round-trips the double, '.' separator.
inline std::string format_double(double x) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, end);
}

inline double parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::invalid_argument("parse_double: bad number '" + std::string(s) + "'");
    return v;
}

/// Segment CSV: header `t,x,dx`, LF endings, t strictly increasing from -r to 0.
/// Tails cannot be serialized, so a segment with a tail is resampled onto
/// `nodes_if_tail` uniform nodes first.
inline void write_segment_csv(std::ostream& os, const Segment& phi,
                              std::size_t nodes_if_tail = kDefaultNodes) {
    const Segment out = phi.has_tail() ? resample(phi, nodes_if_tail) : phi;
    os << "t,x,dx\n";
    for (std::size_t i = 0; i < out.size(); ++i)
        os << format_double(out.nodes()[i]) << ',' << format_double(out.values()[i]) << ','
           << format_double(out.derivs()[i]) << '\n';
}

inline Segment read_segment_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("segment csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t,x,dx") throw std::invalid_argument("segment csv: header must be exactly 't,x,dx'");
    std::vector<double> t, x, dx;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::string_view sv(line);
        const auto c1 = sv.find(',');
        const auto c2 = c1 == std::string_view::npos ? c1 : sv.find(',', c1 + 1);
        if (c2 == std::string_view::npos || sv.find(',', c2 + 1) != std::string_view::npos)
            throw std::invalid_argument("segment csv: line " + std::to_string(lineno) +
                                        " must have three fields");
        t.push_back(parse_double(sv.substr(0, c1)));
        x.push_back(parse_double(sv.substr(c1 + 1, c2 - c1 - 1)));
        dx.push_back(parse_double(sv.substr(c2 + 1)));
    }
    if (t.size() < 2) throw std::invalid_argument("segment csv: need at least two rows");
    const double r = -t.front();
    return Segment(r, std::move(t), std::move(x), std::move(dx));
}

} // namespace solman
