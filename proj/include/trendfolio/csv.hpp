#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "trendfolio/error.hpp"

namespace trendfolio::csv {

struct Row {
    std::size_t line = 0;  // 1-based line number in the source
    std::vector<std::string> fields;
};

/// Split one CSV line. Supports RFC-4180 style quoting with "" escapes;
/// quoted fields may not span lines.
inline std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(std::move(cur));
    return out;
}

inline std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

/// Read a headed CSV. Blank lines are skipped. The header is returned
/// through `header`; data rows keep their source line numbers.
inline std::vector<Row> read(std::istream& in, std::vector<std::string>& header) {
    std::vector<Row> rows;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (trim(line).empty())
            continue;
        auto fields = split_line(line);
        for (auto& f : fields)
            f = trim(f);
        if (!have_header) {
            header = std::move(fields);
            have_header = true;
            continue;
        }
        rows.push_back(Row{lineno, std::move(fields)});
    }
    return rows;
}

inline std::string quote(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos)
        return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += "\"\"";
        else
            out.push_back(c);
    }
    out += '"';
    return out;
}

/// Shortest text that parses back to the same double.
inline std::string exact(double v) {
    if (std::isnan(v))
        return "NA";
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v)
            break;
    }
    return buf;
}

inline std::string fixed(double v, int decimals) {
    if (std::isnan(v))
        return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    std::string s = buf;
    // avoid "-0.00"
    if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-')
        s.erase(0, 1);
    return s;
}

/// Parse a full field as double; "NA" yields NaN.
inline bool parse_double(std::string_view s, double& out) {
    if (s == "NA") {
        out = std::nan("");
        return true;
    }
    if (s.empty())
        return false;
    std::string tmp(s);
    char* end = nullptr;
    out = std::strtod(tmp.c_str(), &end);
    return end == tmp.c_str() + tmp.size();
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open " + path);
    return in;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::Io, "cannot write " + path);
    return out;
}

} // namespace trendfolio::csv
