#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "savint/errors.hpp"

namespace savint {

/// One benchmark outcome; serializes losslessly to the CSV schema below.
struct ResultRow {
    std::string problem;
    std::string method;
    std::string param_name;
    double param_value = 0.0;
    double h = 0.0;
    double T = 0.0;
    double global_error = 0.0;
    double max_energy_error = 0.0;
    double cpu_seconds = 0.0;
    bool converged = true;

    friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

inline const char* kResultHeader =
    "problem,method,param_name,param_value,h,T,global_error,max_energy_error,"
    "cpu_seconds,converged";

/// Shortest round-trip decimal representation.
inline std::string format_double(double x) {
    char buf[32];
    const std::to_chars_result r = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, r.ptr);
}

inline double parse_double(const std::string& s) {
    double x = 0.0;
    const std::from_chars_result r = std::from_chars(s.data(), s.data() + s.size(), x);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw DomainError("csv: cannot parse '" + s + "' as a number");
    return x;
}

inline std::string serialize_row(const ResultRow& r) {
    std::string out;
    out += r.problem;
    out += ',';
    out += r.method;
    out += ',';
    out += r.param_name;
    out += ',';
    out += format_double(r.param_value);
    out += ',';
    out += format_double(r.h);
    out += ',';
    out += format_double(r.T);
    out += ',';
    out += format_double(r.global_error);
    out += ',';
    out += format_double(r.max_energy_error);
    out += ',';
    out += format_double(r.cpu_seconds);
    out += ',';
    out += r.converged ? "true" : "false";
    return out;
}

inline std::string serialize_rows(const std::vector<ResultRow>& rows) {
    std::string out = kResultHeader;
    out += '\n';
    for (const ResultRow& r : rows) {
        out += serialize_row(r);
        out += '\n';
    }
    return out;
}

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

inline std::vector<ResultRow> parse_rows(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kResultHeader)
        throw DomainError("csv: missing or wrong header line");
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> f = split_line(line);
        if (f.size() != 10)
            throw DomainError("csv: expected 10 fields, got " +
                              std::to_string(f.size()));
        ResultRow r;
        r.problem = f[0];
        r.method = f[1];
        r.param_name = f[2];
        r.param_value = parse_double(f[3]);
        r.h = parse_double(f[4]);
        r.T = parse_double(f[5]);
        r.global_error = parse_double(f[6]);
        r.max_energy_error = parse_double(f[7]);
        r.cpu_seconds = parse_double(f[8]);
        if (f[9] == "true")
            r.converged = true;
        else if (f[9] == "false")
            r.converged = false;
        else
            throw DomainError("csv: bad converged flag '" + f[9] + "'");
        rows.push_back(std::move(r));
    }
    return rows;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace savint
