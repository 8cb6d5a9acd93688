#pragma once

// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF, UTF-8 BOM.

#include <string>
#include <string_view>
#include <vector>

#include "signsynth/error.hpp"

namespace signsynth {

struct CsvRow {
    std::size_t line = 0;  // 1-based line where the row starts
    std::vector<std::string> fields;
};

inline std::vector<CsvRow> parse_csv(std::string_view text) {
    if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
    std::vector<CsvRow> rows;
    CsvRow row;
    std::string field;
    std::size_t line = 1;
    row.line = 1;
    bool quoted = false, field_started = false;
    auto end_field = [&] {
        row.fields.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        const bool blank = row.fields.size() == 1 && row.fields[0].empty();
        if (!blank) rows.push_back(std::move(row));
        row = CsvRow{};
        row.line = line;
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                if (field_started) throw ParseError("stray quote on line " + std::to_string(line), i);
                quoted = true;
                field_started = true;
                break;
            case ',': end_field(); break;
            case '\r': break;
            case '\n':
                ++line;
                end_row();
                break;
            default:
                field += c;
                field_started = true;
        }
    }
    if (quoted) throw ParseError("unterminated quoted field", text.size());
    if (field_started || !row.fields.empty()) end_row();
    return rows;
}

/// Parse and check that the first row equals `header` (case-insensitive,
/// surrounding blanks ignored). Returns the data rows.
inline std::vector<CsvRow> parse_csv_with_header(std::string_view text, const std::vector<std::string>& header,
                                                 const std::string& source) {
    auto rows = parse_csv(text);
    auto norm = [](std::string s) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        return s;
    };
    std::string expected;
    for (std::size_t i = 0; i < header.size(); ++i) expected += (i ? "," : "") + header[i];
    if (rows.empty()) throw ParseError(source + ": empty file, expected header '" + expected + "'");
    bool ok = rows[0].fields.size() == header.size();
    for (std::size_t i = 0; ok && i < header.size(); ++i) ok = norm(rows[0].fields[i]) == header[i];
    if (!ok) throw ParseError(source + ": expected header '" + expected + "'");
    rows.erase(rows.begin());
    for (auto& r : rows) {
        if (r.fields.size() != header.size())
            throw ParseError(source + ":" + std::to_string(r.line) + ": expected " +
                             std::to_string(header.size()) + " fields, got " + std::to_string(r.fields.size()));
        for (auto& f : r.fields) {
            const auto b = f.find_first_not_of(" \t");
            const auto e = f.find_last_not_of(" \t");
            f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
        }
    }
    return rows;
}

}  // namespace signsynth
