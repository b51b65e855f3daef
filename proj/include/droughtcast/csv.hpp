#pragma once

#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "droughtcast/core.hpp"

namespace droughtcast::csv {

/// Streaming RFC-4180 reader: quoted fields may contain commas, doubled
/// quotes and embedded newlines; accepts both LF and CRLF row endings.
/// Input is consumed through an internal buffer, so multi-gigabyte files
/// parse at I/O speed.
class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    /// Reads the next record into `fields`. Returns false at end of input.
    /// line() reports the physical line on which the record started.
    bool next(std::vector<std::string>& fields) {
        fields.clear();
        int c = get();
        if (c == kEof) return false;
        record_line_ = line_;
        std::string field;
        bool quoted = false;
        for (;;) {
            if (c == kEof) {
                if (quoted) throw RowError("line " + std::to_string(record_line_) +
                                           ": unterminated quoted field");
                fields.push_back(std::move(field));
                return true;
            }
            char ch = static_cast<char>(c);
            if (quoted) {
                if (ch == '"') {
                    int peek = get();
                    if (peek == '"') {
                        field.push_back('"');
                    } else {
                        quoted = false;
                        c = peek;
                        continue;
                    }
                } else {
                    if (ch == '\n') ++line_;
                    field.push_back(ch);
                }
            } else if (ch == '"') {
                if (!field.empty())
                    throw RowError("line " + std::to_string(line_) +
                                   ": quote inside unquoted field");
                quoted = true;
            } else if (ch == ',') {
                fields.push_back(std::move(field));
                field.clear();
            } else if (ch == '\n') {
                ++line_;
                if (!field.empty() && field.back() == '\r') field.pop_back();
                fields.push_back(std::move(field));
                return true;
            } else {
                field.push_back(ch);
            }
            c = get();
        }
    }

    std::size_t line() const { return record_line_; }

private:
    static constexpr int kEof = -1;

    int get() {
        if (position_ == filled_) {
            in_.read(buffer_, sizeof buffer_);
            filled_ = static_cast<std::size_t>(in_.gcount());
            position_ = 0;
            if (filled_ == 0) return kEof;
        }
        return static_cast<unsigned char>(buffer_[position_++]);
    }

    std::istream& in_;
    char buffer_[1 << 16];
    std::size_t position_ = 0;
    std::size_t filled_ = 0;
    std::size_t line_ = 1;
    std::size_t record_line_ = 1;
};

inline bool needs_quoting(std::string_view field) {
    return field.find_first_of(",\"\r\n") != std::string_view::npos;
}

inline void write_field(std::ostream& out, std::string_view field) {
    if (!needs_quoting(field)) {
        out << field;
        return;
    }
    out << '"';
    for (char c : field) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

inline void write_row(std::ostream& out, std::span<const std::string> fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i != 0) out << ',';
        write_field(out, fields[i]);
    }
    out << '\n';
}

}  // namespace droughtcast::csv
