#pragma once

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace shsr::csv {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Reads one CSV record (handles quoted fields and embedded newlines).
// Returns false on end of stream.
inline bool read_row(std::istream& in, std::vector<std::string>& out) {
    out.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    int c;
    while ((c = in.get()) != EOF) {
        any = true;
        char ch = static_cast<char>(c);
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(ch);
            }
        } else if (ch == '"') {
            in_quotes = true;
        } else if (ch == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else if (ch == '\n') {
            if (!field.empty() && field.back() == '\r') field.pop_back();
            out.push_back(std::move(field));
            return true;
        } else {
            field.push_back(ch);
        }
    }
    if (in_quotes) throw ParseError("unterminated quoted field");
    if (!any) return false;
    if (!field.empty() && field.back() == '\r') field.pop_back();
    out.push_back(std::move(field));
    return true;
}

inline std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += "\"\"";
        else q.push_back(ch);
    }
    q += "\"";
    return q;
}

inline void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << quote(fields[i]);
    }
    out << '\n';
}

}  // namespace shsr::csv
