#include "attndrift/csv.hpp"

#include <charconv>
#include <cmath>

namespace attndrift::csv {

bool split_record(std::string_view line, std::vector<std::string>& out) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::size_t n = 0;
    auto next = [&]() -> std::string& {
        if (n == out.size()) out.emplace_back();
        std::string& f = out[n++];
        f.clear();
        return f;
    };
    std::size_t i = 0;
    while (true) {
        std::string& field = next();
        if (i < line.size() && line[i] == '"') {
            ++i;
            bool closed = false;
            while (i < line.size()) {
                char c = line[i++];
                if (c == '"') {
                    if (i < line.size() && line[i] == '"') {
                        field.push_back('"');
                        ++i;
                    } else {
                        closed = true;
                        break;
                    }
                } else {
                    field.push_back(c);
                }
            }
            if (!closed) {
                out.resize(n);
                return false;
            }
            // Anything between the closing quote and the delimiter is kept verbatim.
            while (i < line.size() && line[i] != ',') field.push_back(line[i++]);
        } else {
            auto comma = line.find(',', i);
            auto end = comma == std::string_view::npos ? line.size() : comma;
            field.assign(line.substr(i, end - i));
            i = end;
        }
        if (i >= line.size()) break;
        ++i;  // skip ','
    }
    out.resize(n);
    return true;
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out;
    out.reserve(field.size() + 2);
    out.push_back('"');
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void append_field(std::string& line, std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        line.append(field);
    } else {
        line.append(escape(field));
    }
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string join(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line.push_back(',');
        line.append(cells[i]);
    }
    return line;
}

}  // namespace attndrift::csv
