#include "growfrag/csv.hpp"

#include <cmath>
#include <cstdio>

namespace growfrag::csv {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Writer& Writer::raw(const std::string& s) {
    if (!first_) os_ << ',';
    os_ << s;
    first_ = false;
    return *this;
}

Writer& Writer::field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return raw(std::string(s));
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    q += '"';
    return raw(q);
}

void Writer::end_row() {
    os_ << "\r\n";
    first_ = true;
}

void Writer::row(std::initializer_list<std::string_view> fields) {
    for (auto f : fields) field(f);
    end_row();
}

}  // namespace growfrag::csv
