#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>

namespace growfrag::csv {

// Shortest-safe round trip text: 17 significant digits.
std::string format_double(double v);

// RFC 4180 writer; fields containing separators, quotes or newlines are quoted.
class Writer {
public:
    explicit Writer(std::ostream& os) : os_(os) {}

    Writer& field(std::string_view s);
    Writer& field(const std::string& s) { return field(std::string_view(s)); }
    Writer& field(const char* s) { return field(std::string_view(s)); }
    Writer& field(double v) { return raw(format_double(v)); }
    Writer& field(int v) { return raw(std::to_string(v)); }
    Writer& field(long v) { return raw(std::to_string(v)); }
    Writer& field(std::size_t v) { return raw(std::to_string(v)); }
    void end_row();
    void row(std::initializer_list<std::string_view> fields);

private:
    Writer& raw(const std::string& s);
    std::ostream& os_;
    bool first_ = true;
};

}  // namespace growfrag::csv
