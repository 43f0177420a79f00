#include "oscdiff/csv.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "oscdiff/errors.hpp"

namespace oscdiff {

namespace {

constexpr const char* kErrorHeader = "eps,dt,N,error";
constexpr const char* kTraceHeader = "t,value";
constexpr const char* kAsymptoticHeader = "eps,order,error";

// Shortest text that reads back to the same double.
struct Num {
    double v;
};

std::ostream& operator<<(std::ostream& os, Num n) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, n.v);
    return os.write(buf, res.ptr - buf);
}

std::vector<std::string> fields(const std::string& line, std::size_t expected, int lineno) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) out.push_back(f);
    if (out.size() != expected) {
        throw ConfigurationError("csv line " + std::to_string(lineno) + ": expected " +
                                 std::to_string(expected) + " fields");
    }
    return out;
}

template <class T>
T parse(const std::string& s, int lineno) {
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ConfigurationError("csv line " + std::to_string(lineno) + ": bad value '" + s + "'");
    }
    return v;
}

template <class Row, class Fn>
std::vector<Row> read_rows(std::istream& is, const char* header, std::size_t width, Fn make) {
    std::string line;
    if (!std::getline(is, line) || line != header) {
        throw ConfigurationError(std::string("csv header must be '") + header + "'");
    }
    std::vector<Row> rows;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        rows.push_back(make(fields(line, width, lineno), lineno));
    }
    return rows;
}

}  // namespace

void write_csv(std::ostream& os, const std::vector<ErrorRow>& rows) {
    os << kErrorHeader << '\n';
    for (const auto& r : rows) os << Num{r.eps} << ',' << Num{r.dt} << ',' << r.n << ',' << Num{r.error} << '\n';
}

void write_csv(std::ostream& os, const std::vector<TraceRow>& rows) {
    os << kTraceHeader << '\n';
    for (const auto& r : rows) os << Num{r.t} << ',' << Num{r.value} << '\n';
}

void write_csv(std::ostream& os, const std::vector<AsymptoticRow>& rows) {
    os << kAsymptoticHeader << '\n';
    for (const auto& r : rows) os << Num{r.eps} << ',' << r.order << ',' << Num{r.error} << '\n';
}

std::vector<ErrorRow> read_error_csv(std::istream& is) {
    return read_rows<ErrorRow>(is, kErrorHeader, 4, [](const auto& f, int l) {
        return ErrorRow{parse<double>(f[0], l), parse<double>(f[1], l), parse<int>(f[2], l),
                        parse<double>(f[3], l)};
    });
}

std::vector<TraceRow> read_trace_csv(std::istream& is) {
    return read_rows<TraceRow>(is, kTraceHeader, 2, [](const auto& f, int l) {
        return TraceRow{parse<double>(f[0], l), parse<double>(f[1], l)};
    });
}

std::vector<AsymptoticRow> read_asymptotic_csv(std::istream& is) {
    return read_rows<AsymptoticRow>(is, kAsymptoticHeader, 3, [](const auto& f, int l) {
        return AsymptoticRow{parse<double>(f[0], l), parse<int>(f[1], l), parse<double>(f[2], l)};
    });
}

template <class Row>
void save_csv(const std::string& path, const std::vector<Row>& rows) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw ConfigurationError("cannot write " + path);
    write_csv(out, rows);
}

template void save_csv(const std::string&, const std::vector<ErrorRow>&);
template void save_csv(const std::string&, const std::vector<TraceRow>&);
template void save_csv(const std::string&, const std::vector<AsymptoticRow>&);

}  // namespace oscdiff
