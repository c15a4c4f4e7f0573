#include "chemo/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace chemo {

std::string format_double(double x) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    if (ec != std::errc()) throw IoError("cannot format number");
    return std::string(buf.data(), ptr);
}

std::string format_optional(const std::optional<double>& x) { return x ? format_double(*x) : std::string(); }

double parse_double(const std::string& text) {
    std::size_t b = text.find_first_not_of(" \t\r");
    std::size_t e = text.find_last_not_of(" \t\r");
    if (b == std::string::npos) throw IoError("empty number");
    const char* first = text.data() + b;
    const char* last = text.data() + e + 1;
    if (*first == '+') ++first;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) throw IoError("malformed number '" + text + "'");
    return v;
}

std::string diagnostics_row(const DiagnosticsRecord& r) {
    std::string s;
    s += format_double(r.t) + ',';
    s += format_double(r.mass) + ',';
    s += format_double(r.u_sup) + ',';
    s += format_double(r.v_sup) + ',';
    s += format_double(r.grad_v_l2sq) + ',';
    s += format_double(r.y_p) + ',';
    s += format_optional(r.lyapunov_F) + ',';
    s += format_double(r.entropy_E) + ',';
    s += format_optional(r.u_dist_l2) + ',';
    s += format_double(r.v_lp) + ',';
    s += format_double(r.cum_dissipation);
    return s;
}

void write_diagnostics_csv(std::ostream& os, const std::vector<DiagnosticsRecord>& records) {
    os << kDiagnosticsHeader << '\n';
    for (const auto& r : records) os << diagnostics_row(r) << '\n';
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    return os;
}

} // namespace

void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& records) {
    auto os = open_out(path);
    write_diagnostics_csv(os, records);
    if (!os) throw IoError("write failed: " + path.string());
}

void write_snapshot(std::ostream& os, const Field& f) {
    const GridSpec& g = f.grid();
    os << g.dim() << ' ' << g.cells(0);
    if (g.dim() == 2) os << ' ' << g.cells(1);
    os << ' ' << format_double(g.length(0));
    if (g.dim() == 2) os << ' ' << format_double(g.length(1));
    os << '\n';
    for (double x : f.values()) os << format_double(x) << '\n';
}

void write_snapshot(const std::filesystem::path& path, const Field& f) {
    auto os = open_out(path);
    write_snapshot(os, f);
    if (!os) throw IoError("write failed: " + path.string());
}

Field read_snapshot(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw IoError("snapshot: missing header");
    std::istringstream hs(header);
    std::vector<std::string> tok;
    for (std::string t; hs >> t;) tok.push_back(t);
    if (tok.empty()) throw IoError("snapshot: empty header");
    GridSpec g;
    try {
        if (tok[0] == "1" && tok.size() == 3)
            g = GridSpec::interval(std::stoi(tok[1]), parse_double(tok[2]));
        else if (tok[0] == "2" && tok.size() == 5)
            g = GridSpec::rectangle(std::stoi(tok[1]), std::stoi(tok[2]), parse_double(tok[3]),
                                    parse_double(tok[4]));
        else
            throw IoError("snapshot: header must be 'dim nx [ny] lx [ly]'");
    } catch (const std::invalid_argument& e) {
        throw IoError(std::string("snapshot: ") + e.what());
    }
    std::vector<double> values;
    values.reserve(g.size());
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            values.push_back(parse_double(line));
        } catch (const IoError&) {
            throw IoError("snapshot line " + std::to_string(lineno) + ": malformed value");
        }
    }
    if (values.size() != g.size())
        throw IoError("snapshot: expected " + std::to_string(g.size()) + " values, found " +
                      std::to_string(values.size()));
    return Field(g, std::move(values));
}

Field read_snapshot(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    return read_snapshot(is);
}

} // namespace chemo
