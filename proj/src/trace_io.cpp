#include "mcloop/trace_io.hpp"

#include "mcloop/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace mcloop {

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(std::string_view s, std::size_t line) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw IoError("trace line " + std::to_string(line) + ": invalid number '" + std::string(s) + "'");
    return v;
}

}  // namespace

void write_trace(std::ostream& out, const ReceivedTrace& trace) {
    out << "time_s,intensity\n";
    for (std::size_t k = 0; k < trace.samples.size(); ++k)
        out << format_double(trace.time(k)) << ',' << format_double(trace.samples[k]) << '\n';
}

ReceivedTrace read_trace(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("trace: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "time_s,intensity") throw IoError("trace: expected header 'time_s,intensity'");

    std::vector<double> times;
    ReceivedTrace trace;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
            throw IoError("trace line " + std::to_string(lineno) + ": expected two columns");
        const std::string_view view(line);
        times.push_back(parse_double(view.substr(0, comma), lineno));
        const double value = parse_double(view.substr(comma + 1), lineno);
        if (!std::isfinite(value) || value < 0.0)
            throw IoError("trace line " + std::to_string(lineno) + ": intensity must be finite and >= 0");
        trace.samples.push_back(value);
    }
    if (times.size() < 2) throw IoError("trace: need at least two samples to infer the time step");

    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1]))
            throw IoError("trace: time column not strictly increasing at row " + std::to_string(k + 1));

    const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double step = times[k] - times[k - 1];
        if (std::abs(step - dt) > kMaxSamplingJitter * dt)
            throw IoError("trace: irregular sampling at row " + std::to_string(k + 1) + " (step " +
                          format_double(step) + " s vs mean " + format_double(dt) + " s)");
    }
    trace.dt_sample = dt;
    trace.t_record = times.back() - times.front();
    return trace;
}

ReceivedTrace import_trace(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open trace file " + path.string());
    return read_trace(in);
}

void export_trace(const ReceivedTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write trace file " + path.string());
    write_trace(out, trace);
    if (!out) throw IoError("write failed for " + path.string());
}

Bits read_bits(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open bits file " + path.string());
    Bits bits;
    char ch = 0;
    while (in.get(ch)) {
        if (ch == '0' || ch == '1') bits.push_back(static_cast<std::uint8_t>(ch - '0'));
        else if (ch != ',' && ch != ' ' && ch != '\n' && ch != '\r' && ch != '\t')
            throw IoError("bits file " + path.string() + ": unexpected character '" + ch + "'");
    }
    if (bits.empty()) throw IoError("bits file " + path.string() + " holds no bits");
    return bits;
}

void write_bits(const Bits& bits, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write bits file " + path.string());
    for (auto b : bits) out << static_cast<char>('0' + b);
    out << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace mcloop
