#include "flageffect/trace.hpp"
#include "flageffect/kernels.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace ffx {

void PowerTrace::validate() const {
    if (t.size() != p.size())
        throw std::invalid_argument("PowerTrace: timestamp/power length mismatch");
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!std::isfinite(t[i]) || !std::isfinite(p[i]))
            throw std::invalid_argument("PowerTrace: non-finite sample at index " +
                                        std::to_string(i));
        if (i > 0 && t[i] <= t[i - 1])
            throw std::invalid_argument("PowerTrace: timestamps not strictly increasing at index " +
                                        std::to_string(i));
    }
}

Measurement integrate_trace(const PowerTrace& trace) {
    if (trace.size() < 2)
        throw std::invalid_argument("integrate_trace: need at least 2 samples, got " +
                                    std::to_string(trace.size()));
    trace.validate();

    Measurement m;
    const auto& ops = kernels::active_ops();
    m.energy_j = ops.trapezoid(trace.t.data(), trace.p.data(), trace.size());
    m.time_s = trace.t.back() - trace.t.front();
    if (m.time_s > 0.0) m.avg_power_w = *m.energy_j / m.time_s;
    return m;
}

PowerTrace window_trace(const PowerTrace& trace, double start, double end) {
    if (trace.size() < 2)
        throw std::invalid_argument("window_trace: need at least 2 samples");
    trace.validate();
    if (!(start < end))
        throw std::invalid_argument("window_trace: start must precede end");
    if (start < trace.t.front() || end > trace.t.back())
        throw std::invalid_argument("window_trace: window outside trace span");

    auto interpolate = [&](double at) {
        // Find the segment containing `at` and interpolate linearly.
        std::size_t hi = 1;
        while (hi + 1 < trace.size() && trace.t[hi] < at) ++hi;
        const double t0 = trace.t[hi - 1], t1 = trace.t[hi];
        const double p0 = trace.p[hi - 1], p1 = trace.p[hi];
        const double w = (at - t0) / (t1 - t0);
        return p0 + w * (p1 - p0);
    };

    PowerTrace out;
    out.t.push_back(start);
    out.p.push_back(interpolate(start));
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (trace.t[i] > start && trace.t[i] < end) {
            out.t.push_back(trace.t[i]);
            out.p.push_back(trace.p[i]);
        }
    }
    out.t.push_back(end);
    out.p.push_back(interpolate(end));
    return out;
}

PowerTrace read_trace(std::istream& in) {
    PowerTrace trace;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t begin = line.find_first_not_of(" \t");
        if (begin == std::string::npos || line[begin] == '#') continue;

        const char* first = line.data() + begin;
        const char* last = line.data() + line.size();
        double ts = 0.0, pw = 0.0;
        auto r1 = std::from_chars(first, last, ts);
        if (r1.ec != std::errc{})
            throw std::runtime_error("trace line " + std::to_string(line_no) +
                                     ": bad timestamp");
        const char* second = r1.ptr;
        while (second < last && (*second == ' ' || *second == '\t')) ++second;
        auto r2 = std::from_chars(second, last, pw);
        if (r2.ec != std::errc{})
            throw std::runtime_error("trace line " + std::to_string(line_no) +
                                     ": bad power value");
        trace.t.push_back(ts);
        trace.p.push_back(pw);
    }
    trace.validate();
    return trace;
}

void write_trace(std::ostream& out, const PowerTrace& trace) {
    out.precision(17);
    out << "# flageffect power trace: <timestamp_s> <power_w>\n";
    for (std::size_t i = 0; i < trace.size(); ++i)
        out << trace.t[i] << ' ' << trace.p[i] << '\n';
}

} // namespace ffx
