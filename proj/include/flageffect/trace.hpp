#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ffx {

// Timestamped instantaneous power samples. Timestamps are strictly
// increasing seconds; powers are watts.
struct PowerTrace {
    std::vector<double> t;
    std::vector<double> p;

    std::size_t size() const { return t.size(); }
    void validate() const; // throws on malformed traces
};

enum class MeasureStatus { ok, unavailable };

struct Measurement {
    std::optional<double> energy_j;    // absent for time-only backends
    double time_s = 0.0;
    std::optional<double> avg_power_w; // energy / time when both defined
    MeasureStatus status = MeasureStatus::ok;
    std::string reason; // populated when unavailable

    static Measurement unavailable(std::string why) {
        Measurement m;
        m.status = MeasureStatus::unavailable;
        m.reason = std::move(why);
        return m;
    }
};

// Trapezoidal integration over the trace. time = last - first timestamp.
// Requires >= 2 samples and strictly increasing timestamps.
Measurement integrate_trace(const PowerTrace& trace);

// Samples inside [start, end] with the boundary values linearly
// interpolated, so integrating the window is exact for piecewise-linear
// power. The window must lie within the trace span.
PowerTrace window_trace(const PowerTrace& trace, double start, double end);

// Trace file format: one "<timestamp_s> <power_w>" pair per line, '.'
// decimal separator, '#' comment lines.
PowerTrace read_trace(std::istream& in);
void write_trace(std::ostream& out, const PowerTrace& trace);

} // namespace ffx
