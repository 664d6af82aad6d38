#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bikesim {

struct TraceRow {
    double t = 0.0;
    double xP = 0.0;
    double yP = 0.0;
    double Psi = 0.0;
    double phi = 0.0;
    double delta = 0.0;
    double thetaB = 0.0;
    double phi_dot = 0.0;
    double delta_dot = 0.0;
    double v = 0.0;
    double tau = 0.0;
    double delta_set = 0.0;
    double t0 = 0.0;
    double reward = 0.0;
};

extern const char* const kTraceHeader;

// Comma-separated, header row, 9 significant digits.
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows);
std::string format_trace_row(const TraceRow& r);
std::vector<TraceRow> read_trace_csv(const std::string& text);

} // namespace bikesim
