#include "bikesim/trajectory_log.hpp"

#include <cstdio>
#include <sstream>

#include "bikesim/errors.hpp"

namespace bikesim {

const char* const kTraceHeader =
    "t,xP,yP,Psi,phi,delta,thetaB,phi_dot,delta_dot,v,tau,delta_set,t0,reward";

std::string format_trace_row(const TraceRow& r)
{
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g", r.t,
                  r.xP, r.yP, r.Psi, r.phi, r.delta, r.thetaB, r.phi_dot, r.delta_dot, r.v, r.tau,
                  r.delta_set, r.t0, r.reward);
    return buf;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows)
{
    out << kTraceHeader << '\n';
    for (const auto& r : rows) out << format_trace_row(r) << '\n';
}

std::vector<TraceRow> read_trace_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader) {
        throw ConfigError("trace: missing or unexpected header");
    }
    std::vector<TraceRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        TraceRow r;
        double* f[] = {&r.t,   &r.xP,        &r.yP,      &r.Psi,     &r.phi,
                       &r.delta, &r.thetaB,  &r.phi_dot, &r.delta_dot, &r.v,
                       &r.tau, &r.delta_set, &r.t0,      &r.reward};
        std::istringstream ls(line);
        std::string cell;
        std::size_t i = 0;
        while (std::getline(ls, cell, ',')) {
            if (i >= 14) throw ConfigError("trace: too many columns");
            try {
                *f[i++] = std::stod(cell);
            } catch (const std::exception&) {
                throw ConfigError("trace: bad number '" + cell + "'");
            }
        }
        if (i != 14) throw ConfigError("trace: expected 14 columns");
        rows.push_back(r);
    }
    return rows;
}

} // namespace bikesim
