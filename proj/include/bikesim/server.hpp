#pragma once

#include <atomic>
#include <functional>
#include <istream>
#include <ostream>
#include <string>

#include "bikesim/protocol.hpp"

namespace bikesim {

// Serves one session over a pair of streams until close or end of input.
// Returns the number of requests handled.
long serve_stream(std::istream& in, std::ostream& out, const SessionConfig& cfg);

struct Endpoint {
    std::string host = "127.0.0.1";
    int port = 5555;
};

// "host:port" or ":port" or "port".
Endpoint parse_endpoint(const std::string& text);

// Accepts TCP connections, one thread and one session per connection. Runs
// until stop becomes true. on_ready receives the bound port (useful with 0).
void serve_tcp(const Endpoint& ep, const SessionConfig& cfg, const std::atomic<bool>& stop,
               const std::function<void(int)>& on_ready = {});

} // namespace bikesim
