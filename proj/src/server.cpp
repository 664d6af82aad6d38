#include "bikesim/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <functional>
#include <thread>
#include <vector>

#include "bikesim/errors.hpp"

namespace bikesim {

long serve_stream(std::istream& in, std::ostream& out, const SessionConfig& cfg)
{
    ProtocolSession session(cfg);
    std::string line;
    long n = 0;
    while (!session.closed() && std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        out << session.handle(line) << '\n';
        out.flush();
        ++n;
    }
    return n;
}

Endpoint parse_endpoint(const std::string& text)
{
    Endpoint ep;
    std::string port = text;
    if (const auto c = text.rfind(':'); c != std::string::npos) {
        if (c > 0) ep.host = text.substr(0, c);
        port = text.substr(c + 1);
    }
    try {
        std::size_t used = 0;
        ep.port = std::stoi(port, &used);
        if (used != port.size() || ep.port < 0 || ep.port > 65535) throw std::out_of_range("port");
    } catch (const std::exception&) {
        throw ConfigError("invalid endpoint '" + text + "'");
    }
    return ep;
}

namespace {

void serve_connection(int fd, SessionConfig cfg, const std::atomic<bool>& stop)
{
    ProtocolSession session(std::move(cfg));
    std::string buffer;
    char chunk[4096];
    while (!session.closed() && !stop.load()) {
        pollfd pfd{fd, POLLIN, 0};
        if (::poll(&pfd, 1, 100) <= 0) continue;
        const ssize_t got = ::recv(fd, chunk, sizeof chunk, 0);
        if (got <= 0) break;
        buffer.append(chunk, static_cast<std::size_t>(got));
        std::size_t nl;
        while (!session.closed() && (nl = buffer.find('\n')) != std::string::npos) {
            std::string line = buffer.substr(0, nl);
            buffer.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            std::string reply = session.handle(line) + '\n';
            const char* p = reply.data();
            std::size_t left = reply.size();
            while (left > 0) {
                const ssize_t sent = ::send(fd, p, left, MSG_NOSIGNAL);
                if (sent <= 0) {
                    ::close(fd);
                    return;
                }
                p += sent;
                left -= static_cast<std::size_t>(sent);
            }
        }
    }
    ::close(fd);
}

} // namespace

void serve_tcp(const Endpoint& ep, const SessionConfig& cfg, const std::atomic<bool>& stop,
               const std::function<void(int)>& on_ready)
{
    const int ls = ::socket(AF_INET, SOCK_STREAM, 0);
    if (ls < 0) throw Error(std::string("socket: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(ls, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<uint16_t>(ep.port));
    if (::inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) != 1) {
        ::close(ls);
        throw ConfigError("invalid IPv4 host '" + ep.host + "'");
    }
    if (::bind(ls, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(ls, 16) < 0) {
        const std::string msg = std::strerror(errno);
        ::close(ls);
        throw Error("bind/listen " + ep.host + ":" + std::to_string(ep.port) + ": " + msg);
    }
    socklen_t len = sizeof addr;
    ::getsockname(ls, reinterpret_cast<sockaddr*>(&addr), &len);
    if (on_ready) on_ready(ntohs(addr.sin_port));

    std::vector<std::thread> workers;
    while (!stop.load()) {
        pollfd pfd{ls, POLLIN, 0};
        const int r = ::poll(&pfd, 1, 100);
        if (r <= 0) continue;
        const int fd = ::accept(ls, nullptr, nullptr);
        if (fd < 0) continue;
        workers.emplace_back(serve_connection, fd, cfg, std::cref(stop));
    }
    ::close(ls);
    for (auto& w : workers) w.join();
}

} // namespace bikesim
