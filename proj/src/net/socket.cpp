#include "roadrunner/net/socket.hpp"

#include <arpa/inet.h>
#include <cerrno>
#include <cstring>
#include <dirent.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

namespace rr::net {

namespace {

TransferError errno_error(ErrorKind kind, const std::string& what) {
    return make_error(kind, what + ": " + std::strerror(errno));
}

using Clock = std::chrono::steady_clock;

Millis remaining(Clock::time_point deadline) {
    auto left = std::chrono::duration_cast<Millis>(deadline - Clock::now());
    return left.count() < 0 ? Millis(0) : left;
}

Status wait_fd(int fd, short events, Clock::time_point deadline, const char* what) {
    for (;;) {
        Millis left = remaining(deadline);
        if (left.count() == 0) {
            return make_error(ErrorKind::Timeout, std::string(what) + " timed out");
        }
        struct pollfd p{fd, events, 0};
        int rc = ::poll(&p, 1, int(left.count()));
        if (rc > 0) return ok_status();
        if (rc == 0) return make_error(ErrorKind::Timeout, std::string(what) + " timed out");
        if (errno != EINTR) return errno_error(ErrorKind::PeerUnreachable, what);
    }
}

}  // namespace

void Fd::reset() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

Result<Fd> unix_listen(const std::string& path, int backlog) {
    if (path.size() >= sizeof(sockaddr_un{}.sun_path)) {
        return make_error(ErrorKind::PeerUnreachable, "socket path too long: " + path);
    }
    Fd fd(::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0));
    if (!fd.valid()) return errno_error(ErrorKind::PeerUnreachable, "socket");
    sockaddr_un addr{};
    addr.sun_family = AF_UNIX;
    std::strncpy(addr.sun_path, path.c_str(), sizeof(addr.sun_path) - 1);
    ::unlink(path.c_str());
    if (::bind(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        return errno_error(ErrorKind::PeerUnreachable, "bind " + path);
    }
    if (::listen(fd.get(), backlog) != 0) {
        return errno_error(ErrorKind::PeerUnreachable, "listen " + path);
    }
    return fd;
}

Result<Fd> unix_connect(const std::string& path) {
    if (path.size() >= sizeof(sockaddr_un{}.sun_path)) {
        return make_error(ErrorKind::PeerUnreachable, "socket path too long: " + path);
    }
    Fd fd(::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0));
    if (!fd.valid()) return errno_error(ErrorKind::PeerUnreachable, "socket");
    sockaddr_un addr{};
    addr.sun_family = AF_UNIX;
    std::strncpy(addr.sun_path, path.c_str(), sizeof(addr.sun_path) - 1);
    if (::connect(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        return errno_error(ErrorKind::PeerUnreachable, "connect " + path);
    }
    return fd;
}

Result<Fd> tcp_listen(const std::string& host, std::uint16_t port, int backlog) {
    Fd fd(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
    if (!fd.valid()) return errno_error(ErrorKind::PeerUnreachable, "socket");
    int one = 1;
    ::setsockopt(fd.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        return make_error(ErrorKind::PeerUnreachable, "unparseable listen address: " + host);
    }
    if (::bind(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        return errno_error(ErrorKind::PeerUnreachable,
                           "bind " + host + ":" + std::to_string(port));
    }
    if (::listen(fd.get(), backlog) != 0) {
        return errno_error(ErrorKind::PeerUnreachable, "listen");
    }
    return fd;
}

Result<Fd> tcp_connect(const std::string& host, std::uint16_t port, Millis timeout) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    int rc = ::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res);
    if (rc != 0) {
        return make_error(ErrorKind::PeerUnreachable,
                          "resolve " + host + ": " + gai_strerror(rc));
    }
    Fd fd(::socket(res->ai_family, res->ai_socktype | SOCK_CLOEXEC | SOCK_NONBLOCK, 0));
    if (!fd.valid()) {
        ::freeaddrinfo(res);
        return errno_error(ErrorKind::PeerUnreachable, "socket");
    }
    rc = ::connect(fd.get(), res->ai_addr, res->ai_addrlen);
    ::freeaddrinfo(res);
    if (rc != 0 && errno != EINPROGRESS) {
        return errno_error(ErrorKind::PeerUnreachable,
                           "connect " + host + ":" + std::to_string(port));
    }
    if (rc != 0) {
        auto deadline = std::chrono::steady_clock::now() + timeout;
        if (auto s = wait_fd(fd.get(), POLLOUT, deadline, "connect"); !s.ok()) return s.error();
        int err = 0;
        socklen_t len = sizeof(err);
        ::getsockopt(fd.get(), SOL_SOCKET, SO_ERROR, &err, &len);
        if (err != 0) {
            return make_error(ErrorKind::PeerUnreachable,
                              "connect " + host + ":" + std::to_string(port) + ": " +
                                  std::strerror(err));
        }
    }
    int flags = ::fcntl(fd.get(), F_GETFL);
    ::fcntl(fd.get(), F_SETFL, flags & ~O_NONBLOCK);
    return fd;
}

Result<std::uint16_t> local_port(int fd) {
    sockaddr_in addr{};
    socklen_t len = sizeof(addr);
    if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
        return errno_error(ErrorKind::PeerUnreachable, "getsockname");
    }
    return ntohs(addr.sin_port);
}

void set_nodelay(int fd) {
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

Result<Fd> accept_with_timeout(int listen_fd, Millis timeout) {
    struct pollfd p{listen_fd, POLLIN, 0};
    int rc = ::poll(&p, 1, int(timeout.count()));
    if (rc == 0) return Fd();
    if (rc < 0) {
        if (errno == EINTR) return Fd();
        return errno_error(ErrorKind::PeerUnreachable, "poll accept");
    }
    int fd = ::accept4(listen_fd, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) {
        if (errno == EINTR || errno == ECONNABORTED) return Fd();
        return errno_error(ErrorKind::PeerUnreachable, "accept");
    }
    return Fd(fd);
}

Status read_full(int fd, std::span<std::uint8_t> buf, Millis timeout) {
    auto deadline = std::chrono::steady_clock::now() + timeout;
    std::size_t got = 0;
    while (got < buf.size()) {
        if (auto s = wait_fd(fd, POLLIN, deadline, "read"); !s.ok()) return s;
        ssize_t n = ::recv(fd, buf.data() + got, buf.size() - got, 0);
        if (n == 0) {
            return make_error(ErrorKind::PeerUnreachable, "connection closed mid-message");
        }
        if (n < 0) {
            if (errno == EINTR || errno == EAGAIN) continue;
            return errno_error(ErrorKind::PeerUnreachable, "read");
        }
        got += std::size_t(n);
    }
    return ok_status();
}

Result<bool> read_full_or_eof(int fd, std::span<std::uint8_t> buf, Millis timeout) {
    auto deadline = std::chrono::steady_clock::now() + timeout;
    std::size_t got = 0;
    while (got < buf.size()) {
        if (auto s = wait_fd(fd, POLLIN, deadline, "read"); !s.ok()) return std::move(s).error();
        ssize_t n = ::recv(fd, buf.data() + got, buf.size() - got, 0);
        if (n == 0) {
            if (got == 0) return false;
            return make_error(ErrorKind::PeerUnreachable, "connection closed mid-message");
        }
        if (n < 0) {
            if (errno == EINTR || errno == EAGAIN) continue;
            return errno_error(ErrorKind::PeerUnreachable, "read");
        }
        got += std::size_t(n);
    }
    return true;
}

Status write_full(int fd, std::span<const std::uint8_t> buf, Millis timeout) {
    auto deadline = std::chrono::steady_clock::now() + timeout;
    std::size_t sent = 0;
    while (sent < buf.size()) {
        ssize_t n = ::send(fd, buf.data() + sent, buf.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            if (errno == EAGAIN || errno == EWOULDBLOCK) {
                if (auto s = wait_fd(fd, POLLOUT, deadline, "write"); !s.ok()) return s;
                continue;
            }
            return errno_error(ErrorKind::PeerUnreachable, "write");
        }
        sent += std::size_t(n);
    }
    return ok_status();
}

int open_fd_count() {
    int count = 0;
    DIR* dir = ::opendir("/proc/self/fd");
    if (!dir) return -1;
    while (::readdir(dir) != nullptr) count++;
    ::closedir(dir);
    return count - 3;  // ".", "..", and the dirfd itself
}

}  // namespace rr::net
