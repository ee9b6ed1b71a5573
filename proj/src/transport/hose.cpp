#define _GNU_SOURCE 1
#include "roadrunner/transport/hose.hpp"

#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <mutex>
#include <sys/uio.h>
#include <unistd.h>
#include <utility>

namespace rr::transport {

namespace {

TransferError hose_errno(const char* what) {
    return make_error(ErrorKind::HoseUnavailable, std::string(what) + ": " + std::strerror(errno));
}

}  // namespace

Result<DataHose> DataHose::create() {
    int fds[2];
    if (::pipe2(fds, O_CLOEXEC) != 0) {
        return hose_errno("pipe");
    }
    DataHose hose;
    hose.read_fd_ = fds[0];
    hose.write_fd_ = fds[1];
    long cap = ::fcntl(fds[0], F_GETPIPE_SZ);
    hose.capacity_ = cap > 0 ? std::size_t(cap) : 65536;
    return hose;
}

DataHose::DataHose(DataHose&& other) noexcept
    : read_fd_(std::exchange(other.read_fd_, -1)),
      write_fd_(std::exchange(other.write_fd_, -1)),
      capacity_(std::exchange(other.capacity_, 0)) {}

DataHose& DataHose::operator=(DataHose&& other) noexcept {
    if (this != &other) {
        close_all();
        read_fd_ = std::exchange(other.read_fd_, -1);
        write_fd_ = std::exchange(other.write_fd_, -1);
        capacity_ = std::exchange(other.capacity_, 0);
    }
    return *this;
}

void DataHose::close_all() {
    if (read_fd_ >= 0) {
        ::close(read_fd_);
        read_fd_ = -1;
    }
    if (write_fd_ >= 0) {
        ::close(write_fd_);
        write_fd_ = -1;
    }
}

Status hose_fill_from_memory(DataHose& hose, std::span<const std::uint8_t> chunk) {
    std::size_t done = 0;
    while (done < chunk.size()) {
        struct iovec iov;
        iov.iov_base = const_cast<std::uint8_t*>(chunk.data() + done);
        iov.iov_len = chunk.size() - done;
        ssize_t n = ::vmsplice(hose.write_fd(), &iov, 1, 0);
        if (n < 0) {
            if (errno == EINTR) continue;
            return hose_errno("vmsplice into hose");
        }
        done += std::size_t(n);
    }
    return ok_status();
}

Status hose_drain_to_memory(DataHose& hose, std::span<std::uint8_t> chunk) {
    std::size_t done = 0;
    while (done < chunk.size()) {
        struct iovec iov;
        iov.iov_base = chunk.data() + done;
        iov.iov_len = chunk.size() - done;
        ssize_t n = ::vmsplice(hose.read_fd(), &iov, 1, 0);
        if (n < 0) {
            if (errno == EINTR) continue;
            return hose_errno("vmsplice out of hose");
        }
        if (n == 0) {
            return make_error(ErrorKind::HoseUnavailable, "hose drained early");
        }
        done += std::size_t(n);
    }
    return ok_status();
}

Status hose_splice_to_socket(DataHose& hose, int socket_fd, std::size_t n, net::Millis timeout) {
    auto deadline = std::chrono::steady_clock::now() + timeout;
    std::size_t done = 0;
    while (done < n) {
        ssize_t moved = ::splice(hose.read_fd(), nullptr, socket_fd, nullptr, n - done,
                                 SPLICE_F_MORE);
        if (moved < 0) {
            if (errno == EINTR) continue;
            return hose_errno("splice hose to socket");
        }
        if (moved == 0) {
            return make_error(ErrorKind::PeerUnreachable, "socket closed during splice");
        }
        done += std::size_t(moved);
        if (std::chrono::steady_clock::now() > deadline) {
            return make_error(ErrorKind::Timeout, "splice to socket timed out");
        }
    }
    return ok_status();
}

Status hose_splice_from_socket(int socket_fd, DataHose& hose, std::size_t n, net::Millis timeout) {
    auto deadline = std::chrono::steady_clock::now() + timeout;
    std::size_t done = 0;
    while (done < n) {
        ssize_t moved = ::splice(socket_fd, nullptr, hose.write_fd(), nullptr, n - done, 0);
        if (moved < 0) {
            if (errno == EINTR) continue;
            return hose_errno("splice socket to hose");
        }
        if (moved == 0) {
            return make_error(ErrorKind::PeerUnreachable, "connection closed mid-payload");
        }
        done += std::size_t(moved);
        if (std::chrono::steady_clock::now() > deadline) {
            return make_error(ErrorKind::Timeout, "splice from socket timed out");
        }
    }
    return ok_status();
}

Status hose_fill_buffered(DataHose& hose, std::span<const std::uint8_t> chunk) {
    std::size_t done = 0;
    while (done < chunk.size()) {
        ssize_t n = ::write(hose.write_fd(), chunk.data() + done, chunk.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            return hose_errno("write into hose");
        }
        done += std::size_t(n);
    }
    return ok_status();
}

Status hose_drain_buffered(DataHose& hose, std::span<std::uint8_t> chunk) {
    std::size_t done = 0;
    while (done < chunk.size()) {
        ssize_t n = ::read(hose.read_fd(), chunk.data() + done, chunk.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            return hose_errno("read out of hose");
        }
        if (n == 0) {
            return make_error(ErrorKind::HoseUnavailable, "hose drained early");
        }
        done += std::size_t(n);
    }
    return ok_status();
}

namespace {

HoseCapability probe_capability() {
    HoseCapability cap;

    auto listen = net::tcp_listen("127.0.0.1", 0);
    if (!listen.ok()) {
        cap.detail = "probe listen failed: " + listen.error().detail;
        return cap;
    }
    auto port = net::local_port(listen.value().get());
    if (!port.ok()) {
        cap.detail = "probe getsockname failed";
        return cap;
    }
    auto client = net::tcp_connect("127.0.0.1", port.value(), net::Millis(2000));
    if (!client.ok()) {
        cap.detail = "probe connect failed: " + client.error().detail;
        return cap;
    }
    auto server = net::accept_with_timeout(listen.value().get(), net::Millis(2000));
    if (!server.ok() || !server.value().valid()) {
        cap.detail = "probe accept failed";
        return cap;
    }

    std::array<std::uint8_t, 4096> out;
    for (std::size_t i = 0; i < out.size(); i++) out[i] = std::uint8_t(i * 13 + 7);

    auto send_hose = DataHose::create();
    if (!send_hose.ok()) {
        cap.detail = send_hose.error().detail;
        return cap;
    }
    if (auto s = hose_fill_from_memory(send_hose.value(), out); !s.ok()) {
        cap.detail = s.error().detail;
        return cap;
    }
    if (auto s = hose_splice_to_socket(send_hose.value(), client.value().get(), out.size(),
                                       net::Millis(2000));
        !s.ok()) {
        cap.detail = s.error().detail;
        return cap;
    }

    auto recv_hose = DataHose::create();
    if (!recv_hose.ok()) {
        cap.detail = recv_hose.error().detail;
        return cap;
    }
    if (auto s = hose_splice_from_socket(server.value().get(), recv_hose.value(), out.size(),
                                         net::Millis(2000));
        !s.ok()) {
        cap.detail = s.error().detail;
        return cap;
    }
    std::array<std::uint8_t, 4096> in{};
    if (auto s = hose_drain_to_memory(recv_hose.value(), in); !s.ok()) {
        cap.detail = s.error().detail;
        return cap;
    }
    if (std::memcmp(out.data(), in.data(), out.size()) != 0) {
        cap.detail = "probe round trip corrupted data";
        return cap;
    }
    cap.available = true;
    return cap;
}

}  // namespace

const HoseCapability& hose_capability() {
    static const HoseCapability cap = probe_capability();
    return cap;
}

}  // namespace rr::transport
