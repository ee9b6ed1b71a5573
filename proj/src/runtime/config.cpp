#include "roadrunner/runtime/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>

namespace rr::runtime {

const char* to_string(Locality locality) {
    switch (locality) {
    case Locality::SameVm: return "same_vm";
    case Locality::SameHost: return "same_host";
    case Locality::Remote: return "remote";
    }
    return "?";
}

namespace {

TransferError config_error(const std::string& origin, std::size_t line, const std::string& what) {
    return make_error(ErrorKind::RegistryMiss,
                      origin + ":" + std::to_string(line) + ": " + what);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

bool parse_u64(std::string_view text, std::uint64_t& out) {
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && p == text.data() + text.size();
}

bool parse_bool(std::string_view text, bool& out) {
    if (text == "true" || text == "on" || text == "1") {
        out = true;
        return true;
    }
    if (text == "false" || text == "off" || text == "0") {
        out = false;
        return true;
    }
    return false;
}

bool parse_host_port(std::string_view text, std::string& host, std::uint16_t& port) {
    auto colon = text.rfind(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 >= text.size()) return false;
    std::uint64_t p = 0;
    if (!parse_u64(text.substr(colon + 1), p) || p == 0 || p > 65535) return false;
    host = std::string(text.substr(0, colon));
    port = std::uint16_t(p);
    return true;
}

struct PendingFunction {
    FunctionRecord record;
    std::size_t line = 0;  // of the [function] header
    bool has_id = false;
    bool has_locality = false;
    bool has_workflow = false;
    bool has_address = false;
};

}  // namespace

Result<Config> parse_config(std::string_view text, const std::string& origin) {
    Config config;
    bool runtime_dir_set = false;
    bool workflow_set = false;

    std::vector<PendingFunction> pending;
    bool in_function = false;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        line_no++;

        auto hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line == "[function]") {
            pending.emplace_back();
            pending.back().line = line_no;
            in_function = true;
            continue;
        }
        if (line.front() == '[') {
            return config_error(origin, line_no, "unknown section " + std::string(line));
        }

        auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            return config_error(origin, line_no, "expected key = value");
        }
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) return config_error(origin, line_no, "empty key");

        if (in_function) {
            PendingFunction& fn = pending.back();
            if (key == "id") {
                std::uint64_t v;
                if (!parse_u64(value, v) || v > 0xFFFFFFFFull || v == 0) {
                    return config_error(origin, line_no, "id must be a nonzero u32");
                }
                fn.record.function_id = std::uint32_t(v);
                fn.has_id = true;
            } else if (key == "name") {
                fn.record.name = value;
            } else if (key == "locality") {
                if (value == "same_vm")
                    fn.record.locality = Locality::SameVm;
                else if (value == "same_host")
                    fn.record.locality = Locality::SameHost;
                else if (value == "remote")
                    fn.record.locality = Locality::Remote;
                else
                    return config_error(origin, line_no,
                                        "locality must be same_vm, same_host or remote, got '" +
                                            value + "'");
                fn.has_locality = true;
            } else if (key == "wasm") {
                fn.record.wasm_path = value;
            } else if (key == "endpoint") {
                fn.record.endpoint = value;
            } else if (key == "address") {
                if (!parse_host_port(value, fn.record.address_host, fn.record.address_port)) {
                    return config_error(origin, line_no, "address must be host:port");
                }
                fn.has_address = true;
            } else if (key == "workflow") {
                auto id = workflow_from_hex(value);
                if (!id) return config_error(origin, line_no, "workflow must be 32 hex chars");
                fn.record.workflow_id = *id;
                fn.has_workflow = true;
            } else {
                return config_error(origin, line_no, "unknown function key '" + key + "'");
            }
            continue;
        }

        if (key == "workflow") {
            auto id = workflow_from_hex(value);
            if (!id) return config_error(origin, line_no, "workflow must be 32 hex chars");
            config.workflow = *id;
            workflow_set = true;
        } else if (key == "runtime_dir") {
            config.runtime_dir = value;
            runtime_dir_set = true;
        } else if (key == "serve_kernel") {
            if (!parse_bool(value, config.serve_kernel)) {
                return config_error(origin, line_no, "serve_kernel must be true or false");
            }
        } else if (key == "listen_network") {
            if (!parse_host_port(value, config.listen_host, config.listen_port)) {
                return config_error(origin, line_no, "listen_network must be host:port");
            }
            config.listen_network = true;
        } else if (key == "hose") {
            if (value == "auto")
                config.hose_enabled = true;
            else if (value == "off")
                config.hose_enabled = false;
            else
                return config_error(origin, line_no, "hose must be auto or off");
        } else if (key == "chunk_size") {
            std::uint64_t v;
            if (!parse_u64(value, v) || v == 0 || v > (1ull << 30)) {
                return config_error(origin, line_no, "chunk_size must be in (0, 1GiB]");
            }
            config.chunk_size = std::size_t(v);
        } else if (key == "timeout_ms") {
            if (!parse_u64(value, config.timeout_ms) || config.timeout_ms == 0) {
                return config_error(origin, line_no, "timeout_ms must be a positive integer");
            }
        } else if (key == "max_memory") {
            if (!parse_u64(value, config.max_memory) || config.max_memory < 65536) {
                return config_error(origin, line_no, "max_memory must be at least one page");
            }
        } else {
            return config_error(origin, line_no, "unknown key '" + key + "'");
        }
    }

    if (!runtime_dir_set) {
        if (const char* env = std::getenv("ROADRUNNER_RUNTIME_DIR"); env && *env) {
            config.runtime_dir = env;
        }
    }
    if (!workflow_set) {
        bool all_explicit = !pending.empty();
        for (const PendingFunction& fn : pending) all_explicit &= fn.has_workflow;
        if (!all_explicit) {
            return config_error(origin, 0, "missing workflow key");
        }
    }

    std::set<std::pair<WorkflowId, std::uint32_t>> seen;
    for (PendingFunction& fn : pending) {
        std::string where = "function entry at line " + std::to_string(fn.line);
        if (!fn.has_id) return config_error(origin, fn.line, where + ": missing id");
        if (!fn.has_locality) return config_error(origin, fn.line, where + ": missing locality");
        if (!fn.has_workflow) fn.record.workflow_id = config.workflow;
        if (fn.record.name.empty()) fn.record.name = "fn" + std::to_string(fn.record.function_id);

        switch (fn.record.locality) {
        case Locality::SameVm:
            if (fn.record.wasm_path.empty()) {
                return config_error(origin, fn.line,
                                    where + ": same_vm locality requires a wasm path");
            }
            break;
        case Locality::SameHost:
            break;  // endpoint defaults to the runtime-dir layout
        case Locality::Remote:
            if (!fn.has_address) {
                return config_error(origin, fn.line,
                                    where + ": remote locality requires an address");
            }
            break;
        }
        if (!seen.insert({fn.record.workflow_id, fn.record.function_id}).second) {
            return config_error(origin, fn.line,
                                where + ": duplicate function id " +
                                    std::to_string(fn.record.function_id) + " in workflow");
        }
        config.functions.push_back(std::move(fn.record));
    }
    return config;
}

Result<Config> load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        return make_error(ErrorKind::RegistryMiss, "cannot open config file: " + path);
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text, path);
}

}  // namespace rr::runtime
