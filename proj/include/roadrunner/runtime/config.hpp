#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "roadrunner/frame.hpp"

namespace rr::runtime {

enum class Locality { SameVm, SameHost, Remote };

const char* to_string(Locality locality);

// Registry entry binding a function identity to its workflow, placement
// and transport endpoint. Placement is declared, not discovered: records
// describe where each function lives relative to the shim that loads this
// config.
struct FunctionRecord {
    std::uint32_t function_id = 0;
    std::string name;
    WorkflowId workflow_id{};
    Locality locality = Locality::SameVm;
    std::string wasm_path;      // required for same_vm
    std::string endpoint;       // same_host socket path; defaults to the runtime-dir layout
    std::string address_host;   // remote
    std::uint16_t address_port = 0;
};

struct Config {
    WorkflowId workflow{};
    std::string runtime_dir = "/tmp/roadrunner";
    bool serve_kernel = false;
    bool listen_network = false;
    std::string listen_host = "127.0.0.1";
    std::uint16_t listen_port = 0;
    bool hose_enabled = true;  // hose = auto | off
    std::size_t chunk_size = 256 * 1024;
    std::uint64_t timeout_ms = 30000;
    std::uint64_t max_memory = 256ull * 1024 * 1024;
    std::vector<FunctionRecord> functions;
};

// Flat line-oriented "key = value" text with [function] blocks. '#' starts
// a comment. Unknown keys, malformed values and inconsistent records fail
// with a message naming the offender. ROADRUNNER_RUNTIME_DIR overrides the
// default runtime directory when the file does not set one.
Result<Config> parse_config(std::string_view text, const std::string& origin);
Result<Config> load_config(const std::string& path);

}  // namespace rr::runtime
