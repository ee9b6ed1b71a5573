#include "roadrunner/runtime/shim.hpp"

#include <chrono>
#include <map>

#include "roadrunner/transport/local.hpp"

namespace rr::runtime {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

struct Shim::Impl {
    Config config;
    Registry registry;

    struct LocalFunction {
        std::unique_ptr<host::Instance> instance;
        std::unique_ptr<transport::DeliverySink> sink;
        std::unique_ptr<transport::KernelServer> kernel_server;
    };
    std::map<std::uint32_t, LocalFunction> locals;  // function id -> hosted guest
    std::unique_ptr<transport::NetworkServer> network_server;
    // One client per hose preference so a benchmark override does not
    // disturb the default connection's state.
    transport::NetworkClient network_client_auto;
    transport::NetworkClient network_client_plain;
    transport::TransportOptions transport_options;

    Impl(Config cfg, Registry reg, transport::NetworkOptions auto_options,
         transport::NetworkOptions plain_options)
        : config(std::move(cfg)),
          registry(std::move(reg)),
          network_client_auto(auto_options),
          network_client_plain(plain_options) {}

    transport::NetworkClient& client_for(transport::HosePreference pref) {
        return pref == transport::HosePreference::Auto ? network_client_auto
                                                       : network_client_plain;
    }
};

Shim::Shim() = default;
Shim::~Shim() { stop_listeners(); }

const Config& Shim::config() const { return impl_->config; }
const Registry& Shim::registry() const { return impl_->registry; }

host::Instance* Shim::instance(std::uint32_t function_id) {
    auto it = impl_->locals.find(function_id);
    return it == impl_->locals.end() ? nullptr : it->second.instance.get();
}

transport::DeliverySink* Shim::sink(std::uint32_t function_id) {
    auto it = impl_->locals.find(function_id);
    return it == impl_->locals.end() ? nullptr : it->second.sink.get();
}

Result<std::unique_ptr<Shim>> Shim::create(const Config& config) {
    auto registry = Registry::build(config.functions);
    if (!registry.ok()) return std::move(registry).error();

    transport::TransportOptions topts;
    topts.ack_timeout = std::chrono::milliseconds(config.timeout_ms);
    topts.chunk_size = config.chunk_size;

    transport::NetworkOptions auto_opts;
    auto_opts.transport = topts;
    auto_opts.hose =
        config.hose_enabled ? transport::HosePreference::Auto : transport::HosePreference::Disabled;
    transport::NetworkOptions plain_opts;
    plain_opts.transport = topts;
    plain_opts.hose = transport::HosePreference::Disabled;

    auto shim = std::unique_ptr<Shim>(new Shim());
    shim->impl_ =
        std::make_unique<Impl>(config, std::move(registry).value(), auto_opts, plain_opts);
    shim->impl_->transport_options = topts;

    host::InstanceLimits limits{config.max_memory};
    for (const FunctionRecord& record : shim->impl_->registry.records()) {
        if (record.locality != Locality::SameVm) continue;
        auto instance = host::Instance::instantiate_file(record.wasm_path, limits);
        if (!instance.ok()) {
            return make_error(instance.error().kind,
                              "function " + record.name + " (" + record.wasm_path +
                                  "): " + instance.error().detail);
        }
        Impl::LocalFunction local;
        local.instance = std::move(instance).value();
        local.sink = std::make_unique<transport::DeliverySink>(*local.instance);
        shim->impl_->locals.emplace(record.function_id, std::move(local));
    }
    return shim;
}

Status Shim::start_listeners() {
    Impl& impl = *impl_;
    if (impl.config.serve_kernel) {
        for (const FunctionRecord& record : impl.registry.records()) {
            if (record.locality != Locality::SameVm) continue;
            auto& local = impl.locals.at(record.function_id);
            if (local.kernel_server) continue;
            std::string path = record.endpoint.empty()
                                   ? transport::kernel_socket_path(
                                         impl.config.runtime_dir, record.workflow_id,
                                         record.function_id)
                                   : record.endpoint;
            transport::TransportOptions opts = impl.transport_options;
            opts.expect_workflow = record.workflow_id;
            opts.expect_function = record.function_id;
            auto server = transport::KernelServer::start(path, *local.sink, opts);
            if (!server.ok()) {
                return make_error(server.error().kind,
                                  "kernel listener " + path + ": " + server.error().detail);
            }
            local.kernel_server = std::move(server).value();
        }
    }
    if (impl.config.listen_network && !impl.network_server) {
        transport::NetworkOptions nopts;
        nopts.transport = impl.transport_options;
        nopts.hose = impl.config.hose_enabled ? transport::HosePreference::Auto
                                              : transport::HosePreference::Disabled;
        Impl* impl_ptr = &impl;
        auto resolver =
            [impl_ptr](const FrameHeader& header) -> Result<transport::DeliverySink*> {
            auto it = impl_ptr->locals.find(header.target_fn);
            const FunctionRecord* record =
                impl_ptr->registry.find(header.workflow_id, header.target_fn);
            if (it == impl_ptr->locals.end() || !record) {
                return make_error(ErrorKind::RegistryMiss,
                                  "no local function " + std::to_string(header.target_fn) +
                                      " in workflow " + workflow_to_hex(header.workflow_id));
            }
            return it->second.sink.get();
        };
        auto server = transport::NetworkServer::start(impl.config.listen_host,
                                                      impl.config.listen_port, resolver, nopts);
        if (!server.ok()) {
            return make_error(server.error().kind,
                              "network listener " + impl.config.listen_host + ":" +
                                  std::to_string(impl.config.listen_port) + ": " +
                                  server.error().detail);
        }
        impl.network_server = std::move(server).value();
    }
    return ok_status();
}

void Shim::stop_listeners() {
    if (!impl_) return;
    for (auto& [id, local] : impl_->locals) {
        if (local.kernel_server) local.kernel_server->stop();
        local.kernel_server.reset();
    }
    if (impl_->network_server) impl_->network_server->stop();
    impl_->network_server.reset();
    impl_->network_client_auto.close_connections();
    impl_->network_client_plain.close_connections();
}

std::uint16_t Shim::network_port() const {
    return impl_->network_server ? impl_->network_server->port() : 0;
}

Result<host::HostCallCapture> Shim::stage_and_run(std::uint32_t function_id,
                                                  std::span<const std::uint8_t> payload) {
    host::Instance* inst = instance(function_id);
    if (!inst) {
        return make_error(ErrorKind::RegistryMiss,
                          "function " + std::to_string(function_id) + " is not hosted here");
    }
    auto region = inst->guest_alloc(payload.size());
    if (!region.ok()) return std::move(region).error();
    if (auto s = inst->write_memory(payload, region.value().offset); !s.ok())
        return std::move(s).error();
    if (auto s = inst->write_mailbox(region.value()); !s.ok()) return std::move(s).error();
    auto run = inst->invoke("run", {});
    if (!run.ok()) return std::move(run).error();
    auto captures = inst->take_captures();
    if (captures.empty()) {
        return make_error(ErrorKind::GuestAbiMissing,
                          "guest emitted no capture from run()");
    }
    return captures.front();
}

DispatchOutcome Shim::dispatch(std::uint32_t source_fn, std::uint32_t target_fn,
                               const host::HostCallCapture& capture,
                               const DispatchOptions& options) {
    Impl& impl = *impl_;
    DispatchOutcome outcome;
    bench::TransferReport& report = outcome.report;
    report.payload_bytes = capture.region.length;

    auto fail = [&](TransferError err, Clock::time_point start) {
        report.t_total = seconds_since(start);
        outcome.status = std::move(err);
        return outcome;
    };

    auto start = Clock::now();

    auto route = impl.registry.resolve_route(impl.config.workflow, source_fn, target_fn);
    if (!route.ok()) {
        report.mode = "unroutable";
        return fail(std::move(route).error(), start);
    }
    TransferMode mode = options.mode_override.value_or(route.value().mode);
    const FunctionRecord& target = *route.value().target;
    report.mode = to_string(mode);

    host::Instance* source = instance(source_fn);
    if (!source) {
        return fail(make_error(ErrorKind::RegistryMiss,
                               "source function " + std::to_string(source_fn) +
                                   " is not hosted by this shim"),
                    start);
    }
    if (capture.instance_id != source->id()) {
        return fail(make_error(ErrorKind::RegistryMiss,
                               "capture does not belong to the source instance"),
                    start);
    }
    if (capture.region.length == 0) {
        return fail(make_error(ErrorKind::BoundsViolation,
                               "zero-length region cannot be transferred"),
                    start);
    }

    report.t_locate = seconds_since(start);
    auto transfer_start = Clock::now();

    FrameHeader header;
    header.msg_type = MsgType::Data;
    header.workflow_id = impl.config.workflow;
    header.source_fn = source_fn;
    header.target_fn = target_fn;
    header.payload_len = capture.region.length;

    switch (mode) {
    case TransferMode::User: {
        transport::DeliverySink* target_sink = sink(target_fn);
        if (!target_sink) {
            return fail(make_error(ErrorKind::RegistryMiss,
                                   "user plane requires a co-hosted target"),
                        transfer_start);
        }
        transport::LocalRoute lroute{source->id(), target_sink->instance().id(),
                                     impl.config.workflow};
        std::lock_guard lock(target_sink->mutex());
        auto region = transport::deliver_local(*source, *target_sink, lroute, capture);
        if (!region.ok()) {
            report.t_transfer = seconds_since(transfer_start);
            return fail(std::move(region).error(), start);
        }
        report.t_transfer = seconds_since(transfer_start);
        report.t_total = seconds_since(start);
        outcome.delivered = region.value();
        // Hand the guest its turn after the measured window.
        if (auto s = target_sink->complete(region.value()); !s.ok()) {
            outcome.status = std::move(s).error();
            return outcome;
        }
        break;
    }
    case TransferMode::Kernel: {
        std::string path = target.endpoint.empty()
                               ? transport::kernel_socket_path(impl.config.runtime_dir,
                                                               target.workflow_id,
                                                               target.function_id)
                               : target.endpoint;
        auto ack = transport::send_kernel(path, header, *source, capture.region,
                                          impl.transport_options);
        report.t_transfer = seconds_since(transfer_start);
        if (!ack.ok()) {
            return fail(std::move(ack).error(), start);
        }
        report.t_total = seconds_since(start);
        break;
    }
    case TransferMode::Network: {
        if (target.address_host.empty()) {
            return fail(make_error(ErrorKind::RegistryMiss,
                                   "network plane requires an address on the target record"),
                        start);
        }
        transport::PeerAddress peer{target.address_host, target.address_port,
                                    target.function_id};
        transport::HosePreference pref = options.hose_override.value_or(
            impl.config.hose_enabled ? transport::HosePreference::Auto
                                     : transport::HosePreference::Disabled);
        auto outcome_net = impl.client_for(pref).send(peer, header, *source, capture.region);
        report.t_transfer = seconds_since(transfer_start);
        if (!outcome_net.ok()) {
            return fail(std::move(outcome_net).error(), start);
        }
        outcome.zero_copy = outcome_net.value().zero_copy;
        report.t_total = seconds_since(start);
        break;
    }
    }

    report.throughput_rps = bench::extrapolate_throughput(report.t_total);
    return outcome;
}

}  // namespace rr::runtime
