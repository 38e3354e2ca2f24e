/*
==================================================================================
   Copyright (c) 2026 The pcl-slicing Authors.

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
==================================================================================
*/
#pragma once

// Transport and enforcement legs of the loop: A1 policy delivery, xApp
// translation to E2 control, E2 application on the node, and the O2
// client/server pair driving O-Cloud state.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "pcl/error.hpp"
#include "pcl/kpi_pipeline.hpp"
#include "pcl/pcl_rapp.hpp"
#include "pcl/slice_config.hpp"
#include "pcl/types.hpp"

namespace pcl {

enum class E2Event { SetSliceParams };

struct E2ControlMessage {
    E2Event event = E2Event::SetSliceParams;
    std::string slice_id;
    CellId cell;
    SliceParams state;
    long sequence_no = 0;
    long timestamp_hour = 0;

    friend bool operator==(const E2ControlMessage&, const E2ControlMessage&) = default;
};

struct CloudSliceState {
    long vm_count = 0;
    long cpu_units = 0;
    long mem_units = 0;
    bool active = false;

    friend bool operator==(const CloudSliceState&, const CloudSliceState&) = default;
};

struct CloudState {
    std::map<std::string, CloudSliceState> slices;

    friend bool operator==(const CloudState&, const CloudState&) = default;
};

// ---- wire format -----------------------------------------------------------
//
// One JSON document per frame, no embedded newlines, tagged by "schema".

inline constexpr const char* kA1Schema = "a1-policy-v1";
inline constexpr const char* kE2Schema = "e2-control-v1";
inline constexpr const char* kO2Schema = "o2-scale-v1";
inline constexpr const char* kVesSchema = "ves-v1";

namespace wire {

using ojson = nlohmann::ordered_json;

inline ojson cell_json(const CellId& c) { return {{"enb", c.enb_index}, {"cell", c.cell_index}}; }

inline CellId cell_from(const nlohmann::json& j) {
    const int e = j.at("enb").get<int>();
    const int c = j.at("cell").get<int>();
    if (e < 0 || c < 0) throw ParseError("negative cell index");
    return {e, c};
}

inline void expect_schema(const nlohmann::json& j, const char* schema) {
    if (!j.is_object() || !j.contains("schema") || j.at("schema") != schema)
        throw ParseError(std::string("frame is not ") + schema);
}

inline nlohmann::json parse_frame(std::string_view frame) {
    nlohmann::json j = nlohmann::json::parse(frame, nullptr, false);
    if (j.is_discarded()) throw ParseError("frame is not valid JSON");
    return j;
}

// Rethrows library exceptions from field access as ParseError.
template <class F>
auto guarded(const char* what, F&& f) {
    try {
        return f();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed ") + what + ": " + e.what());
    } catch (const ContractError& e) {
        throw ParseError(std::string("invalid ") + what + ": " + e.what());
    }
}

}  // namespace wire

// The A1 policy body, field order fixed.
inline nlohmann::ordered_json policy_json(const RanSliceDescriptor& d) {
    wire::ojson layers = wire::ojson::array();
    for (const auto& l : d.layer_descriptors) {
        wire::ojson v = l.parameter == SliceParameter::MaxActiveUes ? wire::ojson(static_cast<long>(l.value))
                                                                     : wire::ojson(l.value);
        layers.push_back({{"layer", layer_name(l.layer)},
                          {"parameter", parameter_name(l.parameter)},
                          {"value", std::move(v)},
                          {"direction", direction_name(l.direction)}});
    }
    return {{"policyType", "pcl-slice-v1"},
            {"sliceId", d.slice_id},
            {"plmnId", d.plmn_id},
            {"timestampHour", d.timestamp_hour},
            {"layerDescriptors", std::move(layers)}};
}

inline RanSliceDescriptor descriptor_from_policy(const nlohmann::json& p) {
    return wire::guarded("A1 policy", [&] {
        if (p.at("policyType") != "pcl-slice-v1") throw ParseError("unknown policyType");
        RanSliceDescriptor d{p.at("sliceId").get<std::string>(), p.at("plmnId").get<std::string>(), {},
                             p.at("timestampHour").get<long>()};
        for (const auto& l : p.at("layerDescriptors"))
            d.layer_descriptors.push_back({layer_from_name(l.at("layer").get<std::string>()),
                                           parameter_from_name(l.at("parameter").get<std::string>()),
                                           l.at("value").get<double>(),
                                           direction_from_name(l.at("direction").get<std::string>())});
        d.validate();
        return d;
    });
}

inline std::string encode(const A1Policy& p) {
    p.descriptor.validate();
    wire::ojson scope = wire::ojson::array();
    for (const auto& c : p.scope) scope.push_back(wire::cell_json(c));
    wire::ojson j{{"schema", kA1Schema}, {"scope", std::move(scope)}, {"policy", policy_json(p.descriptor)}};
    return j.dump();
}

inline A1Policy decode_a1(std::string_view frame) {
    const auto j = wire::parse_frame(frame);
    wire::expect_schema(j, kA1Schema);
    return wire::guarded("A1 frame", [&] {
        A1Policy p{descriptor_from_policy(j.at("policy")), {}};
        for (const auto& c : j.at("scope")) p.scope.push_back(wire::cell_from(c));
        return p;
    });
}

inline void validate(const E2ControlMessage& m) {
    if (m.slice_id.empty()) throw ProtocolError("E2 message without slice id");
    if (m.sequence_no < 1) throw ProtocolError("E2 sequence numbers start at 1");
    try {
        validate(m.state, "E2 state");
    } catch (const ContractError& e) {
        throw ProtocolError(e.what());
    }
}

inline std::string encode(const E2ControlMessage& m) {
    wire::ojson state{{"sliceId", m.slice_id},
                      {"enb", m.cell.enb_index},
                      {"cell", m.cell.cell_index},
                      {"maxActiveUes", m.state.max_active_ues},
                      {"prbQuotaPct", m.state.prb_quota_pct}};
    wire::ojson j{{"schema", kE2Schema},
                  {"event", "SET_SLICE_PARAMS"},
                  {"state", std::move(state)},
                  {"sequenceNo", m.sequence_no},
                  {"timestampHour", m.timestamp_hour}};
    return j.dump();
}

inline E2ControlMessage decode_e2(std::string_view frame) {
    const auto j = wire::parse_frame(frame);
    wire::expect_schema(j, kE2Schema);
    return wire::guarded("E2 frame", [&] {
        if (j.at("event") != "SET_SLICE_PARAMS") throw ParseError("unknown E2 event");
        const auto& s = j.at("state");
        return E2ControlMessage{E2Event::SetSliceParams,
                                s.at("sliceId").get<std::string>(),
                                wire::cell_from(s),
                                {s.at("maxActiveUes").get<long>(), s.at("prbQuotaPct").get<double>()},
                                j.at("sequenceNo").get<long>(),
                                j.at("timestampHour").get<long>()};
    });
}

inline std::string encode(const CloudScalingDirective& d) {
    d.validate();
    wire::ojson j{{"schema", kO2Schema},
                  {"sliceId", d.slice_id},
                  {"targetVmCount", d.target_vm_count},
                  {"targetCpuUnits", d.target_cpu_units},
                  {"targetMemUnits", d.target_mem_units},
                  {"activate", d.activate},
                  {"timestampHour", d.timestamp_hour}};
    return j.dump();
}

inline CloudScalingDirective decode_o2(std::string_view frame) {
    const auto j = wire::parse_frame(frame);
    wire::expect_schema(j, kO2Schema);
    return wire::guarded("O2 frame", [&] {
        CloudScalingDirective d{j.at("sliceId").get<std::string>(),
                                j.at("targetVmCount").get<long>(),
                                j.at("targetCpuUnits").get<long>(),
                                j.at("targetMemUnits").get<long>(),
                                j.at("activate").get<bool>(),
                                j.at("timestampHour").get<long>()};
        d.validate();
        return d;
    });
}

inline std::string encode(const VesEvent& ev) {
    wire::ojson j{{"schema", kVesSchema}};
    auto body = to_json(ev);
    for (auto& [k, v] : body.items()) j[k] = std::move(v);
    return j.dump();
}

inline VesEvent decode_ves(std::string_view frame) {
    const auto j = wire::parse_frame(frame);
    wire::expect_schema(j, kVesSchema);
    return ves_event_from_json(j);
}

using Message = std::variant<A1Policy, E2ControlMessage, CloudScalingDirective, VesEvent>;

inline std::string encode(const Message& m) {
    return std::visit([](const auto& x) { return encode(x); }, m);
}

inline Message decode(std::string_view frame) {
    const auto j = wire::parse_frame(frame);
    if (!j.is_object() || !j.contains("schema") || !j.at("schema").is_string())
        throw ParseError("frame has no schema tag");
    const auto schema = j.at("schema").get<std::string>();
    if (schema == kA1Schema) return decode_a1(frame);
    if (schema == kE2Schema) return decode_e2(frame);
    if (schema == kO2Schema) return decode_o2(frame);
    if (schema == kVesSchema) return decode_ves(frame);
    throw ParseError("unknown schema '" + schema + "'");
}

// ---- transport -------------------------------------------------------------

// A point-to-point frame pipe. receive() returns nullopt once every frame
// sent so far has been consumed.
class Link {
public:
    virtual ~Link() = default;
    virtual void send(std::string frame) = 0;
    virtual std::optional<std::string> receive() = 0;
    virtual std::size_t pending() const = 0;
};

// Bounded in-process FIFO.
class Inbox : public Link {
public:
    explicit Inbox(std::size_t capacity = 4096) : capacity_(capacity) {
        if (capacity_ == 0) throw ConfigError("inbox capacity must be >= 1");
    }

    void send(std::string frame) override {
        std::lock_guard lock(mu_);
        if (frames_.size() >= capacity_)
            throw BackpressureError("inbox full (" + std::to_string(capacity_) + " frames)");
        frames_.push_back(std::move(frame));
    }

    std::optional<std::string> receive() override {
        std::lock_guard lock(mu_);
        if (frames_.empty()) return std::nullopt;
        auto f = std::move(frames_.front());
        frames_.pop_front();
        return f;
    }

    std::size_t pending() const override {
        std::lock_guard lock(mu_);
        return frames_.size();
    }

private:
    std::size_t capacity_;
    mutable std::mutex mu_;
    std::deque<std::string> frames_;
};

// Loopback TCP connection carrying newline-delimited frames. Both ends live
// in this object; the sender side counts frames so the receiver knows how
// many to wait for.
class TcpLoopbackLink : public Link {
public:
    explicit TcpLoopbackLink(std::uint16_t port = 0, std::size_t capacity = 4096) : capacity_(capacity) {
        listener_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (listener_ < 0) fail("socket");
        int one = 1;
        ::setsockopt(listener_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        addr.sin_port = htons(port);
        if (::bind(listener_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) fail("bind");
        if (::listen(listener_, 1) < 0) fail("listen");
        socklen_t len = sizeof addr;
        ::getsockname(listener_, reinterpret_cast<sockaddr*>(&addr), &len);
        port_ = ntohs(addr.sin_port);

        tx_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (tx_ < 0) fail("socket");
        if (::connect(tx_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) fail("connect");
        ::setsockopt(tx_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        rx_ = ::accept(listener_, nullptr, nullptr);
        if (rx_ < 0) fail("accept");
    }

    TcpLoopbackLink(const TcpLoopbackLink&) = delete;
    TcpLoopbackLink& operator=(const TcpLoopbackLink&) = delete;

    ~TcpLoopbackLink() override {
        for (int fd : {tx_, rx_, listener_})
            if (fd >= 0) ::close(fd);
    }

    std::uint16_t port() const noexcept { return port_; }

    void send(std::string frame) override {
        if (frame.find('\n') != std::string::npos) throw ProtocolError("frame contains a newline");
        if (sent_ - received_ >= capacity_)
            throw BackpressureError("link full (" + std::to_string(capacity_) + " frames)");
        frame.push_back('\n');
        std::size_t off = 0;
        while (off < frame.size()) {
            const auto n = ::send(tx_, frame.data() + off, frame.size() - off, MSG_NOSIGNAL);
            if (n < 0) {
                if (errno == EINTR) continue;
                fail("send");
            }
            off += static_cast<std::size_t>(n);
        }
        ++sent_;
    }

    std::optional<std::string> receive() override {
        if (received_ == sent_) return std::nullopt;
        for (;;) {
            if (auto nl = buf_.find('\n'); nl != std::string::npos) {
                std::string frame = buf_.substr(0, nl);
                buf_.erase(0, nl + 1);
                ++received_;
                return frame;
            }
            char chunk[8192];
            const auto n = ::recv(rx_, chunk, sizeof chunk, 0);
            if (n < 0 && errno == EINTR) continue;
            if (n <= 0) fail("recv");
            buf_.append(chunk, static_cast<std::size_t>(n));
        }
    }

    std::size_t pending() const override { return sent_ - received_; }

private:
    [[noreturn]] static void fail(const char* what) {
        throw ProtocolError(std::string("tcp loopback ") + what + ": " + std::strerror(errno));
    }

    std::size_t capacity_;
    int listener_ = -1, tx_ = -1, rx_ = -1;
    std::uint16_t port_ = 0;
    std::size_t sent_ = 0, received_ = 0;
    std::string buf_;
};

enum class TransportMode { InProcess, TcpLoopback };

inline std::unique_ptr<Link> make_link(TransportMode mode, std::uint16_t port = 0, std::size_t capacity = 4096) {
    if (mode == TransportMode::TcpLoopback) return std::make_unique<TcpLoopbackLink>(port, capacity);
    return std::make_unique<Inbox>(capacity);
}

// ---- A1 ----------------------------------------------------------------------

struct DeliveryReceipt {
    std::string digest;
    std::size_t bytes = 0;
};

inline DeliveryReceipt a1_publish(const A1Policy& policy, Link& ric_inbox) {
    auto frame = encode(policy);
    DeliveryReceipt r{digest_hex(frame), frame.size()};
    ric_inbox.send(std::move(frame));
    return r;
}

// ---- xApp ----------------------------------------------------------------------

// Absolute targets for each addressed cell; sequence numbers continue from
// the node's version. HOLD-only descriptors produce nothing.
inline std::vector<E2ControlMessage> xapp_translate(const RanSliceDescriptor& d, const NodeSliceConfig& current,
                                                    std::span<const CellId> cells,
                                                    const std::set<std::string>& known_slices) {
    if (!known_slices.contains(d.slice_id)) throw TranslationError("unknown slice '" + d.slice_id + "'");
    std::vector<E2ControlMessage> out;
    const bool hold_only = std::all_of(d.layer_descriptors.begin(), d.layer_descriptors.end(),
                                       [](const LayerDescriptor& l) { return l.direction == ScaleDirection::Hold; });
    if (hold_only) return out;
    for (const auto& cell : cells) {
        SliceParams p = current.get_or_zero(cell, d.slice_id);
        for (const auto& l : d.layer_descriptors) {
            if (l.direction == ScaleDirection::Hold) continue;
            if (l.parameter == SliceParameter::MaxActiveUes) p.max_active_ues = static_cast<long>(l.value);
            else p.prb_quota_pct = l.value;
        }
        out.push_back({E2Event::SetSliceParams, d.slice_id, cell, p, current.version(cell) + 1, d.timestamp_hour});
    }
    return out;
}

// Near-RT RIC xApp keeping its own per-cell sequence counters, so several
// messages for one cell can be in flight before the node applies any.
class XApp {
public:
    explicit XApp(std::set<std::string> known_slices) : known_(std::move(known_slices)) {}

    std::vector<E2ControlMessage> translate(const RanSliceDescriptor& d, const NodeSliceConfig& current,
                                            std::span<const CellId> cells) {
        auto msgs = xapp_translate(d, current, cells, known_);
        for (auto& m : msgs) {
            long& issued = issued_[m.cell];
            issued = std::max(issued, current.version(m.cell)) + 1;
            m.sequence_no = issued;
        }
        return msgs;
    }

    // Drains A1 frames, forwarding E2 frames. Returns frames forwarded.
    std::size_t drain(Link& a1_in, const NodeSliceConfig& node_view, Link& e2_out) {
        std::size_t n = 0;
        while (auto frame = a1_in.receive()) {
            const auto policy = decode_a1(*frame);
            for (const auto& m : translate(policy.descriptor, node_view, policy.scope)) {
                e2_out.send(encode(m));
                ++n;
            }
        }
        return n;
    }

private:
    std::set<std::string> known_;
    std::map<CellId, long> issued_;
};

// ---- E2 node ---------------------------------------------------------------------

struct E2ApplyResult {
    NodeSliceConfig config;
    bool stale = false;
    bool rescaled = false;
};

inline E2ApplyResult e2_apply(const E2ControlMessage& msg, const NodeSliceConfig& node) {
    validate(msg);
    E2ApplyResult r{node, false, false};
    if (msg.sequence_no <= node.version(msg.cell)) {
        r.stale = true;
        return r;
    }
    auto& cell = r.config.cells[msg.cell];
    cell.slices[msg.slice_id] = msg.state;
    cell.version = msg.sequence_no;
    std::vector<double> q;
    for (const auto& kv : cell.slices) q.push_back(kv.second.prb_quota_pct);
    if (rescale_to_cap(q)) {
        r.rescaled = true;
        std::size_t i = 0;
        for (auto& kv : cell.slices) kv.second.prb_quota_pct = q[i++];
    }
    return r;
}

struct E2DrainStats {
    std::size_t applied = 0;
    std::size_t stale = 0;
    std::size_t rescaled = 0;
};

inline E2DrainStats e2_drain(Link& e2_in, NodeSliceConfig& node) {
    E2DrainStats s;
    while (auto frame = e2_in.receive()) {
        auto r = e2_apply(decode_e2(*frame), node);
        if (r.stale) {
            ++s.stale;
            continue;
        }
        ++s.applied;
        s.rescaled += r.rescaled ? 1 : 0;
        node = std::move(r.config);
    }
    return s;
}

// ---- O2 / O-Cloud ------------------------------------------------------------------

inline CloudState o2_scale(const CloudScalingDirective& d, const CloudState& cloud) {
    d.validate();
    CloudState next = cloud;
    auto& s = next.slices[d.slice_id];
    if (!d.activate) s = CloudSliceState{};
    else s = {d.target_vm_count, d.target_cpu_units, d.target_mem_units, true};
    return next;
}

// O2 client side: ships directives to the O-Cloud inbox.
inline void o2_request(const CloudScalingDirective& d, Link& cloud_inbox) { cloud_inbox.send(encode(d)); }

// O2 server side.
inline std::size_t o2_drain(Link& cloud_inbox, CloudState& cloud) {
    std::size_t n = 0;
    while (auto frame = cloud_inbox.receive()) {
        cloud = o2_scale(decode_o2(*frame), cloud);
        ++n;
    }
    return n;
}

}  // namespace pcl
