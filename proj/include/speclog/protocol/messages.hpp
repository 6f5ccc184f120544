#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "speclog/blockmem.hpp"
#include "speclog/protocol/hmac.hpp"

// Wire format. Every message travels as a frame: u32 little-endian body
// length, then the body. Bodies lay out their fields in fixed order with
// little-endian integers and end with a 32-byte HMAC-SHA256 tag.
//
//   Request: u8 type=0x01 | chal[16] | u32 blockmem_len | blockmem |
//            u8 mode | u8 width | u32 slice_size | u8 retry | u32 min_code_addr | mac[32]
//            mac = HMAC(key, body without mac)
//
//   Slice:   u8 type=0x02 | u32 seq | u8 is_final | u32 payload_len | payload |
//            image_digest[32] | mac[32]
//            mac = HMAC(key, chal || body without mac)

namespace speclog::protocol {

enum class MessageType : std::uint8_t { request = 0x01, slice = 0x02 };

struct ConfigEcho {
  MatchMode mode = MatchMode::pair;
  std::uint8_t addr_width = 16;
  std::uint32_t slice_size_bytes = 256;
  bool retry_on_mismatch = false;
  std::uint32_t min_code_addr = 0x0400;

  static ConfigEcho from(const EngineConfig& c) {
    return {c.mode, static_cast<std::uint8_t>(c.addr_width), static_cast<std::uint32_t>(c.slice_size_bytes),
            c.retry_on_mismatch, c.min_code_addr};
  }
  EngineConfig apply(EngineConfig base) const {
    base.mode = mode;
    base.addr_width = addr_width;
    base.slice_size_bytes = slice_size_bytes;
    base.retry_on_mismatch = retry_on_mismatch;
    base.min_code_addr = min_code_addr;
    return base;
  }
  friend bool operator==(const ConfigEcho&, const ConfigEcho&) = default;
};

struct Request {
  Challenge chal{};
  Bytes blockmem;  // empty: keep the currently installed speculations
  ConfigEcho config;
  Tag mac{};
  friend bool operator==(const Request&, const Request&) = default;
};

struct EvidenceSlice {
  std::uint32_t seq = 0;
  bool is_final = false;
  Bytes payload;  // memory-image serialization of one compressed slice
  Digest image_digest{};
  Tag mac{};
  friend bool operator==(const EvidenceSlice&, const EvidenceSlice&) = default;
};

namespace wire {

inline void put_u8(Bytes& b, std::uint8_t v) { b.push_back(v); }
inline void put_u32(Bytes& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void put_bytes(Bytes& b, std::span<const std::uint8_t> s) { b.insert(b.end(), s.begin(), s.end()); }

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  std::uint8_t u8() { return take(1)[0]; }
  std::uint32_t u32() {
    const auto s = take(4);
    return std::uint32_t{s[0]} | std::uint32_t{s[1]} << 8 | std::uint32_t{s[2]} << 16 | std::uint32_t{s[3]} << 24;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    if (n > in_.size() - pos_) throw Error(Errc::malformed_message, "message truncated");
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  template <std::size_t N>
  std::array<std::uint8_t, N> array() {
    std::array<std::uint8_t, N> a{};
    const auto s = take(N);
    std::copy(s.begin(), s.end(), a.begin());
    return a;
  }
  std::size_t consumed() const { return pos_; }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace wire

/// Request body up to, not including, the tag.
inline Bytes signed_part(const Request& r) {
  Bytes b;
  wire::put_u8(b, static_cast<std::uint8_t>(MessageType::request));
  wire::put_bytes(b, r.chal);
  wire::put_u32(b, static_cast<std::uint32_t>(r.blockmem.size()));
  wire::put_bytes(b, r.blockmem);
  wire::put_u8(b, static_cast<std::uint8_t>(r.config.mode));
  wire::put_u8(b, r.config.addr_width);
  wire::put_u32(b, r.config.slice_size_bytes);
  wire::put_u8(b, r.config.retry_on_mismatch ? 1 : 0);
  wire::put_u32(b, r.config.min_code_addr);
  return b;
}

/// Slice body up to, not including, the tag.
inline Bytes signed_part(const EvidenceSlice& s) {
  Bytes b;
  wire::put_u8(b, static_cast<std::uint8_t>(MessageType::slice));
  wire::put_u32(b, s.seq);
  wire::put_u8(b, s.is_final ? 1 : 0);
  wire::put_u32(b, static_cast<std::uint32_t>(s.payload.size()));
  wire::put_bytes(b, s.payload);
  wire::put_bytes(b, s.image_digest);
  return b;
}

inline Tag compute_mac(const Key& key, const Request& r) {
  const auto body = signed_part(r);
  return hmac_sha256(key, {std::span<const std::uint8_t>(body)});
}

inline Tag compute_mac(const Key& key, const Challenge& chal, const EvidenceSlice& s) {
  const auto body = signed_part(s);
  return hmac_sha256(key, {std::span<const std::uint8_t>(chal), std::span<const std::uint8_t>(body)});
}

template <typename Message>
Bytes encode_frame(const Message& m) {
  auto body = signed_part(m);
  wire::put_bytes(body, m.mac);
  Bytes frame;
  wire::put_u32(frame, static_cast<std::uint32_t>(body.size()));
  wire::put_bytes(frame, body);
  return frame;
}

using Message = std::variant<Request, EvidenceSlice>;

inline Message decode_frame(std::span<const std::uint8_t> frame) {
  wire::Reader outer(frame);
  const auto len = outer.u32();
  const auto body = outer.take(len);
  if (!outer.done()) throw Error(Errc::malformed_message, "trailing bytes after frame");
  wire::Reader r(body);
  const auto type = r.u8();
  if (type == static_cast<std::uint8_t>(MessageType::request)) {
    Request q;
    q.chal = r.array<16>();
    const auto bm = r.take(r.u32());
    q.blockmem.assign(bm.begin(), bm.end());
    const auto mode = r.u8();
    if (mode > 1) throw Error(Errc::malformed_message, "bad mode byte");
    q.config.mode = static_cast<MatchMode>(mode);
    q.config.addr_width = r.u8();
    q.config.slice_size_bytes = r.u32();
    const auto retry = r.u8();
    if (retry > 1) throw Error(Errc::malformed_message, "bad retry flag");
    q.config.retry_on_mismatch = retry == 1;
    q.config.min_code_addr = r.u32();
    q.mac = r.array<32>();
    if (!r.done()) throw Error(Errc::malformed_message, "trailing bytes in request");
    return q;
  }
  if (type == static_cast<std::uint8_t>(MessageType::slice)) {
    EvidenceSlice s;
    s.seq = r.u32();
    const auto fin = r.u8();
    if (fin > 1) throw Error(Errc::malformed_message, "bad final flag");
    s.is_final = fin == 1;
    const auto p = r.take(r.u32());
    s.payload.assign(p.begin(), p.end());
    s.image_digest = r.array<32>();
    s.mac = r.array<32>();
    if (!r.done()) throw Error(Errc::malformed_message, "trailing bytes in slice");
    return s;
  }
  throw Error(Errc::malformed_message, "unknown message type " + std::to_string(type));
}

/// Builds an authenticated speculation request. An empty spec list asks the
/// prover to keep its current BlockMem.
inline Request make_request(const Key& key, const Challenge& chal, const std::vector<SubPathSpec>& specs,
                            const EngineConfig& cfg) {
  Request r;
  r.chal = chal;
  if (!specs.empty()) r.blockmem = serialize_blockmem(specs, cfg).bytes;
  r.config = ConfigEcho::from(cfg);
  r.mac = compute_mac(key, r);
  return r;
}

}  // namespace speclog::protocol
