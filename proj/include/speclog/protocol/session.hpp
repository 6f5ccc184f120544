#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "speclog/cfg.hpp"
#include "speclog/engine.hpp"
#include "speclog/protocol/messages.hpp"

namespace speclog::protocol {

// -- verifier-side path policy ------------------------------------------------

/// Index of the first transfer that is not an edge of `cfg`, if any. Each
/// edge stands for the transfer (source block end, target block start).
inline std::optional<std::size_t> validate_against_cfg(const RawLog& log, const Cfg& cfg, MatchMode mode) {
  std::set<Transfer> allowed;
  for (const auto& e : cfg.edges) allowed.insert(normalize(cfg.transfer_of(e), mode));
  for (std::size_t i = 0; i < log.elements.size(); ++i) {
    const auto& el = log.elements[i];
    if (!is_raw(el) || !allowed.count(normalize(raw_transfer(el), mode))) return i;
  }
  return std::nullopt;
}

// -- prover ----------------------------------------------------------------------

/// Device side: authenticates requests, keeps BlockMem, and turns a trace into
/// MAC-ed evidence slices bound to the current challenge.
class Prover {
 public:
  explicit Prover(Key key) : key_(key) {}

  /// Installs the request's speculations. On any failure nothing changes.
  void handle_request(const Request& request) {
    if (!tags_equal(compute_mac(key_, request), request.mac)) throw Error(Errc::auth_error, "bad_mac");
    EngineConfig cfg = request.config.apply(config_);
    cfg.validate();
    std::vector<SubPathSpec> specs = installed_;
    if (!request.blockmem.empty()) specs = deserialize_blockmem(request.blockmem, cfg);
    if (specs.size() > cfg.max_sub_paths) throw Error(Errc::too_many_specs, "request exceeds BlockMem slots");
    validate_specs(specs, cfg);
    installed_ = std::move(specs);
    config_ = cfg;
    chal_ = request.chal;
  }

  void handle_frame(std::span<const std::uint8_t> frame) {
    auto msg = decode_frame(frame);
    const auto* req = std::get_if<Request>(&msg);
    if (!req) throw Error(Errc::malformed_message, "prover expects a request");
    handle_request(*req);
  }

  /// Runs the attested execution. The final slice carries `image_digest`.
  std::vector<EvidenceSlice> run(std::span<const Transfer> trace, const Digest& image_digest = {}) {
    if (!chal_) throw Error(Errc::auth_error, "no authenticated request installed");
    const auto logs = slice_compress(trace, installed_, config_);
    std::vector<EvidenceSlice> out;
    out.reserve(logs.size());
    for (std::size_t i = 0; i < logs.size(); ++i) {
      EvidenceSlice s;
      s.seq = static_cast<std::uint32_t>(i);
      s.is_final = i + 1 == logs.size();
      s.payload = serialize_log(logs[i], config_, LogFormat::memory_image);
      if (s.is_final) s.image_digest = image_digest;
      s.mac = compute_mac(key_, *chal_, s);
      out.push_back(std::move(s));
    }
    chal_.reset();
    return out;
  }

  const std::vector<SubPathSpec>& installed() const { return installed_; }
  const EngineConfig& config() const { return config_; }

 private:
  Key key_;
  EngineConfig config_;
  std::vector<SubPathSpec> installed_;
  std::optional<Challenge> chal_;
};

// -- verifier ----------------------------------------------------------------------

enum class SliceReject { bad_mac, bad_seq, after_final, malformed, no_session };

inline std::string_view to_string(SliceReject r) {
  switch (r) {
    case SliceReject::bad_mac: return "bad_mac";
    case SliceReject::bad_seq: return "bad_seq";
    case SliceReject::after_final: return "after_final";
    case SliceReject::malformed: return "malformed";
    case SliceReject::no_session: return "no_session";
  }
  return "malformed";
}

struct SliceCheck {
  std::optional<SliceReject> reject;
  bool accepted() const { return !reject; }
};

enum class Outcome { authentic_and_valid, authentic_but_invalid_path, auth_failure, incomplete };

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::authentic_and_valid: return "authentic_and_valid";
    case Outcome::authentic_but_invalid_path: return "authentic_but_invalid_path";
    case Outcome::auth_failure: return "auth_failure";
    case Outcome::incomplete: return "incomplete";
  }
  return "incomplete";
}

struct Verdict {
  Outcome outcome = Outcome::incomplete;
  std::optional<std::size_t> violation_index;
  std::string reason;
  RawLog trace;  // expanded evidence, when authentic
  std::size_t slices = 0;
};

/// Remote side: issues challenges, checks every slice as it arrives, then
/// reassembles and audits the full trace.
class Verifier {
 public:
  Verifier(Key key, EngineConfig cfg) : key_(key), config_(cfg) { config_.validate(); }

  /// Opens a session under `chal`. Non-empty `specs` replace the prover's
  /// BlockMem; empty keeps what was installed before.
  Request open_session(const Challenge& chal, const std::vector<SubPathSpec>& specs = {}) {
    auto request = make_request(key_, chal, specs, config_);
    if (!specs.empty()) installed_ = specs;
    chal_ = chal;
    accepted_.clear();
    next_seq_ = 0;
    finalized_ = false;
    first_reject_.reset();
    return request;
  }

  SliceCheck verify_slice(const EvidenceSlice& s) {
    SliceCheck c = check(s);
    if (c.accepted()) {
      accepted_.push_back(s);
      ++next_seq_;
      finalized_ = s.is_final;
    } else if (!first_reject_) {
      first_reject_ = c.reject;
    }
    return c;
  }

  SliceCheck receive_frame(std::span<const std::uint8_t> frame) {
    try {
      auto msg = decode_frame(frame);
      if (const auto* s = std::get_if<EvidenceSlice>(&msg)) return verify_slice(*s);
    } catch (const Error&) {
    }
    if (!first_reject_) first_reject_ = SliceReject::malformed;
    return {SliceReject::malformed};
  }

  /// Final verdict. With `cfg`, every expanded transfer must be a CFG edge;
  /// with `expected_digest`, the final slice must attest that image.
  Verdict assemble(const Cfg* cfg = nullptr, const std::optional<Digest>& expected_digest = std::nullopt) const {
    Verdict v;
    v.slices = accepted_.size();
    if (first_reject_) {
      v.outcome = Outcome::auth_failure;
      v.reason = std::string(to_string(*first_reject_));
      return v;
    }
    if (!finalized_) {
      v.outcome = Outcome::incomplete;
      v.reason = "missing final slice";
      return v;
    }
    if (expected_digest && accepted_.back().image_digest != *expected_digest) {
      v.outcome = Outcome::auth_failure;
      v.reason = "image_digest";
      return v;
    }
    try {
      for (const auto& s : accepted_) {
        const auto part = expand(deserialize_log(s.payload, config_, LogFormat::memory_image), installed_, config_);
        v.trace.elements.insert(v.trace.elements.end(), part.elements.begin(), part.elements.end());
      }
    } catch (const Error& e) {
      v.outcome = Outcome::auth_failure;
      v.reason = e.what();
      v.trace = {};
      return v;
    }
    if (cfg) {
      if (auto bad = validate_against_cfg(v.trace, *cfg, config_.mode)) {
        v.outcome = Outcome::authentic_but_invalid_path;
        v.violation_index = bad;
        v.reason = "transfer " + std::to_string(*bad) + " is not a CFG edge";
        return v;
      }
    }
    v.outcome = Outcome::authentic_and_valid;
    return v;
  }

  const std::vector<SubPathSpec>& installed() const { return installed_; }
  const EngineConfig& config() const { return config_; }
  bool finalized() const { return finalized_; }

 private:
  SliceCheck check(const EvidenceSlice& s) const {
    if (!chal_) return {SliceReject::no_session};
    if (finalized_) return {SliceReject::after_final};
    if (!tags_equal(compute_mac(key_, *chal_, s), s.mac)) return {SliceReject::bad_mac};
    if (s.seq != next_seq_) return {SliceReject::bad_seq};
    return {};
  }

  Key key_;
  EngineConfig config_;
  std::vector<SubPathSpec> installed_;
  std::optional<Challenge> chal_;
  std::vector<EvidenceSlice> accepted_;
  std::uint32_t next_seq_ = 0;
  bool finalized_ = false;
  std::optional<SliceReject> first_reject_;
};

}  // namespace speclog::protocol
