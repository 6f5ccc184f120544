#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "speclog/encoding.hpp"

namespace speclog {

/// Serialized speculation store. Each block is a header word `(id << 8) | len`
/// followed by `len` (src, dest) word pairs, or `len` dest words in
/// destination-only mode.
struct BlockMemImage {
  Bytes bytes;
  std::size_t capacity_bytes = 0;

  friend bool operator==(const BlockMemImage&, const BlockMemImage&) = default;
};

inline std::size_t block_words(std::size_t len, MatchMode mode) {
  return 1 + (mode == MatchMode::pair ? 2 * len : len);
}

inline std::size_t block_bytes(std::size_t len, const EngineConfig& cfg) {
  return block_words(len, cfg.mode) * cfg.word_bytes();
}

inline std::size_t blockmem_bytes(const std::vector<SubPathSpec>& specs, const EngineConfig& cfg) {
  std::size_t n = 0;
  for (const auto& s : specs) n += block_bytes(s.len(), cfg);
  return n;
}

/// Word offset of every block inside BlockMem.
inline std::vector<std::size_t> block_bases(const std::vector<SubPathSpec>& specs, MatchMode mode) {
  std::vector<std::size_t> bases;
  std::size_t base = 0;
  for (const auto& s : specs) {
    bases.push_back(base);
    base += block_words(s.len(), mode);
  }
  return bases;
}

inline BlockMemImage serialize_blockmem(const std::vector<SubPathSpec>& specs, const EngineConfig& cfg) {
  validate_specs(specs, cfg);
  const auto total = blockmem_bytes(specs, cfg);
  if (total > cfg.blockmem_capacity_bytes)
    throw Error(Errc::capacity_exceeded, std::to_string(total) + " bytes exceed BlockMem capacity of " +
                                             std::to_string(cfg.blockmem_capacity_bytes));
  BlockMemImage img;
  img.capacity_bytes = cfg.blockmem_capacity_bytes;
  img.bytes.reserve(total);
  const auto wb = cfg.word_bytes();
  for (const auto& s : specs) {
    detail::put_word(img.bytes, (std::uint32_t{s.id} << 8) | static_cast<std::uint32_t>(s.len()), wb);
    for (const auto& t : s.entries) {
      if (cfg.mode == MatchMode::pair) detail::put_word(img.bytes, t.src.value, wb);
      detail::put_word(img.bytes, t.dest.value, wb);
    }
  }
  return img;
}

inline std::vector<SubPathSpec> deserialize_blockmem(std::span<const std::uint8_t> bytes, const EngineConfig& cfg) {
  const auto wb = cfg.word_bytes();
  if (bytes.size() % wb != 0) throw Error(Errc::malformed_blockmem, "image is not a whole number of words");
  if (bytes.size() > cfg.blockmem_capacity_bytes) throw Error(Errc::capacity_exceeded, "image exceeds capacity");
  std::vector<SubPathSpec> specs;
  std::size_t pos = 0;
  auto word = [&] {
    if (pos + wb > bytes.size()) throw Error(Errc::malformed_blockmem, "truncated block");
    const auto w = detail::get_word(bytes, pos, wb);
    pos += wb;
    return w;
  };
  while (pos < bytes.size()) {
    const auto header = word();
    if (header > 0xFFFF) throw Error(Errc::malformed_blockmem, "header word has bits above 15");
    SubPathSpec s;
    s.id = static_cast<std::uint8_t>(header >> 8);
    const std::size_t len = header & 0xFF;
    if (len == 0) throw Error(Errc::malformed_blockmem, "block of length 0");
    if (s.id == 0) throw Error(Errc::malformed_blockmem, "block id 0");
    s.entries.reserve(len);
    for (std::size_t i = 0; i < len; ++i) {
      Transfer t;
      if (cfg.mode == MatchMode::pair) t.src = Address{word()};
      t.dest = Address{word()};
      s.entries.push_back(t);
    }
    specs.push_back(std::move(s));
  }
  validate_specs(specs, cfg);
  return specs;
}

inline std::vector<SubPathSpec> deserialize_blockmem(const BlockMemImage& img, const EngineConfig& cfg) {
  return deserialize_blockmem(std::span<const std::uint8_t>(img.bytes), cfg);
}

}  // namespace speclog
