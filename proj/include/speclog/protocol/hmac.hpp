#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <span>
#include <string>

#include <openssl/core_names.h>
#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/params.h>

#include "speclog/error.hpp"
#include "speclog/types.hpp"

namespace speclog::protocol {

using Tag = std::array<std::uint8_t, 32>;
using Challenge = std::array<std::uint8_t, 16>;
using Digest = std::array<std::uint8_t, 32>;

/// 256-bit shared secret. Deliberately has no serializer.
class Key {
 public:
  Key() = default;
  explicit Key(const std::array<std::uint8_t, 32>& bytes) : bytes_(bytes) {}

  /// Reads 32 raw bytes or 64 hex characters (surrounding whitespace ignored).
  static Key from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot open key file " + path);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::array<std::uint8_t, 32> k{};
    if (data.size() == 32) {
      std::copy(data.begin(), data.end(), k.begin());
      return Key(k);
    }
    const auto first = data.find_first_not_of(" \t\r\n");
    const auto last = data.find_last_not_of(" \t\r\n");
    if (first == std::string::npos || last - first + 1 != 64)
      throw Error(Errc::parse_error, "key file must hold 32 raw bytes or 64 hex digits");
    for (std::size_t i = 0; i < 32; ++i) {
      std::uint32_t v = 0;
      if (!parse_hex(std::string_view(data).substr(first + 2 * i, 2), v))
        throw Error(Errc::parse_error, "key file has a non-hex digit");
      k[i] = static_cast<std::uint8_t>(v);
    }
    return Key(k);
  }

  std::span<const std::uint8_t> bytes() const { return bytes_; }

 private:
  std::array<std::uint8_t, 32> bytes_{};
};

/// HMAC-SHA256 over the concatenation of `parts`.
inline Tag hmac_sha256(const Key& key, std::initializer_list<std::span<const std::uint8_t>> parts) {
  EVP_MAC* mac = EVP_MAC_fetch(nullptr, "HMAC", nullptr);
  EVP_MAC_CTX* ctx = mac ? EVP_MAC_CTX_new(mac) : nullptr;
  Tag tag{};
  std::size_t len = 0;
  char digest[] = "SHA256";
  const OSSL_PARAM params[] = {OSSL_PARAM_construct_utf8_string(OSSL_MAC_PARAM_DIGEST, digest, 0),
                               OSSL_PARAM_construct_end()};
  const auto k = key.bytes();
  bool ok = ctx && EVP_MAC_init(ctx, k.data(), k.size(), params) == 1;
  for (auto p : parts) ok = ok && EVP_MAC_update(ctx, p.data(), p.size()) == 1;
  ok = ok && EVP_MAC_final(ctx, tag.data(), &len, tag.size()) == 1;
  EVP_MAC_CTX_free(ctx);
  EVP_MAC_free(mac);
  if (!ok || len != tag.size()) throw Error(Errc::auth_error, "HMAC computation failed");
  return tag;
}

/// Plain SHA-256, used for program image digests.
inline Digest sha256(std::span<const std::uint8_t> data) {
  Digest d{};
  unsigned len = 0;
  if (EVP_Digest(data.data(), data.size(), d.data(), &len, EVP_sha256(), nullptr) != 1 || len != d.size())
    throw Error(Errc::auth_error, "SHA-256 computation failed");
  return d;
}

inline bool tags_equal(const Tag& a, std::span<const std::uint8_t> b) {
  return b.size() == a.size() && CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

}  // namespace speclog::protocol
