#include <catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace speclog;
using namespace testsupport;

namespace {

Log random_log(std::mt19937_64& rng, const EngineConfig& cfg, std::size_t n) {
  const std::uint32_t hi = cfg.counter_tag() - 1;
  std::uniform_int_distribution<std::uint32_t> addr(cfg.min_code_addr, hi);
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_int_distribution<int> id(1, 255);
  std::uniform_int_distribution<int> count(2, kMaxRepeatCount);
  Log log;
  for (std::size_t i = 0; i < n; ++i) {
    switch (kind(rng)) {
      case 0:
        log.elements.push_back(raw_element(pair(addr(rng), addr(rng)), cfg.mode));
        break;
      case 1:
        log.elements.push_back(Symbol{static_cast<std::uint8_t>(id(rng))});
        break;
      default:
        log.elements.push_back(Symbol{static_cast<std::uint8_t>(id(rng))});
        log.elements.push_back(RepeatCount{static_cast<std::uint16_t>(count(rng))});
    }
  }
  return log;
}

}  // namespace

TEST_CASE("encode_raw produces one element per transfer") {
  auto pc = make_config(MatchMode::pair, 16);
  CHECK(encode_raw(std::vector<Transfer>{}, pc).empty());
  CHECK(encode_raw(std::vector<Transfer>{}, pc).size_bytes(pc) == 0);

  const std::vector<Transfer> one{pair(0x0400, 0x0500)};
  const auto log = encode_raw(one, pc);
  REQUIRE(log.elements.size() == 1);
  CHECK(log.elements[0] == LogElement{RawPair{pair(0x0400, 0x0500)}});
  CHECK(log.size_bytes(pc) == 4);

  auto dc = make_config(MatchMode::dest, 16);
  const std::vector<Transfer> two{pair(0x1234, 0x0500), pair(0x9999, 0x0600)};
  const auto d = encode_raw(two, dc);
  CHECK(d.elements == std::vector<LogElement>{RawDest{Address{0x0500}}, RawDest{Address{0x0600}}});
  CHECK(d.size_bytes(dc) == 4);
}

TEST_CASE("encode_raw rejects addresses wider than the configuration") {
  auto c = make_config(MatchMode::pair, 16);
  const std::vector<Transfer> bad{pair(0x0400, 0x10000)};
  CHECK_THROWS_MATCHES(encode_raw(bad, c), Error, Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == Errc::address_out_of_range;
                       }));
}

TEST_CASE("memory image words for symbols and counts") {
  auto c = make_config(MatchMode::pair, 16);
  CHECK(serialize_log(Log{{Symbol{1}}}, c, LogFormat::memory_image) == Bytes{0x01, 0x00});
  CHECK(serialize_log(Log{{Symbol{1}, RepeatCount{2}}}, c, LogFormat::memory_image) == Bytes{0x01, 0x00, 0x02, 0x80});
  CHECK(deserialize_log(Bytes{0x01, 0x00, 0x02, 0x80}, c, LogFormat::memory_image) == Log{{Symbol{1}, RepeatCount{2}}});

  auto w = make_config(MatchMode::pair, 32);
  CHECK(serialize_log(Log{{Symbol{7}, RepeatCount{3}}}, w, LogFormat::memory_image) ==
        Bytes{0x07, 0, 0, 0, 0x03, 0, 0, 0x80});
}

TEST_CASE("memory image refuses addresses that overlap other word classes") {
  auto c = make_config(MatchMode::pair, 16);
  auto code = [](const Error& e) { return e.code() == Errc::encoding_overlap; };
  CHECK_THROWS_MATCHES(serialize_log(Log{{RawPair{pair(0x0100, 0x0500)}}}, c, LogFormat::memory_image), Error,
                       Catch::Matchers::Predicate<Error>(code));
  CHECK_THROWS_MATCHES(serialize_log(Log{{RawPair{pair(0x0400, 0x8000)}}}, c, LogFormat::memory_image), Error,
                       Catch::Matchers::Predicate<Error>(code));
  // the tagged format has no such limits
  const Log low{{RawPair{pair(0x0001, 0xffff)}}};
  CHECK(deserialize_log(serialize_log(low, c, LogFormat::portable_tagged), c, LogFormat::portable_tagged) == low);
}

TEST_CASE("deserialize_log rejects malformed input") {
  auto c = make_config(MatchMode::pair, 16);
  auto malformed = [](const Error& e) { return e.code() == Errc::malformed_log; };
  // truncated word
  CHECK_THROWS_MATCHES(deserialize_log(Bytes{0x01}, c, LogFormat::memory_image), Error,
                       Catch::Matchers::Predicate<Error>(malformed));
  // count with no symbol before it
  CHECK_THROWS_MATCHES(deserialize_log(Bytes{0x02, 0x80}, c, LogFormat::memory_image), Error,
                       Catch::Matchers::Predicate<Error>(malformed));
  // unknown tag byte
  CHECK_THROWS_MATCHES(deserialize_log(Bytes{0x09, 0x00, 0x00}, c, LogFormat::portable_tagged), Error,
                       Catch::Matchers::Predicate<Error>(malformed));
}

TEST_CASE("log serialization round trips in every format, width and mode") {
  std::mt19937_64 rng(11);
  for (auto mode : {MatchMode::pair, MatchMode::dest})
    for (unsigned width : {16u, 32u})
      for (auto fmt : {LogFormat::memory_image, LogFormat::portable_tagged}) {
        const auto c = make_config(mode, width);
        for (int i = 0; i < 100; ++i) {
          const auto log = random_log(rng, c, i % 40);
          const auto bytes = serialize_log(log, c, fmt);
          CHECK(deserialize_log(bytes, c, fmt) == log);
          if (fmt == LogFormat::memory_image) CHECK(bytes.size() == log.size_bytes(c));
        }
      }
}

TEST_CASE("blockmem layout follows the header/pair word layout") {
  auto c = make_config(MatchMode::pair, 16);
  const std::vector<SubPathSpec> specs{{1, {pair(0x0400, 0x0500), pair(0x0502, 0x0600), pair(0x0602, 0x0700)}},
                                       {2, {pair(0x0800, 0x0900)}}};
  const auto img = serialize_blockmem(specs, c);
  CHECK(block_bases(specs, c.mode) == std::vector<std::size_t>{0, 7});
  CHECK(img.bytes.size() == (7 + 3) * 2);
  CHECK(img.bytes[0] == 0x03);  // len
  CHECK(img.bytes[1] == 0x01);  // id
  CHECK(img.bytes[14] == 0x01);
  CHECK(img.bytes[15] == 0x02);
  CHECK(deserialize_blockmem(img, c) == specs);

  CHECK(serialize_blockmem({}, c).bytes.empty());
}

TEST_CASE("dest-mode blockmem stores one word per entry") {
  auto c = make_config(MatchMode::dest, 16);
  const std::vector<SubPathSpec> specs{{4, {dest_only(0x0500), dest_only(0x0600)}}};
  const auto img = serialize_blockmem(specs, c);
  CHECK(img.bytes == Bytes{0x02, 0x04, 0x00, 0x05, 0x00, 0x06});
  CHECK(deserialize_blockmem(img, c) == specs);
}

TEST_CASE("blockmem errors") {
  auto c = make_config(MatchMode::pair, 16);
  auto with = [](Errc code) {
    return Catch::Matchers::Predicate<Error>([code](const Error& e) { return e.code() == code; });
  };
  CHECK_THROWS_MATCHES(serialize_blockmem({{1, {pair(0x400, 0x500)}}, {1, {pair(0x400, 0x500)}}}, c), Error,
                       with(Errc::duplicate_id));
  SubPathSpec long_spec{1, std::vector<Transfer>(256, pair(0x400, 0x500))};
  CHECK_THROWS_MATCHES(serialize_blockmem({long_spec}, c), Error, with(Errc::len_overflow));
  c.blockmem_capacity_bytes = 8;
  CHECK_THROWS_MATCHES(serialize_blockmem({{1, {pair(0x400, 0x500), pair(0x400, 0x500)}}}, c), Error,
                       with(Errc::capacity_exceeded));
  c.blockmem_capacity_bytes = 4096;
  CHECK_THROWS_MATCHES(deserialize_blockmem(Bytes{0x00, 0x01}, c), Error, with(Errc::malformed_blockmem));
  CHECK_THROWS_MATCHES(deserialize_blockmem(Bytes{0x02, 0x01, 0x00, 0x04}, c), Error, with(Errc::malformed_blockmem));
}

TEST_CASE("blockmem round trips on random spec sets") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto c = make_config(i % 2 ? MatchMode::pair : MatchMode::dest, i % 4 < 2 ? 16 : 32);
    const auto alpha = alphabet(rng, c, 12);
    const auto specs = random_specs(rng, alpha, 1 + i % 8, 16);
    const auto img = serialize_blockmem(specs, c);
    CHECK(img.bytes.size() == blockmem_bytes(specs, c));
    CHECK(deserialize_blockmem(img, c) == specs);
  }
}

TEST_CASE("spec files round trip") {
  std::mt19937_64 rng(9);
  for (auto mode : {MatchMode::pair, MatchMode::dest}) {
    const auto c = make_config(mode, 32);
    SpecSet set{mode, 32, random_specs(rng, alphabet(rng, c, 6), 5, 8)};
    const auto parsed = parse_spec_set(write_spec_set(set));
    CHECK(parsed.mode == mode);
    CHECK(parsed.addr_width == 32u);
    CHECK(parsed.specs == set.specs);
  }
  CHECK_THROWS_AS(parse_spec_set("{\"mode\":\"pair\",\"specs\":[{\"id\":1,\"entries\":[\"zz\"]}]}"), Error);
}

TEST_CASE("config validation") {
  EngineConfig c;
  CHECK_NOTHROW(c.validate());
  c.min_code_addr = 0xFF;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.addr_width = 24;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.max_sub_paths = 9;
  CHECK_THROWS_AS(c.validate(), Error);
}
