// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <limits>
#include <set>
#include <sstream>
#include <string>

#include "gencomm/errors.hpp"
#include "gencomm/random.hpp"
#include "gencomm/sidechannel/arith.hpp"
#include "gencomm/sidechannel/bits.hpp"
#include "gencomm/sidechannel/ldpc.hpp"
#include "gencomm/sidechannel/prompt_link.hpp"

using namespace gencomm;
using namespace gencomm::sidechannel;

namespace {

std::string roundtrip(const std::string& s) {
  const auto out = ac_decode(ac_encode(s));
  return std::string(out.begin(), out.end());
}

const LdpcCode& shared_code() {
  static const LdpcCode code = ldpc_make(1024, 77);
  return code;
}

}  // namespace

TEST_CASE("bit packing is MSB first with zero padding") {
  const BitString bits{1, 0, 0, 0, 0, 0, 0, 1, 1, 1};
  const auto bytes = pack_bits(bits);
  CHECK(bytes == std::vector<std::uint8_t>{0x81, 0xC0});
  const auto back = unpack_bytes(bytes);
  CHECK(back.size() == 16);
  CHECK(std::equal(bits.begin(), bits.end(), back.begin()));
}

TEST_CASE("CRC-32 check value") {
  const std::string s = "123456789";
  CHECK(crc32(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size())) == 0xCBF43926u);
}

TEST_CASE("prompt frame layout") {
  PromptFrame f{{'h', 'i'}};
  auto bytes = f.serialize();
  CHECK(bytes.size() == 2 + 2 + 4);
  CHECK(bytes[0] == 0);
  CHECK(bytes[1] == 2);
  bytes.push_back(0);  // padding is ignored
  const auto parsed = PromptFrame::parse(bytes);
  REQUIRE(parsed.has_value());
  CHECK(parsed->payload == f.payload);
  bytes[2] ^= 0x01;
  CHECK_FALSE(PromptFrame::parse(bytes).has_value());
  CHECK_FALSE(PromptFrame::parse(std::vector<std::uint8_t>{0, 9, 1}).has_value());
}

TEST_CASE("adaptive model bookkeeping") {
  AdaptiveByteModel m;
  CHECK(m.total() == 257);
  CHECK(m.cum_low(0) == 0);
  CHECK(m.cum_low(256) == 256);
  m.update('a');
  CHECK(m.frequency('a') == 33);
  CHECK(m.total() == 289);
  CHECK(m.find(m.cum_low('a')) == 'a');
  CHECK(m.find(m.cum_low('a') + 32) == 'a');
  CHECK(m.find(m.cum_low('a') + 33) == 'a' + 1);
  for (int i = 0; i < 3000; ++i) m.update('b');
  CHECK(m.total() < AdaptiveByteModel::kMaxTotal);
}

TEST_CASE("arithmetic coding round trips") {
  CHECK(roundtrip("") == "");
  CHECK(roundtrip("a") == "a");
  CHECK(roundtrip(std::string(5000, 'z')) == std::string(5000, 'z'));
  const std::string text = "a photograph of a harbour at sunset with fishing boats and gulls";
  CHECK(roundtrip(text) == text);
  RandomStream rng(3);
  for (int i = 0; i < 500; ++i) {
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(rng.uniform_int(0, 400)));
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
    CHECK(ac_decode(ac_encode(bytes)) == bytes);
    CHECK(ac_decode_bytes(pack_bits(ac_encode(bytes))) == bytes);
  }
}

TEST_CASE("compression bounds") {
  const std::string text(2000, 'e');
  CHECK(ac_encode(text).size() < 8 * text.size() / 10);
  // Incompressible input never costs more than the stored-mode header.
  RandomStream rng(4);
  std::vector<std::uint8_t> noise(300);
  for (auto& b : noise) b = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  const auto bits = ac_encode(noise);
  CHECK(bits.size() <= 1 + 16 + 8 * noise.size());
  CHECK(bits.front() == 1);
  CHECK(ac_encode(text).front() == 0);
  CHECK_THROWS_AS(ac_encode(std::string(70000, 'x')), FrameError);
}

TEST_CASE("corrupted streams raise decode errors and never crash") {
  auto bits = ac_encode(std::string("hello world, hello world"));
  BitString truncated(bits.begin(), bits.begin() + static_cast<long>(bits.size() / 2));
  CHECK_THROWS_AS(ac_decode(truncated), DecodeError);
  CHECK_THROWS_AS(ac_decode(BitString{}), DecodeError);
  RandomStream rng(5);
  int errors = 0;
  for (int i = 0; i < 2000; ++i) {
    BitString junk(static_cast<std::size_t>(rng.uniform_int(1, 200)));
    for (auto& b : junk) b = static_cast<std::uint8_t>(rng.uniform_int(0, 1));
    try {
      ac_decode(junk);
    } catch (const DecodeError&) {
      ++errors;
    }
  }
  CHECK(errors > 0);
}

TEST_CASE("regular (3,6) construction") {
  const auto& code = shared_code();
  CHECK(code.n() == 1024);
  CHECK(code.m() == 512);
  CHECK(code.k() == 512);
  CHECK(code.rate() == 0.5);
  for (const auto& col : code.columns()) {
    CHECK(col.size() == 3);
    CHECK(std::set<int>(col.begin(), col.end()).size() == 3);
  }
  for (const auto& row : code.rows()) CHECK(row.size() == 6);
  CHECK(code.count_four_cycles() == 0);
  CHECK_THROWS_AS(ldpc_make(13, 1), ConfigError);
  const auto again = ldpc_make(1024, 77);
  CHECK(again.columns() == code.columns());
}

TEST_CASE("encoding yields codewords carrying the information bits") {
  const auto& code = shared_code();
  RandomStream rng(6);
  for (int i = 0; i < 20; ++i) {
    BitString info(static_cast<std::size_t>(code.k()));
    for (auto& b : info) b = static_cast<std::uint8_t>(rng.uniform_int(0, 1));
    const auto cw = ldpc_encode(code, info);
    CHECK(code.is_codeword(cw));
    CHECK(ldpc_extract_info(code, cw) == info);
  }
}

TEST_CASE("belief propagation") {
  const auto& code = shared_code();
  RandomStream rng(7);
  BitString info(static_cast<std::size_t>(code.k()));
  for (auto& b : info) b = static_cast<std::uint8_t>(rng.uniform_int(0, 1));
  const auto cw = ldpc_encode(code, info);
  std::vector<double> llr(cw.size());
  for (std::size_t i = 0; i < cw.size(); ++i) llr[i] = cw[i] ? -4.0 : 4.0;
  const auto clean = ldpc_decode(code, llr);
  CHECK(clean.converged);
  CHECK(clean.bits == cw);
  // A handful of confidently wrong bits are corrected.
  for (int i = 0; i < 8; ++i) llr[static_cast<std::size_t>(i * 97)] *= -0.5;
  const auto fixed = ldpc_decode(code, llr);
  CHECK(fixed.converged);
  CHECK(fixed.bits == cw);
  // Infinite LLRs are clipped rather than producing NaN.
  std::vector<double> inf(cw.size());
  for (std::size_t i = 0; i < cw.size(); ++i) {
    inf[i] = cw[i] ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  }
  CHECK(ldpc_decode(code, inf).bits == cw);
}

TEST_CASE("alist round trip") {
  const auto code = ldpc_make(96, 3);
  std::stringstream ss;
  code.write_alist(ss);
  const auto back = LdpcCode::read_alist(ss);
  CHECK(back.columns() == code.columns());
  CHECK(back.rows() == code.rows());
  std::istringstream first(([&] { std::stringstream s; code.write_alist(s); return s.str(); })());
  int n = 0, m = 0;
  first >> n >> m;
  CHECK(n == 96);
  CHECK(m == 48);
}

TEST_CASE("BER falls with Eb/N0") {
  const auto& code = shared_code();
  RandomStream rng(8);
  const auto low = simulate_bpsk_awgn(code, 0.0, 20000, 50, rng);
  const auto high = simulate_bpsk_awgn(code, 3.0, 20000, 50, rng);
  CHECK(low.info_bits >= 20000);
  CHECK(low.ber() > high.ber());
}

TEST_CASE("prompt side channel accounting") {
  const auto& code = shared_code();
  RandomStream rng(9);
  const std::string prompt = "class:3";
  const auto rep = send_prompt(prompt, std::numeric_limits<double>::infinity(), code, rng);
  REQUIRE(rep.ok());
  CHECK(*rep.decoded == prompt);
  CHECK(rep.crc_ok);
  CHECK(rep.codewords == 1);
  CHECK(rep.coded_bits == 1024);
  CHECK(rep.k_o == 512);
  CHECK(channel_uses(1025) == 513);

  std::string longer(200, 'q');
  const auto big = send_prompt(longer, 8.0, code, rng);
  REQUIRE(big.ok());
  CHECK(*big.decoded == longer);

  const auto lost = send_prompt(prompt, -10.0, code, rng);
  CHECK_FALSE(lost.ok());
}
