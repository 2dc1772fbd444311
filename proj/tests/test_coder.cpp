#include <catch_amalgamated.hpp>

#include "hdralign/coder.hpp"
#include "test_support.hpp"

using namespace hdralign;
using testsupport::random_image;

namespace {

BitPlanes planes_from_bits(const std::array<uint8_t, 8>& bits) {
  BitPlanes p(1, 1, 8);
  for (int j = 0; j < 8; ++j) p.set(j, 0, 0, bits[j]);
  return p;
}

BitPlanes random_planes(int w, int h, int j, uint32_t seed) {
  std::mt19937 rng(seed);
  std::bernoulli_distribution coin(0.5);
  BitPlanes p(w, h, j);
  for (auto& plane : p.planes)
    for (auto& b : plane) b = coin(rng) ? 1 : 0;
  return p;
}

}  // namespace

TEST_CASE("encode constant image") {
  GrayImage img(5, 5, 42.f);
  BitPlanes lbp = encode(img, CoderKind::LbpGt);
  for (const auto& plane : lbp.planes)
    for (uint8_t b : plane) CHECK(b == 0);  // no neighbor strictly greater

  BitPlanes census = encode(img, CoderKind::CensusGe);
  for (const auto& plane : census.planes)
    for (uint8_t b : plane) CHECK(b == 1);  // >= on equal values
}

TEST_CASE("encode center pixel of a 3x3 patch") {
  GrayImage img(3, 3, 10.f);
  // Neighbors NW,N,NE,E,SE,S,SW,W = 20,5,20,5,20,5,20,5
  img.at(0, 0) = 20;
  img.at(1, 0) = 5;
  img.at(2, 0) = 20;
  img.at(2, 1) = 5;
  img.at(2, 2) = 20;
  img.at(1, 2) = 5;
  img.at(0, 2) = 20;
  img.at(0, 1) = 5;
  BitPlanes lbp = encode(img, CoderKind::LbpGt);
  const std::array<uint8_t, 8> expected = {1, 0, 1, 0, 1, 0, 1, 0};
  for (int j = 0; j < 8; ++j) CHECK(lbp.at(j, 1, 1) == expected[j]);
}

TEST_CASE("encode rejects images below 3x3") {
  GrayImage img(2, 3, 0.f);
  CHECK_THROWS_AS(encode(img, CoderKind::LbpGt), DimensionError);
}

TEST_CASE("MTB encodes a single median-threshold plane") {
  GrayImage img(8, 8);
  for (int i = 0; i < 64; ++i) img.data[i] = static_cast<float>(i * 4);
  BitPlanes mtb = encode(img, CoderKind::Mtb);
  REQUIRE(mtb.plane_count() == 1);
  size_t ones = 0;
  for (uint8_t b : mtb.planes[0]) ones += b;
  CHECK(ones == 32);  // half above the lower median
}

TEST_CASE("to_decimal basic values") {
  CHECK(to_decimal(planes_from_bits({0, 0, 0, 0, 0, 0, 0, 0})).at(0, 0) == 0.f);
  CHECK(to_decimal(planes_from_bits({1, 1, 1, 1, 1, 1, 1, 1})).at(0, 0) == 255.f);
  // bits j=1..8 = (1,0,1,0,1,1,1,0) -> 1+4+16+32+64 = 117
  CHECK(to_decimal(planes_from_bits({1, 0, 1, 0, 1, 1, 1, 0})).at(0, 0) == 117.f);
}

TEST_CASE("to_decimal requires 8 planes") {
  BitPlanes one(4, 4, 1);
  CHECK_THROWS_AS(to_decimal(one), ShapeError);
}

TEST_CASE("to_decimal round-trips through bit extraction") {
  BitPlanes p = random_planes(16, 16, 8, 77);
  GrayImage dec = to_decimal(p);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) {
      int v = static_cast<int>(dec.at(x, y));
      for (int j = 0; j < 8; ++j) CHECK(((v >> j) & 1) == p.at(j, x, y));
    }
}

TEST_CASE("hamming_cost of identical planes is zero") {
  BitPlanes p = random_planes(8, 8, 8, 5);
  ValidityMask mask(8, 8, true);
  CHECK(hamming_cost(p, p, mask) == 0);
}

namespace {

// Bit-strings written most-significant bit first, as in the byte-distance
// counter-example: written position k maps to plane j = 8 - k.
BitPlanes planes_from_bits_msb(const std::array<uint8_t, 8>& bits) {
  std::array<uint8_t, 8> rev;
  for (int k = 0; k < 8; ++k) rev[7 - k] = bits[k];
  return planes_from_bits(rev);
}

}  // namespace

TEST_CASE("decimal view exaggerates a single-bit difference") {
  // Two pairs each differing in one bit; under the byte view their
  // distances are 64 and 1, under the Hamming view both are 1.
  BitPlanes a = planes_from_bits_msb({1, 0, 1, 0, 1, 1, 1, 0});
  BitPlanes b = planes_from_bits_msb({1, 1, 1, 0, 1, 1, 1, 0});
  BitPlanes c = planes_from_bits_msb({1, 1, 1, 0, 1, 1, 1, 1});
  BitPlanes d = planes_from_bits_msb({1, 1, 1, 0, 1, 1, 1, 0});
  ValidityMask mask(1, 1, true);

  CHECK(std::abs(to_decimal(a).at(0, 0) - to_decimal(b).at(0, 0)) == 64.0);
  CHECK(std::abs(to_decimal(c).at(0, 0) - to_decimal(d).at(0, 0)) == 1.0);

  CHECK(hamming_cost(a, b, mask) == 1);
  CHECK(hamming_cost(c, d, mask) == 1);
  CHECK(squared_cost(a, b, mask) == 1.0);
  CHECK(squared_cost(c, d, mask) == 1.0);
}

TEST_CASE("hamming_cost matches a per-bit oracle and respects the mask") {
  BitPlanes a = random_planes(16, 16, 8, 100);
  BitPlanes b = random_planes(16, 16, 8, 200);
  ValidityMask mask(16, 16, true);
  for (int i = 0; i < 40; ++i) mask.bits[i * 6 % mask.bits.size()] = 0;

  uint64_t oracle = 0;
  for (int j = 0; j < 8; ++j)
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x)
        if (mask.at(x, y) && a.at(j, x, y) != b.at(j, x, y)) ++oracle;
  CHECK(hamming_cost(a, b, mask) == oracle);
  CHECK(squared_cost(a, b, mask) == static_cast<double>(oracle));
}

TEST_CASE("hamming_cost shape mismatch") {
  BitPlanes a = random_planes(8, 8, 8, 1);
  BitPlanes b = random_planes(8, 9, 8, 1);
  ValidityMask mask(8, 8, true);
  CHECK_THROWS_AS(hamming_cost(a, b, mask), ShapeError);
}

TEST_CASE("squared_cost equals hamming_cost for all byte pairs") {
  ValidityMask mask(1, 1, true);
  for (int u = 0; u < 256; ++u) {
    std::array<uint8_t, 8> ba, bb;
    for (int v = 0; v < 256; ++v) {
      for (int j = 0; j < 8; ++j) {
        ba[j] = (u >> j) & 1;
        bb[j] = (v >> j) & 1;
      }
      BitPlanes a = planes_from_bits(ba);
      BitPlanes b = planes_from_bits(bb);
      REQUIRE(squared_cost(a, b, mask) == static_cast<double>(hamming_cost(a, b, mask)));
    }
  }
}

TEST_CASE("hamming_cost is symmetric and satisfies the triangle inequality") {
  ValidityMask mask(12, 12, true);
  for (uint32_t seed = 0; seed < 10; ++seed) {
    BitPlanes a = random_planes(12, 12, 8, seed * 3 + 1);
    BitPlanes b = random_planes(12, 12, 8, seed * 3 + 2);
    BitPlanes c = random_planes(12, 12, 8, seed * 3 + 3);
    CHECK(hamming_cost(a, b, mask) == hamming_cost(b, a, mask));
    CHECK(hamming_cost(a, c, mask) <=
          hamming_cost(a, b, mask) + hamming_cost(b, c, mask));
  }
}

TEST_CASE("LBP is invariant to strictly increasing intensity maps") {
  GrayImage img = random_image(24, 24, 55);
  GrayImage mapped(24, 24);
  for (size_t i = 0; i < img.data.size(); ++i) {
    // strictly increasing map on [0, 255]
    double v = img.data[i];
    mapped.data[i] = static_cast<float>(30.0 + 0.5 * v + 0.001 * v * v);
  }
  BitPlanes p1 = encode(img, CoderKind::LbpGt);
  BitPlanes p2 = encode(mapped, CoderKind::LbpGt);
  for (int j = 0; j < 8; ++j) CHECK(p1.planes[j] == p2.planes[j]);
}

TEST_CASE("plane_gradients of a constant plane are zero") {
  BitPlanes p(8, 8, 8);  // all zero bits
  PlaneGradients g = plane_gradients(p);
  for (const auto& plane : g.dx)
    for (float v : plane) CHECK(v == 0.f);
  for (const auto& plane : g.dy)
    for (float v : plane) CHECK(v == 0.f);
}

TEST_CASE("plane_gradients of a vertical step edge") {
  BitPlanes p(8, 8, 1);
  for (int y = 0; y < 8; ++y)
    for (int x = 4; x < 8; ++x) p.set(0, x, y, 1);
  PlaneGradients g = plane_gradients(p);
  for (int y = 0; y < 8; ++y)
    for (int x = 1; x < 7; ++x) {
      float expect = (x == 3 || x == 4) ? 0.5f : 0.f;
      CHECK(g.gx(0, x, y) == expect);
      CHECK(g.gy(0, x, y) == 0.f);
    }
}

TEST_CASE("plane_gradients match a finite-difference oracle") {
  BitPlanes p = random_planes(10, 9, 8, 321);
  PlaneGradients g = plane_gradients(p);
  for (int j = 0; j < 8; ++j)
    for (int y = 0; y < 9; ++y)
      for (int x = 0; x < 10; ++x) {
        int xm = std::max(x - 1, 0), xp = std::min(x + 1, 9);
        int ym = std::max(y - 1, 0), yp = std::min(y + 1, 8);
        float ox = 0.5f * (p.at(j, xp, y) - p.at(j, xm, y));
        float oy = 0.5f * (p.at(j, x, yp) - p.at(j, x, ym));
        CHECK(g.gx(j, x, y) == ox);
        CHECK(g.gy(j, x, y) == oy);
        CHECK(std::abs(g.gx(j, x, y)) <= 0.5f);
        CHECK(std::abs(g.gy(j, x, y)) <= 0.5f);
      }
}
