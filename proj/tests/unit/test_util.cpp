// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#include <doctest.h>

#include "patternscope/csv.hpp"
#include "patternscope/error.hpp"
#include "patternscope/image.hpp"
#include "patternscope/keyvalue.hpp"
#include "support.hpp"

using namespace patternscope;

TEST_SUITE("util") {

TEST_CASE("rect helpers") {
  const IntRect r{10, 20, 5, 30};
  CHECK_FALSE(r.is_normalized());
  CHECK(r.normalized() == IntRect{5, 20, 10, 30});
  CHECK(IntRect{0, 0, 10, 10}.intersect({5, 5, 20, 20}) == IntRect{5, 5, 10, 10});
  CHECK(IntRect{0, 0, 10, 10}.intersect({20, 20, 30, 30}).empty());
  CHECK(IntRect{0, 0, 4, 5}.area() == 20);
}

TEST_CASE("area resize preserves the mean and constant images") {
  Image8 img(7, 5);
  img.fill(10, 20, 30);
  const ImageF small = resize_area(img, 3, 2);
  CHECK((small.planes[0] == 10.0f).all());
  CHECK((small.planes[2] == 30.0f).all());
  const ImageF big = resize_area(img, 14, 11);
  CHECK((big.planes[1] - 20.0f).abs().maxCoeff() < 1e-4f);

  Image8 half(4, 2);
  fill_rect(half, {0, 0, 2, 2}, {200, 0, 0});
  const ImageF one = resize_area(half, 1, 1);
  CHECK(one.planes[0](0, 0) == doctest::Approx(100.0));
}

TEST_CASE("disc fill and color counting") {
  Image8 img(20, 20);
  fill_disc(img, {0, 0, 20, 20}, {255, 0, 0});
  const auto n = count_color(img, img.bounds(), {255, 0, 0}, 0);
  CHECK(n > 280);  // pi * 100 = 314
  CHECK(n < 340);
  CHECK(count_color(img, {0, 0, 2, 2}, {255, 0, 0}, 0) == 0);
}

TEST_CASE("png round trip is lossless; jpeg keeps dimensions") {
  const auto dir = test::scratch("codec");
  Image8 img(13, 9);
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 13; ++x) {
      img.planes[0](y, x) = static_cast<std::uint8_t>(x * 19);
      img.planes[1](y, x) = static_cast<std::uint8_t>(y * 27);
      img.planes[2](y, x) = 77;
    }
  write_image(dir / "a.png", img);
  CHECK(read_image(dir / "a.png") == img);
  CHECK(probe_image(dir / "a.png") == Extent{13, 9});
  write_image(dir / "a.jpg", img);
  CHECK(read_image(dir / "a.jpg").extent() == Extent{13, 9});
  CHECK(probe_image(dir / "a.jpg") == Extent{13, 9});
  CHECK_THROWS_AS(read_image(dir / "missing.png"), IoError);
  test::spit(dir / "junk.png", "not an image");
  CHECK_THROWS(read_image(dir / "junk.png"));
}

TEST_CASE("csv quoting") {
  CHECK(csv::split_line("a,\"b,c\",\"d\"\"e\"") == std::vector<std::string>{"a", "b,c", "d\"e"});
  CHECK(csv::escape("x,y") == "\"x,y\"");
  CHECK(csv::escape("plain") == "plain");
  const auto row = std::vector<std::string>{"1,000+", "Food & Drink", "say \"hi\""};
  CHECK(csv::split_line(csv::join(row)) == row);
  const csv::Table t = csv::parse("a,b\n1,2\n\n3,4\n");
  CHECK(t.rows.size() == 2);
  CHECK(t.column("b") == 1);
  CHECK(t.column("z") == -1);
  CHECK(t.lines[1] == 4);
}

TEST_CASE("key-value parsing") {
  const KeyValues kv = KeyValues::parse("# c\na = 1\nb = two words  # trailing\nflag = true\na = 3\n");
  CHECK(kv.get_int("a", 0) == 3);
  CHECK(kv.get_or("b", "") == "two words");
  CHECK(kv.get_bool("flag", false));
  CHECK(kv.get_double("missing", 1.5) == 1.5);
  CHECK_THROWS_AS(KeyValues::parse("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(KeyValues::parse("n = abc\n").get_int("n", 0), ConfigError);
}

}  // TEST_SUITE
