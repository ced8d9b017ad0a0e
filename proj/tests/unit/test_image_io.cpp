#include <doctest.h>

#include "hacl/error.hpp"
#include "hacl/image_io.hpp"
#include "synthetic.hpp"

using namespace hacl;

TEST_CASE("png and ppm round-trip") {
  testing::TempDir dir("img");
  RgbImage img("x", 5, 3);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(i * 17);
  save_png(img, dir.path() / "x.png");
  save_ppm(img, dir.path() / "y.ppm");
  const RgbImage png = load_image(dir.path() / "x.png");
  const RgbImage ppm = load_image(dir.path() / "y.ppm");
  CHECK(png.width == 5);
  CHECK(png.height == 3);
  CHECK(png.pixels == img.pixels);
  CHECK(ppm.pixels == img.pixels);
  CHECK(png.image_id == "x");

  CHECK(find_image(dir.path(), "x") == dir.path() / "x.png");
  CHECK(find_image(dir.path(), "y") == dir.path() / "y.ppm");
  CHECK(find_image(dir.path(), "x.png") == dir.path() / "x.png");
  CHECK_FALSE(find_image(dir.path(), "z"));
  try {
    load_image(dir.path() / "z.png");
    FAIL("expected MissingImage");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MissingImage);
  }
}
