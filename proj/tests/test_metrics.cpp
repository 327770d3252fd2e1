#include <cmath>

#include "doctest.h"
#include "json.hpp"
#include "qcwarp/error.hpp"
#include "qcwarp/metrics.hpp"
#include "qcwarp/rng.hpp"

using namespace qcwarp;

namespace {

RasterImage noise_image(int w, int h, int channels, std::uint64_t seed) {
  const CounterRng rng(seed, 0);
  RasterImage img(w, h, channels);
  for (std::size_t i = 0; i < img.size(); ++i) img.data()[i] = rng.uniform(i);
  return img;
}

}  // namespace

TEST_CASE("identical images") {
  const auto img = noise_image(23, 19, 3, 1);
  const auto rep = evaluate(img, img);
  CHECK(rep.mse == 0.0);
  CHECK(rep.psnr == 99.0);
  CHECK(rep.ssim == 1.0);
}

TEST_CASE("closed-form cases") {
  const RasterImage zeros(16, 16, 1, 0.0);
  const RasterImage ones(16, 16, 1, 1.0);
  const auto rep = evaluate(zeros, ones);
  CHECK(rep.mse == 1.0);
  CHECK(rep.psnr == 0.0);
  // zero variances: SSIM = C1 / (1 + C1) with C1 = 0.01^2
  CHECK(rep.ssim == doctest::Approx(1e-4 / (1.0 + 1e-4)).epsilon(1e-12));

  const RasterImage a(16, 16, 3, 0.3);
  const RasterImage b(16, 16, 3, 0.4);
  const auto off = evaluate(a, b);
  CHECK(off.mse == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(off.psnr == doctest::Approx(20.0).epsilon(1e-12));

  CHECK(psnr_from_mse(0.0) == kPsnrCap);
  CHECK(psnr_from_mse(1e-3) == doctest::Approx(30.0));
}

TEST_CASE("symmetry and self-similarity") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto a = noise_image(31, 20, seed % 2 ? 3 : 1, seed);
    const auto b = noise_image(31, 20, seed % 2 ? 3 : 1, seed + 100);
    const auto ab = evaluate(a, b);
    const auto ba = evaluate(b, a);
    CHECK(ab.mse == ba.mse);
    CHECK(ab.psnr == ba.psnr);
    CHECK(ab.ssim == ba.ssim);
    CHECK(ssim(a, a) == 1.0);
    CHECK(ab.ssim < 1.0);
    CHECK(ab.ssim >= -1.0);
  }
}

TEST_CASE("mse ignores channel order") {
  const auto a = noise_image(12, 9, 3, 5);
  const auto b = noise_image(12, 9, 3, 6);
  auto permute = [](const RasterImage& img) {
    RasterImage out(img.width(), img.height(), 3);
    for (int r = 0; r < img.height(); ++r)
      for (int c = 0; c < img.width(); ++c)
        for (int ch = 0; ch < 3; ++ch) out.at(r, c, ch) = img.at(r, c, (ch + 1) % 3);
    return out;
  };
  CHECK(mse(permute(a), permute(b)) == doctest::Approx(mse(a, b)).epsilon(1e-15));
}

TEST_CASE("ssim averages channels") {
  const auto a = noise_image(20, 20, 3, 7);
  const auto b = noise_image(20, 20, 3, 8);
  double mean = 0.0;
  for (int ch = 0; ch < 3; ++ch) mean += ssim(a.channel(ch), b.channel(ch));
  CHECK(ssim(a, b) == doctest::Approx(mean / 3.0).epsilon(1e-14));
}

TEST_CASE("shape mismatch") {
  try {
    evaluate(RasterImage(4, 4, 1), RasterImage(4, 4, 3));
    FAIL("expected invalid-argument");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidArgument);
  }
  CHECK_THROWS_AS(evaluate(RasterImage(4, 5, 1), RasterImage(5, 4, 1)), Error);
}

TEST_CASE("report serialisation") {
  const MetricReport rep{0.0123, 19.1, 0.75};
  const auto j = nlohmann::json::parse(to_json_string(rep));
  CHECK(j.at("mse").get<double>() == 0.0123);
  CHECK(j.at("psnr").get<double>() == 19.1);
  CHECK(j.at("ssim").get<double>() == 0.75);
  CHECK(csv_header() == "mse,psnr,ssim");
  const auto row = to_csv_row(rep);
  double m = 0, p = 0, s = 0;
  REQUIRE(std::sscanf(row.c_str(), "%lf,%lf,%lf", &m, &p, &s) == 3);
  CHECK(m == 0.0123);
  CHECK(p == 19.1);
  CHECK(s == 0.75);
}
