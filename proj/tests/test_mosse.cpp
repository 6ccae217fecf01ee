#include <doctest.h>

#include "cfad/matching.hpp"
#include "cfad/mosse.hpp"
#include "cfad/synth.hpp"
#include "oracles.hpp"

using namespace cfad;

namespace {

// A textured frame with a well-conditioned spectrum and an annotation near the middle.
struct Frame {
  Image image;
  EyeAnnotation eyes;
};

Frame random_frame(int w, int h, std::uint64_t seed) {
  Frame f{oracle::random_image(w, h, seed, 0.1, 1.0), {}};
  const double cx = w / 2.0 + (seed % 5) - 2.0;
  const double cy = h / 2.0 + (seed % 3) - 1.0;
  f.eyes = {{cx - 4.0, cy}, {cx + 4.0, cy}};
  return f;
}

Dataset one_per_cell(const std::vector<double>& octaves, std::uint64_t seed) {
  CorpusSpec spec = bank_grid_spec();
  spec.octaves = octaves;
  const std::size_t n = octaves.size() * spec.poses.size();
  return to_dataset(generate_corpus(spec, static_cast<int>(n), 0, seed, 1).train);
}

}  // namespace

TEST_CASE("pose bins split at +/-12 degrees") {
  CHECK(pose_bin_for(-12.5) == PoseBin::Left);
  CHECK(pose_bin_for(-12.0) == PoseBin::Frontal);
  CHECK(pose_bin_for(12.0) == PoseBin::Frontal);
  CHECK(pose_bin_for(12.01) == PoseBin::Right);
  CHECK(parse_pose("RIGHT") == PoseBin::Right);
  CHECK_THROWS_AS(parse_pose("UP"), Error);
}

TEST_CASE("filter ids order by octave, then pose") {
  CHECK(FilterId{5.0, PoseBin::Right} < FilterId{6.0, PoseBin::Left});
  CHECK(FilterId{5.0, PoseBin::Left} < FilterId{5.0, PoseBin::Frontal});
  CHECK(FilterId{5.0, PoseBin::Frontal} < FilterId{5.0, PoseBin::Right});
}

TEST_CASE("accumulator: one frame gives G conj(F) exactly") {
  const Frame f = random_frame(24, 20, 1);
  MosseAccumulator acc(24, 20);
  acc.add(f.image, f.eyes, 2.0);
  const FrequencyGrid F = forward_dft(preprocess(f.image));
  const FrequencyGrid G = forward_dft(gaussian_goal(24, 20, f.eyes.center(), 2.0));
  CHECK((acc.numerator() == G * F.conjugate()).all());
  CHECK(acc.count() == 1);
}

TEST_CASE("accumulator: merge equals accumulating everything in one") {
  const Frame a = random_frame(16, 16, 2), b = random_frame(16, 16, 3), c = random_frame(16, 16, 4);
  const MosseAccumulator all = accumulate(accumulate(accumulate(MosseAccumulator(16, 16), a.image, a.eyes, 2.0),
                                                     b.image, b.eyes, 2.0),
                                          c.image, c.eyes, 2.0);
  MosseAccumulator x = accumulate(MosseAccumulator(16, 16), a.image, a.eyes, 2.0);
  MosseAccumulator y = accumulate(MosseAccumulator(16, 16), b.image, b.eyes, 2.0);
  MosseAccumulator z = accumulate(MosseAccumulator(16, 16), c.image, c.eyes, 2.0);

  MosseAccumulator xy_z = x;
  xy_z.merge(y);
  xy_z.merge(z);
  MosseAccumulator x_yz = y;
  x_yz.merge(z);
  x_yz.merge(x);
  for (const auto* m : {&xy_z, &x_yz}) {
    CHECK((m->numerator() - all.numerator()).abs().maxCoeff() < 1e-9);
    CHECK((m->denominator() - all.denominator()).abs().maxCoeff() < 1e-9);
    CHECK(m->count() == 3);
  }
  CHECK_THROWS_AS(x.merge(MosseAccumulator(8, 8)), Error);
  CHECK_THROWS_AS(x.add(oracle::random_image(8, 8, 1), a.eyes, 2.0), Error);
}

TEST_CASE("accumulator: denominator is the sum of |F|^2") {
  MosseAccumulator acc(20, 18);
  Eigen::ArrayXXd expect = Eigen::ArrayXXd::Zero(18, 20);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Frame f = random_frame(20, 18, 100 + s);
    acc.add(f.image, f.eyes, 2.0);
    // Independent |F|^2 from the defining sum of the preprocessed frame.
    const Image p = preprocess(f.image);
    for (int v = 0; v < 18; ++v)
      for (int u = 0; u < 20; ++u) {
        std::complex<double> sum = 0.0;
        for (int y = 0; y < 18; ++y)
          for (int x = 0; x < 20; ++x)
            sum += p(y, x) * std::polar(1.0, -2.0 * std::numbers::pi * (u * x / 20.0 + v * y / 18.0));
        expect(v, u) += std::norm(sum);
      }
  }
  CHECK(acc.denominator().imag().abs().maxCoeff() < 1e-9);
  CHECK(acc.denominator().real().minCoeff() >= 0.0);
  CHECK((acc.denominator().real() - expect).abs().maxCoeff() < 1e-9);
}

TEST_CASE("finalize: single frame with epsilon 0 is the exact filter") {
  const Frame f = random_frame(32, 32, 7);
  const MosseFilter m = finalize(accumulate(MosseAccumulator(32, 32), f.image, f.eyes, 2.0), 0.0);
  const MosseFilter e = exact_filter(f.image, f.eyes, 2.0);
  CHECK((m.freq - e.freq).abs().maxCoeff() < 1e-6);
}

TEST_CASE("finalize: error cases") {
  CHECK_THROWS_AS(finalize(MosseAccumulator(8, 8), 0.0), Error);
  const Frame f = random_frame(16, 16, 9);
  MosseAccumulator acc = accumulate(MosseAccumulator(16, 16), f.image, f.eyes, 2.0);
  FrequencyGrid den = acc.denominator();
  den(3, 5) = 0.0;
  const MosseAccumulator zeroed(acc.numerator(), den, 1);
  try {
    finalize(zeroed, 0.0);
    FAIL("expected division_degenerate");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DivisionDegenerate);
  }
  CHECK_NOTHROW(finalize(zeroed, 1e-3));
  CHECK(default_epsilon(acc) == doctest::Approx(1e-2 * acc.denominator().real().mean()));
}

TEST_CASE("single-frame filter finds its own training target") {
  const Frame f = random_frame(48, 40, 12);
  const MosseAccumulator acc = accumulate(MosseAccumulator(48, 40), f.image, f.eyes, 2.0);
  const MosseFilter m = finalize(acc, default_epsilon(acc));
  const auto p = oracle::argmax(freq_correlate(f.image, m).values);
  CHECK(std::abs(p.x - f.eyes.center().x) <= 1.0);
  CHECK(std::abs(p.y - f.eyes.center().y) <= 1.0);
}

TEST_CASE("exact filter reconstructs the goal") {
  const Frame f = random_frame(32, 24, 5);
  const MosseFilter e = exact_filter(f.image, f.eyes, 2.0);
  const Image goal = gaussian_goal(32, 24, f.eyes.center(), 2.0);
  CHECK((freq_correlate(f.image, e).values - goal).abs().maxCoeff() < 1e-4);
  const Frame g = random_frame(32, 24, 6);
  CHECK(!(exact_filter(g.image, g.eyes, 2.0).freq == e.freq).all());
}

TEST_CASE("exact filter of an impulse face is the goal spectrum over the impulse spectrum") {
  Image img = Image::Constant(16, 16, 0.0);
  img(8, 8) = 1.0;
  img(2, 3) = 0.5;  // two impulses keep the preprocessed spectrum nonzero
  const EyeAnnotation eyes{{4, 8}, {12, 8}};
  const MosseFilter e = exact_filter(img, eyes, 2.0);
  const FrequencyGrid F = forward_dft(preprocess(img));
  const FrequencyGrid G = forward_dft(gaussian_goal(16, 16, eyes.center(), 2.0));
  CHECK((e.freq * F - G).abs().maxCoeff() < 1e-9);
}

TEST_CASE("exact filter rejects a zero bin") {
  // A pure horizontal cosine has most DFT bins exactly zero.
  Image img(8, 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) img(y, x) = 1.0 + std::cos(2.0 * std::numbers::pi * x / 8.0);
  CHECK_THROWS_AS(exact_filter(img, {{2, 4}, {6, 4}}, 2.0), Error);
}

TEST_CASE("spatial kernel and from_spatial invert each other") {
  const Image k = oracle::random_image(9, 7, 3, -1.0, 1.0);
  const MosseFilter f = MosseFilter::from_spatial(k);
  CHECK((spatial_kernel(f.freq) - k).abs().maxCoeff() < 1e-12);
}

TEST_CASE("signed offsets split at ceil(n/2)") {
  CHECK(signed_offset(0, 5) == 0);
  CHECK(signed_offset(2, 5) == 2);
  CHECK(signed_offset(3, 5) == -2);
  CHECK(signed_offset(2, 4) == -2);
  CHECK(signed_offset(1, 4) == 1);
}

TEST_CASE("pad_kernel keeps every offset") {
  const Image k = oracle::random_image(4, 5, 8);
  const Image p = pad_kernel(k, 9, 11);
  for (int j = 0; j < 5; ++j)
    for (int i = 0; i < 4; ++i) {
      CHECK(p(oracle::wrap(signed_offset(j, 5), 11), oracle::wrap(signed_offset(i, 4), 9)) == k(j, i));
    }
  CHECK(p.sum() == doctest::Approx(k.sum()));
  CHECK_THROWS_AS(pad_kernel(k, 3, 11), Error);
}

TEST_CASE("crop_template takes the window around the kernel origin") {
  Image k = Image::Zero(10, 12);
  k(0, 0) = 5.0;   // offset (0, 0)
  k(9, 11) = 7.0;  // offset (-1, -1)
  const Image t = crop_template(k, {4, 6});
  REQUIRE(t.cols() == 4);
  REQUIRE(t.rows() == 6);
  CHECK(t(3, 2) == 5.0);
  CHECK(t(2, 1) == 7.0);
}

TEST_CASE("scale grid: quarter octaves and nearest-scale assignment") {
  const ScaleGrid g = ScaleGrid::quarter_octaves();
  CHECK(g.octaves.size() == 13);
  CHECK(g.cell_count() == 39);
  CHECK(g.octaves.front() == 4.0);
  CHECK(g.octaves.back() == 7.0);
  CHECK(g.scale_index(4.1) == 0u);
  CHECK(g.scale_index(4.125) == 0u);  // tie goes to the lower scale
  CHECK(g.scale_index(4.13) == 1u);
  CHECK(!g.scale_index(3.8));
  CHECK(!g.scale_index(7.2));
  const ScaleGrid one{{5.0}, {PoseBin::Frontal}};
  CHECK(one.scale_index(5.1) == 0u);
  CHECK(!one.scale_index(5.2));
}

TEST_CASE("bank: default grid gives 39 filters with octave-major order") {
  const Dataset data = one_per_cell(ScaleGrid::quarter_octaves().octaves, 3);
  const FilterBank bank = build_bank(data, {});
  REQUIRE(bank.size() == 39);
  CHECK(bank.templates.size() == 39);
  for (std::size_t i = 0; i < 39; ++i) {
    CHECK(bank.filters[i].id.octave == 4.0 + 0.25 * static_cast<double>(i / 3));
    CHECK(static_cast<int>(bank.filters[i].id.pose) == static_cast<int>(i % 3));
    CHECK(bank.cell_counts[i] == 1);
    // 2^octave is the nominal interocular width of the cell.
    const Pixel e = face_extent(std::exp2(bank.filters[i].id.octave), {});
    CHECK(bank.templates[i].cols() == e.x);
    CHECK(bank.templates[i].rows() == e.y);
    for (std::size_t j = 0; j < i; ++j) CHECK(bank.filters[j].id != bank.filters[i].id);
  }
  // Values are held at single precision.
  CHECK((bank.filters[5].spatial.cast<float>().cast<double>() == bank.filters[5].spatial).all());
}

TEST_CASE("bank: one octave and one pose gives one filter") {
  const Dataset data = one_per_cell({5.0}, 4);
  BankManifest m;
  m.grid = {{5.0}, {PoseBin::Frontal}};
  const FilterBank bank = build_bank(data, m);
  REQUIRE(bank.size() == 1);
  CHECK(bank.cell_counts[0] == 1);
}

TEST_CASE("bank: empty cell is named") {
  const Dataset data = one_per_cell({4.0, 5.0}, 5);
  try {
    build_bank(data, {});
    FAIL("expected empty_cell");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyCell);
    CHECK(std::string(e.what()).find("4.25") != std::string::npos);
  }
}

TEST_CASE("bank: octaves outside [3, 7.5] are rejected") {
  BankManifest m;
  m.grid = {{8.0}, {PoseBin::Frontal}};
  CHECK_THROWS_AS(build_bank({}, m), Error);
}

TEST_CASE("bank: result does not depend on the worker count") {
  const Dataset data = one_per_cell({4.5, 4.75}, 6);
  BankManifest m;
  m.grid = {{4.5, 4.75}, {PoseBin::Left, PoseBin::Frontal, PoseBin::Right}};
  const FilterBank a = build_bank(data, m, 1);
  const FilterBank b = build_bank(data, m, 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK((a.filters[i].freq == b.filters[i].freq).all());
    CHECK((a.templates[i] == b.templates[i]).all());
  }
}
