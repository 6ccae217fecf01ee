#include <doctest.h>

#include <filesystem>
#include <set>

#include "cfad/matching.hpp"
#include "cfad/synth.hpp"

using namespace cfad;
namespace fs = std::filesystem;

namespace {

bool same_corpus(const Corpus& a, const Corpus& b) {
  if (a.train.size() != b.train.size() || a.test.size() != b.test.size()) return false;
  for (auto split : {&Corpus::train, &Corpus::test}) {
    const auto& x = a.*split;
    const auto& y = b.*split;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i].name != y[i].name || !(x[i].scene.image == y[i].scene.image).all()) return false;
      if (x[i].scene.eyes.left_eye.x != y[i].scene.eyes.left_eye.x) return false;
      if (x[i].scene.eyes.right_eye.y != y[i].scene.eyes.right_eye.y) return false;
    }
  }
  return a.hash() == b.hash();
}

}  // namespace

TEST_CASE("corpus: same seed gives identical corpora") {
  const CorpusSpec spec;
  CHECK(same_corpus(generate_corpus(spec, 6, 3, 7, 1), generate_corpus(spec, 6, 3, 7, 3)));
  CHECK(!same_corpus(generate_corpus(spec, 6, 3, 7, 1), generate_corpus(spec, 6, 3, 8, 1)));
}

TEST_CASE("corpus: annotations carry the requested interocular width") {
  CorpusSpec spec;
  spec.width = 400;
  spec.height = 300;
  spec.iod_min = spec.iod_max = 64.0;
  for (const auto& im : generate_corpus(spec, 5, 2, 1, 1).train) {
    CHECK(im.scene.eyes.interocular() == 64.0);
    CHECK(im.scene.eyes.left_eye.y == im.scene.eyes.right_eye.y);
  }
}

TEST_CASE("corpus: train and test identities are disjoint") {
  const Corpus c = generate_corpus({}, 60, 30, 2, 1);
  std::set<int> train, test;
  for (const auto& im : c.train) train.insert(im.spec.identity);
  for (const auto& im : c.test) test.insert(im.spec.identity);
  for (int id : test) CHECK(!train.contains(id));
  CHECK(train.size() > 10);

  CorpusSpec bad;
  bad.test_identities = {30, 20};
  try {
    generate_corpus(bad, 1, 1, 1, 1);
    FAIL("expected identity_overlap");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IdentityOverlap);
  }
}

TEST_CASE("corpus: octave cells and pose lists are honoured") {
  const Corpus c = generate_corpus(bank_grid_spec(), 39, 0, 4, 1);
  for (std::size_t i = 0; i < 39; ++i) {
    const auto& im = c.train[i];
    CHECK(std::abs(im.scene.eyes.octave() - (4.0 + 0.25 * static_cast<double>(i / 3))) <= 0.05 + 1e-12);
    const double want = std::array{-22.0, 0.0, 22.0}[i % 3];
    CHECK(std::abs(im.spec.pose_degrees - want) <= 4.0);
  }
}

TEST_CASE("corpus: written to disk and loaded back pixel for pixel") {
  const Corpus c = generate_corpus({}, 4, 3, 5, 1);
  const fs::path dir = fs::temp_directory_path() / "cfad_test_synth_corpus";
  fs::remove_all(dir);
  write_corpus(c, dir);
  CHECK(fs::exists(dir / "manifest.json"));
  const Dataset back = load_dataset(dir / "test.csv");
  const Dataset mem = to_dataset(c.test);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].path == mem[i].path);
    CHECK((back[i].image == mem[i].image).all());
    CHECK(back[i].eyes.left_eye.x == mem[i].eyes.left_eye.x);
    CHECK(back[i].eyes.right_eye.y == mem[i].eyes.right_eye.y);
    CHECK(back[i].pose_degrees == mem[i].pose_degrees);
  }
}

TEST_CASE("corpus spec json round trip") {
  const CorpusSpec a = bank_grid_spec();
  const CorpusSpec b = corpus_spec_from_json(to_json(a));
  CHECK(to_json(b) == to_json(a));
  CHECK(repeated_setting_spec().width == 384);
  CHECK(repeated_setting_spec().height == 288);
}

TEST_CASE("render: centered frontal face has symmetric eyes") {
  const Scene s = render_scene({.width = 129, .height = 128, .center = {64, 60}, .iod = 24});
  CHECK(s.eyes.left_eye.x == 52.0);
  CHECK(s.eyes.right_eye.x == 76.0);
  CHECK(64.0 - s.eyes.left_eye.x == s.eyes.right_eye.x - 64.0);
  CHECK(s.rect == face_rect(s.eyes));
}

TEST_CASE("render: opposite poses are mirror images") {
  SceneSpec a{.width = 129, .height = 128, .background = false, .center = {64, 60}, .iod = 28, .pose_degrees = 20};
  SceneSpec b = a;
  b.pose_degrees = -20;
  const Scene sa = render_scene(a);
  const Scene sb = render_scene(b);
  const Image flipped = sb.image.rowwise().reverse();
  CHECK((sa.image - flipped).abs().maxCoeff() <= 1.0 / 255.0 + 1e-12);
  CHECK(sa.eyes.left_eye.x == 128.0 - sb.eyes.right_eye.x);
  CHECK(!(sa.image == sb.image).all());
}

TEST_CASE("render: noise-free renders are identical, noisy ones follow the seed") {
  const SceneSpec clean{.width = 96, .height = 96, .center = {48, 44}, .iod = 20};
  CHECK((render_scene(clean).image == render_scene(clean).image).all());
  SceneSpec noisy = clean;
  noisy.noise_sigma = 0.05;
  noisy.noise_seed = 3;
  CHECK((render_scene(noisy).image == render_scene(noisy).image).all());
  SceneSpec other = noisy;
  other.noise_seed = 4;
  CHECK(!(render_scene(noisy).image == render_scene(other).image).all());
}

TEST_CASE("render: the face only paints near its rectangle") {
  const SceneSpec a{.width = 160, .height = 120, .center = {60, 50}, .iod = 20, .pose_degrees = 10, .identity = 3};
  SceneSpec b = a;
  b.pose_degrees = -25;
  b.identity = 7;
  const Scene sa = render_scene(a);
  const Scene sb = render_scene(b);
  SceneSpec empty = a;
  empty.center = {130, 90};
  empty.iod = 8;
  const Scene far = render_scene(empty);
  const FaceRect& r = sa.rect;
  for (int y = 0; y < 120; ++y)
    for (int x = 0; x < 160; ++x) {
      const bool near_face = x >= r.x - 2 && x < r.x + r.w + 2 && y >= r.y - 2 && y < r.y + r.h + 2;
      const bool near_far = x >= far.rect.x - 2 && x < far.rect.x + far.rect.w + 2 && y >= far.rect.y - 2 &&
                            y < far.rect.y + far.rect.h + 2;
      if (!near_face) CHECK(sa.image(y, x) == sb.image(y, x));
      if (!near_face && !near_far) CHECK(sa.image(y, x) == far.image(y, x));
    }
}

TEST_CASE("render: eye blobs sit on the annotation") {
  const SceneSpec spec{.width = 129, .height = 128, .center = {64, 60}, .iod = 24, .identity = 2};
  const Scene s = render_scene(spec);
  for (bool left : {true, false}) {
    const Point2 eye = left ? s.eyes.left_eye : s.eyes.right_eye;
    const double radius = eye_radius(spec.identity, spec.iod, spec.pose_degrees, left);
    // Core of the blob only, so the head outline stays out of the window.
    const Image full = eye_kernel(radius);
    const int c = static_cast<int>(full.cols() / 2);
    const int r = static_cast<int>(std::ceil(1.2 * radius));
    const Image k = full.block(c - r, c - r, 2 * r + 1, 2 * r + 1);
    const int margin = 3;
    const int x0 = static_cast<int>(eye.x) - r - margin;
    const int y0 = static_cast<int>(eye.y) - r - margin;
    const Image patch = s.image.block(y0, x0, k.rows() + 2 * margin, k.cols() + 2 * margin);
    const Peak p = find_peak(spatial_ncc(patch, k, NccMode::MeanSubtracted));
    CHECK(std::abs(x0 + p.xy.x + r - eye.x) <= 0.5);
    CHECK(std::abs(y0 + p.xy.y + r - eye.y) <= 0.5);

    // The darkest pixel around the eye is the eye center itself.
    Eigen::Index my = 0, mx = 0;
    s.image.block(static_cast<int>(eye.y) - 3, static_cast<int>(eye.x) - 3, 7, 7).minCoeff(&my, &mx);
    CHECK(mx == 3);
    CHECK(my == 3);
  }
  const Image k = eye_kernel(2.0);
  CHECK(k.rows() == 11);
  CHECK(k(5, 5) == 0.0);
  CHECK(k(0, 5) > 0.9);
}

TEST_CASE("render: contract errors") {
  CHECK_THROWS_AS(render_scene({.width = 64, .height = 64, .center = {10, 10}, .iod = 24}), Error);
  try {
    render_scene({.width = 64, .height = 64, .center = {10, 10}, .iod = 24});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OutOfBounds);
  }
  CHECK_THROWS_AS(render_scene({.pose_degrees = 31}), Error);
  CHECK_THROWS_AS(render_scene({.iod = 0}), Error);
}
